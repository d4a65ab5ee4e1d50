#pragma once

#include "foresight/domain.hpp"
#include "foresight/error.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <condition_variable>
#include <string>
#include <thread>
#include <vector>

namespace foresight {

struct GenerationRequest {
    std::string prompt;
    std::string system;
    double temperature = 1.0;
    int max_output_tokens = 4096;
    std::string model;
    // Caller identity, e.g. "q12/agent/3". Scripted mocks match on it.
    std::string tag;
    std::uint64_t seed = 0;
};

struct GenerationResponse {
    std::string text;
    int prompt_tokens = 0;
    int completion_tokens = 0;
    long latency_ms = 0;
};

struct SearchRequest {
    std::string query;
    Date date_cutoff;
    int max_results = 10;
    std::string tag;
};

struct SearchResult {
    std::vector<EvidenceItem> items;
    long latency_ms = 0;
};

class GenerationGateway {
public:
    virtual ~GenerationGateway() = default;
    virtual GenerationResponse generate(const GenerationRequest& request) = 0;
};

class SearchGateway {
public:
    virtual ~SearchGateway() = default;
    virtual SearchResult search(const SearchRequest& request) = 0;
};

struct Gateways {
    std::shared_ptr<GenerationGateway> generation;
    std::shared_ptr<SearchGateway> search;
    // Foreknowledge judge; falls back to `generation` when unset.
    std::shared_ptr<GenerationGateway> judge;

    GenerationGateway& judge_gateway() const;
};

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds base_delay{200};
    double backoff = 2.0;
};

// Runs fn, retrying transient GatewayErrors with exponential backoff.
// The last failure is rethrown once attempts are exhausted.
template <class Fn>
auto with_retry(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
    auto delay = policy.base_delay;
    for (int attempt = 1;; ++attempt) {
        try {
            return fn();
        } catch (const GatewayError& e) {
            if (e.aborts() || !e.transient() || attempt >= policy.attempts) throw;
        }
        if (delay.count() > 0) std::this_thread::sleep_for(delay);
        delay = std::chrono::milliseconds(static_cast<long>(static_cast<double>(delay.count()) * policy.backoff));
    }
}

class Semaphore {
public:
    explicit Semaphore(int permits) : permits_(permits) {}
    void acquire();
    void release();

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int permits_;
};

class SemaphoreGuard {
public:
    explicit SemaphoreGuard(Semaphore& s) : s_(s) { s_.acquire(); }
    ~SemaphoreGuard() { s_.release(); }
    SemaphoreGuard(const SemaphoreGuard&) = delete;
    SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

private:
    Semaphore& s_;
};

struct GatewayLimits {
    int max_concurrency = 8;
    long request_budget = -1;  // negative: unlimited
};

// Enforces a concurrency cap and a total request budget on a wrapped gateway.
class LimitedGenerationGateway final : public GenerationGateway {
public:
    LimitedGenerationGateway(std::shared_ptr<GenerationGateway> inner, GatewayLimits limits);
    GenerationResponse generate(const GenerationRequest& request) override;
    long requests_made() const noexcept { return made_.load(); }

private:
    std::shared_ptr<GenerationGateway> inner_;
    GatewayLimits limits_;
    Semaphore sem_;
    std::atomic<long> made_{0};
};

class LimitedSearchGateway final : public SearchGateway {
public:
    LimitedSearchGateway(std::shared_ptr<SearchGateway> inner, GatewayLimits limits);
    SearchResult search(const SearchRequest& request) override;
    long requests_made() const noexcept { return made_.load(); }

private:
    std::shared_ptr<SearchGateway> inner_;
    GatewayLimits limits_;
    Semaphore sem_;
    std::atomic<long> made_{0};
};

// Host-suffix (case-insensitive) and exact-URL blocking.
struct DomainBlocklist {
    std::vector<std::string> blocked_domains;
    std::vector<std::string> blocked_urls;

    bool blocks(const std::string& url) const;
    bool empty() const noexcept { return blocked_domains.empty() && blocked_urls.empty(); }
    DomainBlocklist& merge(const DomainBlocklist& other);
};

// Pages whose content was updated after the fact and leaked outcomes.
DomainBlocklist leakage_blocklist();
// Prediction-market platforms, blocked whenever market prices must stay hidden.
DomainBlocklist market_blocklist();

// Lower-cased host of an http(s) URL, without port or userinfo. Empty if none.
std::string url_host(const std::string& url);

struct BlocklistOutcome {
    std::vector<EvidenceItem> items;
    int removed = 0;
};

BlocklistOutcome apply_blocklist(std::vector<EvidenceItem> items, const DomainBlocklist& bl);

struct FetchedEvidence {
    std::vector<EvidenceItem> items;
    int removed_by_blocklist = 0;
    int removed_after_cutoff = 0;
    bool cutoff_echo_complete = true;
    long latency_ms = 0;
    bool failed = false;  // retries exhausted; no evidence for this query
};

// One search round: retries, local date re-check against published_date,
// cutoff echo audit, blocklist. Items get the query and stage index stamped.
FetchedEvidence fetch_evidence(SearchGateway& gateway, const SearchRequest& request,
                               const DomainBlocklist& blocklist, const RetryPolicy& retry,
                               int stage_index);

inline constexpr int kDefaultNonAgenticQueries = 3;

struct NonAgenticSearch {
    std::vector<std::string> queries;
    FetchedEvidence evidence;
    bool evidence_less = false;  // query generation or every search failed
};

// One generation call proposes k queries; each runs once; results are
// concatenated in query order. No follow-ups.
NonAgenticSearch search_nonagentic(const Question& question, int k, GenerationGateway& generation,
                                   SearchGateway& search, const DomainBlocklist& blocklist,
                                   const RetryPolicy& retry, const std::string& tag = {},
                                   int max_results = 10);

// Splits a model response into queries: one per non-empty line, with list
// markers and surrounding quotes stripped.
std::vector<std::string> parse_query_lines(const std::string& text);

}  // namespace foresight
