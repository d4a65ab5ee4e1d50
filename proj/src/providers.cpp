#include "foresight/providers.hpp"

#include "foresight/prompts.hpp"

#include <algorithm>
#include <cctype>

namespace foresight {

GenerationGateway& Gateways::judge_gateway() const {
    if (judge) return *judge;
    if (generation) return *generation;
    throw ConfigError("missing config key: gateways.judge (no judge or generation gateway configured)");
}

void Semaphore::acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [this] { return permits_ > 0; });
    --permits_;
}

void Semaphore::release() {
    {
        std::lock_guard lock(mu_);
        ++permits_;
    }
    cv_.notify_one();
}

namespace {

void charge_budget(std::atomic<long>& made, long budget) {
    const long n = ++made;
    if (budget >= 0 && n > budget) {
        throw BudgetExhausted("request budget of " + std::to_string(budget) + " exhausted");
    }
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

LimitedGenerationGateway::LimitedGenerationGateway(std::shared_ptr<GenerationGateway> inner, GatewayLimits limits)
    : inner_(std::move(inner)), limits_(limits), sem_(std::max(1, limits.max_concurrency)) {}

GenerationResponse LimitedGenerationGateway::generate(const GenerationRequest& request) {
    charge_budget(made_, limits_.request_budget);
    SemaphoreGuard guard(sem_);
    return inner_->generate(request);
}

LimitedSearchGateway::LimitedSearchGateway(std::shared_ptr<SearchGateway> inner, GatewayLimits limits)
    : inner_(std::move(inner)), limits_(limits), sem_(std::max(1, limits.max_concurrency)) {}

SearchResult LimitedSearchGateway::search(const SearchRequest& request) {
    charge_budget(made_, limits_.request_budget);
    SemaphoreGuard guard(sem_);
    return inner_->search(request);
}

std::string url_host(const std::string& url) {
    auto scheme = url.find("://");
    std::size_t start = scheme == std::string::npos ? 0 : scheme + 3;
    std::size_t end = url.find_first_of("/?#", start);
    std::string authority = url.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (auto at = authority.rfind('@'); at != std::string::npos) authority = authority.substr(at + 1);
    if (auto colon = authority.find(':'); colon != std::string::npos) authority = authority.substr(0, colon);
    while (!authority.empty() && authority.back() == '.') authority.pop_back();
    return lower(authority);
}

bool DomainBlocklist::blocks(const std::string& url) const {
    if (std::find(blocked_urls.begin(), blocked_urls.end(), url) != blocked_urls.end()) return true;
    const std::string host = url_host(url);
    if (host.empty()) return false;
    for (const auto& d : blocked_domains) {
        const std::string dom = lower(d);
        if (host == dom) return true;
        if (host.size() > dom.size() && host.compare(host.size() - dom.size(), dom.size(), dom) == 0 &&
            host[host.size() - dom.size() - 1] == '.') {
            return true;
        }
    }
    return false;
}

DomainBlocklist& DomainBlocklist::merge(const DomainBlocklist& other) {
    for (const auto& d : other.blocked_domains) {
        if (std::find(blocked_domains.begin(), blocked_domains.end(), d) == blocked_domains.end()) {
            blocked_domains.push_back(d);
        }
    }
    for (const auto& u : other.blocked_urls) {
        if (std::find(blocked_urls.begin(), blocked_urls.end(), u) == blocked_urls.end()) blocked_urls.push_back(u);
    }
    return *this;
}

DomainBlocklist leakage_blocklist() {
    return DomainBlocklist{
        {},
        {
            "https://en.wikipedia.org/wiki/FIDE_rankings",
            "https://en.wikipedia.org/wiki/Sarasadat_Khademalsharieh",
            "https://en.wikipedia.org/wiki/Nodirbek_Abdusattorov",
            "https://weatherspark.com/h/m/56493/2024/7/Historical-Weather-in-July-2024-in-Strasbourg-France",
            "https://weatherspark.com/h/m/147731/2024/7/Historical-Weather-in-July-2024-at-Brest-Brittany-France",
            "https://weatherspark.com/h/m/50604/2024/7/Historical-Weather-in-July-2024-in-Lyon-France",
            "https://www.macrotrends.net/stocks/charts/HUM/humana/stock-price-history",
            "https://www.nasdaq.com/market-activity/stocks/tsco",
            "https://en.wikipedia.org/wiki/Viswanathan_Anand",
            "https://www.historique-meteo.net/caraibes/guadeloupe/pointe-a-pitre/2024/07/",
        },
    };
}

DomainBlocklist market_blocklist() {
    return DomainBlocklist{
        {"polymarket.com", "kalshi.com", "manifold.markets", "predictit.org", "metaculus.com",
         "smarkets.com", "betfair.com", "insightprediction.com"},
        {},
    };
}

BlocklistOutcome apply_blocklist(std::vector<EvidenceItem> items, const DomainBlocklist& bl) {
    BlocklistOutcome out;
    out.items.reserve(items.size());
    for (auto& it : items) {
        if (bl.blocks(it.source_url)) {
            ++out.removed;
        } else {
            out.items.push_back(std::move(it));
        }
    }
    return out;
}

FetchedEvidence fetch_evidence(SearchGateway& gateway, const SearchRequest& request, const DomainBlocklist& blocklist,
                               const RetryPolicy& retry, int stage_index) {
    FetchedEvidence out;
    SearchResult result;
    try {
        result = with_retry(retry, [&] { return gateway.search(request); });
    } catch (const GatewayError& e) {
        if (e.aborts()) throw;
        out.failed = true;
        return out;
    }
    out.latency_ms = result.latency_ms;
    std::vector<EvidenceItem> kept;
    for (auto& item : result.items) {
        if (item.date_cutoff != request.date_cutoff) out.cutoff_echo_complete = false;
        item.date_cutoff = request.date_cutoff;
        item.query = request.query;
        item.stage_index = stage_index;
        if (item.published_date && *item.published_date > request.date_cutoff) {
            ++out.removed_after_cutoff;
            continue;
        }
        kept.push_back(std::move(item));
    }
    auto filtered = apply_blocklist(std::move(kept), blocklist);
    out.items = std::move(filtered.items);
    out.removed_by_blocklist = filtered.removed;
    return out;
}

std::vector<std::string> parse_query_lines(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        line = line.substr(b);
        // List markers: "-", "*", "1.", "2)".
        if (line[0] == '-' || line[0] == '*') {
            line = line.substr(1);
        } else {
            std::size_t d = 0;
            while (d < line.size() && std::isdigit(static_cast<unsigned char>(line[d]))) ++d;
            if (d > 0 && d < line.size() && (line[d] == '.' || line[d] == ')')) line = line.substr(d + 1);
        }
        auto s = line.find_first_not_of(" \t");
        auto e = line.find_last_not_of(" \t\r");
        if (s == std::string::npos) continue;
        line = line.substr(s, e - s + 1);
        if (line.size() >= 2 && line.front() == '"' && line.back() == '"') line = line.substr(1, line.size() - 2);
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

NonAgenticSearch search_nonagentic(const Question& question, int k, GenerationGateway& generation, SearchGateway& search,
                                   const DomainBlocklist& blocklist, const RetryPolicy& retry, const std::string& tag,
                                   int max_results) {
    if (k < 1) throw std::invalid_argument("search_nonagentic: k must be >= 1");
    NonAgenticSearch out;
    GenerationRequest req;
    req.prompt = prompts::query_generation_prompt(question, k);
    req.system = "You write web search queries for forecasting research.";
    const std::string base = tag.empty() ? question.id : tag;
    req.tag = base + "/queries";
    GenerationResponse resp;
    try {
        resp = with_retry(retry, [&] { return generation.generate(req); });
    } catch (const GatewayError& e) {
        if (e.aborts()) throw;
        out.evidence_less = true;
        return out;
    }
    out.queries = parse_query_lines(resp.text);
    if (out.queries.size() > static_cast<std::size_t>(k)) out.queries.resize(static_cast<std::size_t>(k));
    out.evidence.latency_ms = resp.latency_ms;

    bool any_ok = false;
    for (const auto& q : out.queries) {
        SearchRequest sreq{q, question.knowledge_cutoff, max_results, base + "/search"};
        auto got = fetch_evidence(search, sreq, blocklist, retry, 1);
        out.evidence.latency_ms += got.latency_ms;
        out.evidence.removed_by_blocklist += got.removed_by_blocklist;
        out.evidence.removed_after_cutoff += got.removed_after_cutoff;
        out.evidence.cutoff_echo_complete = out.evidence.cutoff_echo_complete && got.cutoff_echo_complete;
        if (got.failed) continue;
        any_ok = true;
        for (auto& it : got.items) out.evidence.items.push_back(std::move(it));
    }
    out.evidence_less = !any_ok;
    return out;
}

}  // namespace foresight
