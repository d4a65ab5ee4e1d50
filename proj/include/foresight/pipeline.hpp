#pragma once

#include "foresight/aggregation.hpp"
#include "foresight/calibration.hpp"
#include "foresight/domain.hpp"
#include "foresight/providers.hpp"
#include "foresight/scoring.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace foresight {

inline constexpr int kDefaultMaxSearchStages = 8;
inline constexpr int kDefaultSupervisorQueryCap = 5;

enum class SearchMode { agentic, nonagentic, none };
enum class SupervisorKind { none, best_of_k, non_agentic, agentic };

std::string to_string(SearchMode m);
std::string to_string(SupervisorKind k);
SearchMode search_mode_from_string(const std::string& s);
SupervisorKind supervisor_kind_from_string(const std::string& s);

struct GenerationSettings {
    std::string model = "default";
    double temperature = 1.0;
    int max_output_tokens = 4096;

    friend bool operator==(const GenerationSettings&, const GenerationSettings&) = default;
};

struct RunConfig {
    int m_agents = kDefaultAgents;
    int max_search_stages = kDefaultMaxSearchStages;
    SearchMode search_mode = SearchMode::agentic;
    int nonagentic_queries = kDefaultNonAgenticQueries;
    int max_results_per_search = 10;
    SupervisorKind supervisor = SupervisorKind::none;
    int supervisor_query_cap = kDefaultSupervisorQueryCap;
    AggregationMethod aggregation = AggregationMethod::mean;
    CalibrationMap calibration = CalibrationMap::platt(kDefaultExtremization, 0.0);
    bool include_market_price = false;
    std::vector<std::string> builtin_blocklists{"leakage"};
    DomainBlocklist extra_blocklist;
    RetryPolicy retry;
    GenerationSettings generation;
    int max_in_flight = 8;
    std::uint64_t seed = 0;

    // Configured blocklists, plus prediction-market domains whenever market
    // prices are withheld from the agents.
    DomainBlocklist effective_blocklist() const;
    void validate(bool have_search_gateway) const;
};

json config_to_json(const RunConfig& c);
RunConfig config_from_json(const json& j);

struct AgentOutcome {
    std::optional<ForecastRecord> record;
    std::string failure;  // why no record was produced
    EvidenceAudit audit;
    long latency_ms = 0;
};

// One forecasting agent: alternate search / answer decisions until a
// "FINAL: <p>" line, with at most max_search_stages search rounds.
AgentOutcome run_agent(const ValidatedQuestion& question, const RunConfig& config,
                       const Gateways& gateways, int agent_index);

struct SupervisorResult {
    SupervisorOutput output;
    bool best_of_k_violation = false;
    long latency_ms = 0;
};

// Three steps: summarise disagreement, run up to N clarifying searches,
// revise with a confidence grade. Gateway failure degrades to low confidence.
SupervisorResult run_supervisor_agentic(const ValidatedQuestion& question,
                                        const std::vector<ForecastRecord>& records,
                                        Probability simple_mean, const RunConfig& config,
                                        const Gateways& gateways);

// Chooses one of the agents' probabilities; enforced to the candidate set.
SupervisorResult run_supervisor_best_of_k(const ValidatedQuestion& question,
                                          const std::vector<ForecastRecord>& records,
                                          Probability simple_mean, const RunConfig& config,
                                          const Gateways& gateways);

// Unconstrained synthesis of the agents' forecasts, no searching.
SupervisorResult run_supervisor_nonagentic(const ValidatedQuestion& question,
                                           const std::vector<ForecastRecord>& records,
                                           Probability simple_mean, const RunConfig& config,
                                           const Gateways& gateways);

FinalForecast run_question(const ValidatedQuestion& question, const RunConfig& config,
                           const Gateways& gateways);

struct RunArtifact {
    RunConfig config;
    std::vector<Question> questions;
    std::vector<FinalForecast> forecasts;  // aligned with questions
    ScoreReport scores;
    long total_latency_ms = 0;
};

// Scores persisted final probabilities against resolved outcomes, in
// question order. Unforecast and unresolved questions are excluded and listed.
ScoreReport rescore(const std::vector<Question>& questions, const std::vector<FinalForecast>& forecasts);

struct BenchmarkOptions {
    // Stop after completing this many new questions, leaving resumable partial
    // state behind. Used to exercise interruption.
    std::optional<std::size_t> stop_after;
    bool resume = false;
};

struct BenchmarkResult {
    bool complete = false;
    std::size_t newly_completed = 0;
    std::optional<RunArtifact> artifact;  // present when complete
};

BenchmarkResult run_benchmark(const std::vector<ValidatedQuestion>& dataset, const RunConfig& config,
                              const Gateways& gateways, const std::filesystem::path& run_dir,
                              const BenchmarkOptions& options = {});

}  // namespace foresight
