#pragma once

#include "foresight/pipeline.hpp"
#include "foresight/providers.hpp"
#include "foresight/scoring.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace foresight {

inline constexpr int kDefaultWorstCaseThreshold = 5;

// Judge verdict on one agent trace (trace_id "<agent_index>") or on one
// search response within it ("<agent_index>/<evidence_index>"). The verdict
// fields mirror the judge's JSON response schema.
struct FlagRecord {
    std::string question_id;
    std::string trace_id;
    bool has_foreknowledge = false;
    Confidence confidence_level = Confidence::low;
    std::vector<std::string> evidence_quotes;
    std::string evidence_explanation;
    bool legitimate_reasoning = true;
    std::vector<std::string> key_indicators;
    std::string overall_assessment;

    int agent_index() const;  // leading integer of trace_id
    friend bool operator==(const FlagRecord&, const FlagRecord&) = default;
};

void to_json(json& j, const FlagRecord& f);
void from_json(const json& j, FlagRecord& f);

// Parses the judge's JSON verdict (the outermost {...} in the reply).
// Throws DataError on missing or mistyped fields.
FlagRecord parse_judge_response(const std::string& text, const std::string& question_id,
                                const std::string& trace_id);

std::string judge_prompt(const Question& question, const ForecastRecord& record,
                         const std::string& model_name, const std::string& tmpl);

struct JudgeOptions {
    std::string model_name = "default";
    std::string template_text;  // empty: built-in
    RetryPolicy retry;
};

// Unparseable twice, or gateway exhausted: a conservative flag
// (has_foreknowledge = true, confidence low).
FlagRecord judge_trace(const Question& question, const ForecastRecord& record,
                       GenerationGateway& gateway, const JudgeOptions& opts = {});

// Judges every agent trace on the run's resolved questions, in question then
// agent order, with up to `parallelism` calls in flight.
std::vector<FlagRecord> judge_run(const RunArtifact& run, GenerationGateway& gateway,
                                  const JudgeOptions& opts = {}, int parallelism = 8);

struct FlagCounts {
    int per_trace = 0;     // distinct agent traces with a positive flag
    int per_response = 0;  // positive flag records
};

std::map<std::string, FlagCounts> count_flags(const std::vector<FlagRecord>& flags);

struct AuditOptions {
    // Rebuild from the raw aggregate (no supervisor), optionally recalibrated.
    bool apply_calibration = false;
    bool count_responses = false;  // threshold on per-response counts instead of per-trace
};

// Baseline for the robustness checks: every question's aggregate recomputed
// from its agent records with the run's aggregation method.
ScoreReport baseline_score(const RunArtifact& run, const AuditOptions& opts = {});

// Drops flagged agent records and recomputes each aggregate over survivors.
// Questions left with no records are excluded and counted.
ScoreReport filtered_score(const RunArtifact& run, const std::vector<FlagRecord>& flags,
                           const AuditOptions& opts = {});

// Questions with at least `threshold` flags are scored as p = 0.5.
ScoreReport worst_case_score(const RunArtifact& run, const std::vector<FlagRecord>& flags,
                             int threshold = kDefaultWorstCaseThreshold, const AuditOptions& opts = {});

struct PrevalenceEstimate {
    double n_total = 0;
    double flags = 0;
    double est_tp = 0;
    double est_fp = 0;
    double est_fn = 0;
    double est_tn = 0;
    double est_prevalence = 0;
};

PrevalenceEstimate estimate_prevalence(long n_total, long flags, double precision, double recall);

struct ConfusionCounts {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;

    long n() const { return tp + fp + tn + fn; }
    std::optional<double> precision() const;  // undefined with no flags
    std::optional<double> recall() const;     // undefined with no leaks
    std::optional<double> false_negative_rate() const;
};

struct AuditLabel {
    bool flagged = false;
    bool truly_leaky = false;
};

ConfusionCounts judge_validation_tally(const std::vector<AuditLabel>& labels);

}  // namespace foresight
