#pragma once

#include "foresight/date.hpp"
#include "foresight/probability.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace foresight {

using json = nlohmann::json;

enum class QuestionSource { market, curated, live };

struct Question {
    std::string id;
    std::string text;
    Date knowledge_cutoff;
    Date resolution_date;
    std::optional<double> outcome;  // 0 or 1 once resolved
    std::optional<Probability> market_price;
    QuestionSource source = QuestionSource::curated;
    std::string category;

    bool resolved() const noexcept { return outcome.has_value(); }
    int outcome_bit() const;  // throws DataError when unresolved

    friend bool operator==(const Question&, const Question&) = default;
};

// A question that has passed validate_question. Only constructible through it.
class ValidatedQuestion {
public:
    const Question& get() const noexcept { return q_; }
    const Question* operator->() const noexcept { return &q_; }
    operator const Question&() const noexcept { return q_; }

private:
    friend ValidatedQuestion validate_question(Question q);
    explicit ValidatedQuestion(Question q) : q_(std::move(q)) {}
    Question q_;
};

ValidatedQuestion validate_question(Question q);
inline const ValidatedQuestion& validate_question(const ValidatedQuestion& q) { return q; }

struct EvidenceItem {
    std::string query;
    std::string snippet;
    std::string source_url;
    std::optional<Date> published_date;
    std::string retrieved_at;  // ISO-8601 timestamp as reported by the backend
    Date date_cutoff;          // the cutoff the search was requested under
    int stage_index = 1;

    bool undated() const noexcept { return !published_date.has_value(); }
    friend bool operator==(const EvidenceItem&, const EvidenceItem&) = default;
};

struct CitedPassage {
    std::string text;
    std::string source_url;
    friend bool operator==(const CitedPassage&, const CitedPassage&) = default;
};

struct ReasoningTrace {
    std::vector<std::string> steps;
    std::vector<CitedPassage> cited_passages;

    bool empty() const noexcept { return steps.empty(); }
    std::string joined() const;
    friend bool operator==(const ReasoningTrace&, const ReasoningTrace&) = default;
};

// Every cited passage must be referenced (by URL or text) from some step.
void check_trace_linkage(const ReasoningTrace& trace);

struct ForecastRecord {
    std::string question_id;
    int agent_index = 1;
    Probability probability;
    ReasoningTrace trace;
    std::vector<EvidenceItem> evidence;

    friend bool operator==(const ForecastRecord&, const ForecastRecord&) = default;
};

void check_forecast_record(const ForecastRecord& r);

enum class Confidence { high, medium, low };

struct SupervisorOutput {
    std::string disagreement_summary;
    std::vector<std::string> clarifying_queries;
    Probability revised_probability;
    Confidence confidence = Confidence::low;

    friend bool operator==(const SupervisorOutput&, const SupervisorOutput&) = default;
};

enum class CalibrationMethod { platt, isotonic, linear, identity };

struct Knot {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Knot&, const Knot&) = default;
};

// Sigmoid-in-log-odds correction sigmoid(alpha * logit(p) + gamma), or one of
// the alternative correctors. gamma = log d in the d * p^a / (d * p^a + (1-p)^a)
// parameterisation.
struct CalibrationMap {
    CalibrationMethod method = CalibrationMethod::platt;
    double alpha = 1.0;
    double gamma = 0.0;
    std::vector<Knot> knots;                                 // isotonic
    std::optional<std::pair<double, double>> linear_coeffs;  // (intercept, slope)

    static CalibrationMap identity();
    static CalibrationMap platt(double alpha, double gamma = 0.0);

    friend bool operator==(const CalibrationMap&, const CalibrationMap&) = default;
};

enum class ForecastStatus { forecast, unforecast };

struct EvidenceAudit {
    int items = 0;
    int undated = 0;
    int removed_by_blocklist = 0;
    int removed_after_cutoff = 0;
    bool cutoff_echo_complete = true;  // every item carries the requested cutoff
    bool market_price_in_prompt = false;

    friend bool operator==(const EvidenceAudit&, const EvidenceAudit&) = default;
};

struct FinalForecast {
    std::string question_id;
    ForecastStatus status = ForecastStatus::forecast;
    std::vector<ForecastRecord> individual;
    int failed_agents = 0;
    std::optional<Probability> aggregate_raw;
    std::optional<SupervisorOutput> supervisor;
    bool best_of_k_violation = false;
    std::optional<Probability> merged;
    std::optional<Probability> final_probability;
    CalibrationMap calibration;
    EvidenceAudit audit;
    long latency_ms = 0;  // sum of backend-reported latencies

    friend bool operator==(const FinalForecast&, const FinalForecast&) = default;
};

// Rounds every persisted probability to the declared precision.
FinalForecast quantized(FinalForecast f);

std::string to_string(QuestionSource s);
std::string to_string(Confidence c);
std::string to_string(CalibrationMethod m);
QuestionSource question_source_from_string(const std::string& s);
Confidence confidence_from_string(const std::string& s);
CalibrationMethod calibration_method_from_string(const std::string& s);

void to_json(json& j, const Probability& p);
void from_json(const json& j, Probability& p);
void to_json(json& j, const Date& d);
void from_json(const json& j, Date& d);
void to_json(json& j, const Question& q);
void from_json(const json& j, Question& q);
void to_json(json& j, const EvidenceItem& e);
void from_json(const json& j, EvidenceItem& e);
void to_json(json& j, const ReasoningTrace& t);
void from_json(const json& j, ReasoningTrace& t);
void to_json(json& j, const ForecastRecord& r);
void from_json(const json& j, ForecastRecord& r);
void to_json(json& j, const SupervisorOutput& s);
void from_json(const json& j, SupervisorOutput& s);
void to_json(json& j, const CalibrationMap& m);
void from_json(const json& j, CalibrationMap& m);
void to_json(json& j, const EvidenceAudit& a);
void from_json(const json& j, EvidenceAudit& a);
void to_json(json& j, const FinalForecast& f);
void from_json(const json& j, FinalForecast& f);

}  // namespace foresight
