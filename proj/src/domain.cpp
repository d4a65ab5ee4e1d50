#include "foresight/domain.hpp"

#include "foresight/error.hpp"

#include <algorithm>
#include <cmath>

namespace foresight {

Probability clamp_probability(double p, double epsilon) {
    if (!std::isfinite(p)) throw std::invalid_argument("clamp_probability: non-finite input");
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw std::invalid_argument("clamp_probability: epsilon must lie in (0, 0.5)");
    return Probability(std::min(std::max(p, epsilon), 1.0 - epsilon));
}

double logit(double p) { return std::log(p / (1.0 - p)); }

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double quantize_probability(double p) {
    constexpr double scale = 1e6;
    static_assert(kProbabilityDecimals == 6);
    return std::round(p * scale) / scale;
}

int Question::outcome_bit() const {
    if (!outcome) throw DataError("question " + id + " is unresolved");
    return *outcome >= 0.5 ? 1 : 0;
}

ValidatedQuestion validate_question(Question q) {
    if (q.id.empty()) throw DataError("question has an empty id");
    if (q.text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw DataError("question " + q.id + ": empty text");
    }
    if (q.knowledge_cutoff > q.resolution_date) {
        throw DataError("question " + q.id + ": knowledge cutoff " + q.knowledge_cutoff.iso() +
                        " is after resolution date " + q.resolution_date.iso());
    }
    if (q.outcome && *q.outcome != 0.0 && *q.outcome != 1.0) {
        throw DataError("question " + q.id + ": outcome must be 0 or 1, got " + std::to_string(*q.outcome));
    }
    return ValidatedQuestion(std::move(q));
}

std::string ReasoningTrace::joined() const {
    std::string out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (i) out += "\n\n";
        out += steps[i];
    }
    return out;
}

void check_trace_linkage(const ReasoningTrace& trace) {
    for (const auto& c : trace.cited_passages) {
        const bool linked = std::any_of(trace.steps.begin(), trace.steps.end(), [&](const std::string& s) {
            return (!c.source_url.empty() && s.find(c.source_url) != std::string::npos) ||
                   (!c.text.empty() && s.find(c.text) != std::string::npos);
        });
        if (!linked) throw DataError("cited passage not referenced by any reasoning step: " + c.source_url);
    }
}

void check_forecast_record(const ForecastRecord& r) {
    if (r.agent_index < 1) throw DataError("forecast record agent_index must be >= 1");
    if (!r.evidence.empty() && r.trace.empty()) {
        throw DataError("forecast record for " + r.question_id + " has evidence but no reasoning trace");
    }
    int last = 1;
    for (const auto& e : r.evidence) {
        if (e.stage_index < last) {
            throw DataError("evidence stage indices decrease in record for " + r.question_id);
        }
        last = e.stage_index;
    }
    check_trace_linkage(r.trace);
}

CalibrationMap CalibrationMap::identity() {
    CalibrationMap m;
    m.method = CalibrationMethod::identity;
    return m;
}

CalibrationMap CalibrationMap::platt(double alpha, double gamma) {
    if (!(alpha > 0.0) || !std::isfinite(alpha) || !std::isfinite(gamma)) {
        throw std::invalid_argument("platt map needs finite alpha > 0 and finite gamma");
    }
    CalibrationMap m;
    m.method = CalibrationMethod::platt;
    m.alpha = alpha;
    m.gamma = gamma;
    return m;
}

namespace {

Probability q6(Probability p) { return Probability(quantize_probability(p.value())); }
std::optional<Probability> q6(const std::optional<Probability>& p) {
    return p ? std::optional<Probability>(q6(*p)) : std::nullopt;
}

template <class T>
std::optional<T> opt(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->template get<T>();
}

const json& req(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw DataError(std::string("missing field: ") + key);
    return *it;
}

}  // namespace

FinalForecast quantized(FinalForecast f) {
    for (auto& r : f.individual) r.probability = q6(r.probability);
    f.aggregate_raw = q6(f.aggregate_raw);
    f.merged = q6(f.merged);
    f.final_probability = q6(f.final_probability);
    if (f.supervisor) f.supervisor->revised_probability = q6(f.supervisor->revised_probability);
    return f;
}

std::string to_string(QuestionSource s) {
    switch (s) {
        case QuestionSource::market: return "market";
        case QuestionSource::curated: return "curated";
        case QuestionSource::live: return "live";
    }
    return "curated";
}

std::string to_string(Confidence c) {
    switch (c) {
        case Confidence::high: return "high";
        case Confidence::medium: return "medium";
        case Confidence::low: return "low";
    }
    return "low";
}

std::string to_string(CalibrationMethod m) {
    switch (m) {
        case CalibrationMethod::platt: return "platt";
        case CalibrationMethod::isotonic: return "isotonic";
        case CalibrationMethod::linear: return "linear";
        case CalibrationMethod::identity: return "identity";
    }
    return "identity";
}

QuestionSource question_source_from_string(const std::string& s) {
    if (s == "market") return QuestionSource::market;
    if (s == "curated") return QuestionSource::curated;
    if (s == "live") return QuestionSource::live;
    throw DataError("unknown question source: " + s);
}

Confidence confidence_from_string(const std::string& s) {
    std::string t;
    for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "high") return Confidence::high;
    if (t == "medium") return Confidence::medium;
    if (t == "low") return Confidence::low;
    throw DataError("unknown confidence level: " + s);
}

CalibrationMethod calibration_method_from_string(const std::string& s) {
    if (s == "platt") return CalibrationMethod::platt;
    if (s == "isotonic") return CalibrationMethod::isotonic;
    if (s == "linear") return CalibrationMethod::linear;
    if (s == "identity") return CalibrationMethod::identity;
    throw DataError("unknown calibration method: " + s);
}

void to_json(json& j, const Probability& p) { j = quantize_probability(p.value()); }
void from_json(const json& j, Probability& p) {
    if (!j.is_number()) throw DataError("probability must be a number");
    p = Probability(j.get<double>());
}

void to_json(json& j, const Date& d) { j = d.iso(); }
void from_json(const json& j, Date& d) {
    if (!j.is_string()) throw DataError("date must be an ISO-8601 string");
    d = Date::parse(j.get<std::string>());
}

void to_json(json& j, const Question& q) {
    j = json{{"id", q.id},
             {"text", q.text},
             {"knowledge_cutoff", q.knowledge_cutoff},
             {"resolution_date", q.resolution_date},
             {"outcome", q.outcome ? json(static_cast<int>(*q.outcome)) : json(nullptr)},
             {"market_price", q.market_price ? json(*q.market_price) : json(nullptr)},
             {"source", to_string(q.source)},
             {"category", q.category}};
    if (q.outcome && *q.outcome != 0.0 && *q.outcome != 1.0) j["outcome"] = *q.outcome;
}

void from_json(const json& j, Question& q) {
    q.id = req(j, "id").get<std::string>();
    q.text = req(j, "text").get<std::string>();
    q.knowledge_cutoff = req(j, "knowledge_cutoff").get<Date>();
    q.resolution_date = req(j, "resolution_date").get<Date>();
    q.outcome = opt<double>(j, "outcome");
    q.market_price = opt<Probability>(j, "market_price");
    q.source = question_source_from_string(j.value("source", std::string("curated")));
    q.category = j.value("category", std::string());
}

void to_json(json& j, const EvidenceItem& e) {
    j = json{{"query", e.query},
             {"snippet", e.snippet},
             {"source_url", e.source_url},
             {"published_date", e.published_date ? json(*e.published_date) : json(nullptr)},
             {"retrieved_at", e.retrieved_at},
             {"date_cutoff", e.date_cutoff},
             {"stage_index", e.stage_index}};
}

void from_json(const json& j, EvidenceItem& e) {
    e.query = j.value("query", std::string());
    e.snippet = req(j, "snippet").get<std::string>();
    e.source_url = req(j, "source_url").get<std::string>();
    e.published_date = opt<Date>(j, "published_date");
    e.retrieved_at = j.value("retrieved_at", std::string());
    e.date_cutoff = req(j, "date_cutoff").get<Date>();
    e.stage_index = req(j, "stage_index").get<int>();
    if (e.stage_index < 1) throw DataError("evidence stage_index must be >= 1");
}

void to_json(json& j, const ReasoningTrace& t) {
    json cited = json::array();
    for (const auto& c : t.cited_passages) cited.push_back({{"text", c.text}, {"source_url", c.source_url}});
    j = json{{"steps", t.steps}, {"cited_passages", cited}};
}

void from_json(const json& j, ReasoningTrace& t) {
    t.steps = req(j, "steps").get<std::vector<std::string>>();
    t.cited_passages.clear();
    for (const auto& c : j.value("cited_passages", json::array())) {
        t.cited_passages.push_back({c.at("text").get<std::string>(), c.at("source_url").get<std::string>()});
    }
}

void to_json(json& j, const ForecastRecord& r) {
    j = json{{"question_id", r.question_id},
             {"agent_index", r.agent_index},
             {"probability", r.probability},
             {"trace", r.trace},
             {"evidence", r.evidence}};
}

void from_json(const json& j, ForecastRecord& r) {
    r.question_id = req(j, "question_id").get<std::string>();
    r.agent_index = req(j, "agent_index").get<int>();
    r.probability = req(j, "probability").get<Probability>();
    r.trace = req(j, "trace").get<ReasoningTrace>();
    r.evidence = j.value("evidence", json::array()).get<std::vector<EvidenceItem>>();
    check_forecast_record(r);
}

void to_json(json& j, const SupervisorOutput& s) {
    j = json{{"disagreement_summary", s.disagreement_summary},
             {"clarifying_queries", s.clarifying_queries},
             {"revised_probability", s.revised_probability},
             {"confidence", to_string(s.confidence)}};
}

void from_json(const json& j, SupervisorOutput& s) {
    s.disagreement_summary = j.value("disagreement_summary", std::string());
    s.clarifying_queries = j.value("clarifying_queries", std::vector<std::string>{});
    s.revised_probability = req(j, "revised_probability").get<Probability>();
    s.confidence = confidence_from_string(req(j, "confidence").get<std::string>());
}

void to_json(json& j, const CalibrationMap& m) {
    j = json{{"method", to_string(m.method)}, {"alpha", m.alpha}, {"gamma", m.gamma}};
    if (!m.knots.empty()) {
        json knots = json::array();
        for (const auto& k : m.knots) knots.push_back({k.x, k.y});
        j["knots"] = knots;
    }
    if (m.linear_coeffs) j["linear"] = {m.linear_coeffs->first, m.linear_coeffs->second};
}

void from_json(const json& j, CalibrationMap& m) {
    m = CalibrationMap{};
    m.method = calibration_method_from_string(req(j, "method").get<std::string>());
    m.alpha = j.value("alpha", 1.0);
    m.gamma = j.value("gamma", 0.0);
    if (m.method == CalibrationMethod::platt && !(m.alpha > 0.0)) throw DataError("platt alpha must be > 0");
    if (auto it = j.find("knots"); it != j.end()) {
        for (const auto& k : *it) m.knots.push_back({k.at(0).get<double>(), k.at(1).get<double>()});
        for (std::size_t i = 1; i < m.knots.size(); ++i) {
            if (m.knots[i].x < m.knots[i - 1].x || m.knots[i].y < m.knots[i - 1].y) {
                throw DataError("isotonic knots must be non-decreasing");
            }
        }
    }
    if (m.method == CalibrationMethod::isotonic && m.knots.empty()) throw DataError("isotonic map has no knots");
    if (auto it = j.find("linear"); it != j.end()) {
        m.linear_coeffs = std::make_pair(it->at(0).get<double>(), it->at(1).get<double>());
    }
    if (m.method == CalibrationMethod::linear && !m.linear_coeffs) throw DataError("linear map has no coefficients");
}

void to_json(json& j, const EvidenceAudit& a) {
    j = json{{"items", a.items},
             {"undated", a.undated},
             {"removed_by_blocklist", a.removed_by_blocklist},
             {"removed_after_cutoff", a.removed_after_cutoff},
             {"cutoff_echo_complete", a.cutoff_echo_complete},
             {"market_price_in_prompt", a.market_price_in_prompt}};
}

void from_json(const json& j, EvidenceAudit& a) {
    a.items = j.value("items", 0);
    a.undated = j.value("undated", 0);
    a.removed_by_blocklist = j.value("removed_by_blocklist", 0);
    a.removed_after_cutoff = j.value("removed_after_cutoff", 0);
    a.cutoff_echo_complete = j.value("cutoff_echo_complete", true);
    a.market_price_in_prompt = j.value("market_price_in_prompt", false);
}

void to_json(json& j, const FinalForecast& f) {
    j = json{{"question_id", f.question_id},
             {"status", f.status == ForecastStatus::forecast ? "forecast" : "unforecast"},
             {"individual", f.individual},
             {"failed_agents", f.failed_agents},
             {"aggregate_raw", f.aggregate_raw ? json(*f.aggregate_raw) : json(nullptr)},
             {"supervisor", f.supervisor ? json(*f.supervisor) : json(nullptr)},
             {"best_of_k_violation", f.best_of_k_violation},
             {"merged", f.merged ? json(*f.merged) : json(nullptr)},
             {"final", f.final_probability ? json(*f.final_probability) : json(nullptr)},
             {"calibration", f.calibration},
             {"audit", f.audit},
             {"latency_ms", f.latency_ms}};
}

void from_json(const json& j, FinalForecast& f) {
    f.question_id = req(j, "question_id").get<std::string>();
    const auto status = req(j, "status").get<std::string>();
    if (status == "forecast") {
        f.status = ForecastStatus::forecast;
    } else if (status == "unforecast") {
        f.status = ForecastStatus::unforecast;
    } else {
        throw DataError("unknown forecast status: " + status);
    }
    f.individual = req(j, "individual").get<std::vector<ForecastRecord>>();
    f.failed_agents = j.value("failed_agents", 0);
    f.aggregate_raw = opt<Probability>(j, "aggregate_raw");
    f.supervisor = opt<SupervisorOutput>(j, "supervisor");
    f.best_of_k_violation = j.value("best_of_k_violation", false);
    f.merged = opt<Probability>(j, "merged");
    f.final_probability = opt<Probability>(j, "final");
    f.calibration = req(j, "calibration").get<CalibrationMap>();
    f.audit = j.value("audit", json::object()).get<EvidenceAudit>();
    f.latency_ms = j.value("latency_ms", 0L);
    if (f.status == ForecastStatus::forecast && !f.final_probability) {
        throw DataError("forecast " + f.question_id + " has no final probability");
    }
}

}  // namespace foresight
