#include "foresight/integrity.hpp"

#include "foresight/error.hpp"
#include "foresight/prompts.hpp"
#include "foresight/rng.hpp"

#include <atomic>
#include <algorithm>
#include <cctype>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace foresight {

int FlagRecord::agent_index() const {
    std::size_t i = 0;
    while (i < trace_id.size() && std::isdigit(static_cast<unsigned char>(trace_id[i]))) ++i;
    if (i == 0 || (i < trace_id.size() && trace_id[i] != '/')) {
        throw DataError("malformed trace_id \"" + trace_id + "\" for question " + question_id);
    }
    return std::stoi(trace_id.substr(0, i));
}

void to_json(json& j, const FlagRecord& f) {
    j = json{{"question_id", f.question_id},
             {"trace_id", f.trace_id},
             {"has_foreknowledge", f.has_foreknowledge},
             {"confidence_level", to_string(f.confidence_level)},
             {"evidence_quotes", f.evidence_quotes},
             {"evidence_explanation", f.evidence_explanation},
             {"legitimate_reasoning", f.legitimate_reasoning},
             {"key_indicators", f.key_indicators},
             {"overall_assessment", f.overall_assessment}};
}

namespace {

void verdict_from_json(const json& j, FlagRecord& f) {
    f.has_foreknowledge = j.at("has_foreknowledge").get<bool>();
    f.confidence_level = confidence_from_string(j.at("confidence_level").get<std::string>());
    f.evidence_quotes = j.at("evidence_quotes").get<std::vector<std::string>>();
    f.evidence_explanation = j.at("evidence_explanation").get<std::string>();
    f.legitimate_reasoning = j.at("legitimate_reasoning").get<bool>();
    f.key_indicators = j.at("key_indicators").get<std::vector<std::string>>();
    f.overall_assessment = j.at("overall_assessment").get<std::string>();
}

}  // namespace

void from_json(const json& j, FlagRecord& f) {
    f.question_id = j.at("question_id").get<std::string>();
    f.trace_id = j.at("trace_id").get<std::string>();
    verdict_from_json(j, f);
}

FlagRecord parse_judge_response(const std::string& text, const std::string& question_id,
                                const std::string& trace_id) {
    const auto b = text.find('{');
    const auto e = text.rfind('}');
    if (b == std::string::npos || e == std::string::npos || e < b) {
        throw DataError("judge reply has no JSON object");
    }
    FlagRecord f;
    f.question_id = question_id;
    f.trace_id = trace_id;
    try {
        verdict_from_json(json::parse(text.substr(b, e - b + 1)), f);
    } catch (const json::exception& ex) {
        throw DataError(std::string("judge reply: ") + ex.what());
    } catch (const ConfigError& ex) {
        throw DataError(std::string("judge reply: ") + ex.what());
    }
    return f;
}

std::string judge_prompt(const Question& question, const ForecastRecord& record, const std::string& model_name,
                         const std::string& tmpl) {
    std::ostringstream out;
    out << record.trace.joined();
    if (!record.evidence.empty()) {
        out << "\n\nSEARCH RESULTS SEEN BY THE MODEL:\n";
        for (std::size_t i = 0; i < record.evidence.size(); ++i) {
            const auto& e = record.evidence[i];
            out << "[" << i + 1 << "] " << e.source_url << " ("
                << (e.published_date ? e.published_date->iso() : std::string("undated")) << ")\n    " << e.snippet
                << "\n";
        }
    }
    std::string resolution = "unresolved";
    if (question.resolved()) resolution = question.outcome_bit() == 1 ? "YES" : "NO";
    return prompts::fill_template(tmpl.empty() ? prompts::judge_template() : std::string_view(tmpl),
                                  {{"question", question.text},
                                   {"news_end_date", question.knowledge_cutoff.iso()},
                                   {"resolution_date", question.resolution_date.iso()},
                                   {"resolution", resolution},
                                   {"model_name", model_name},
                                   {"probability", record.probability.value()},
                                   {"model_output", out.str()}});
}

FlagRecord judge_trace(const Question& question, const ForecastRecord& record, GenerationGateway& gateway,
                       const JudgeOptions& opts) {
    if (!question.resolved()) throw std::invalid_argument("judge_trace: question " + question.id + " is unresolved");
    const std::string trace_id = std::to_string(record.agent_index);
    const std::string tag = question.id + "/judge/" + trace_id;
    std::string prompt = judge_prompt(question, record, opts.model_name, opts.template_text);
    for (int attempt = 1; attempt <= 2; ++attempt) {
        GenerationRequest req;
        req.prompt = prompt;
        req.system = "You audit forecasts for use of information from after the knowledge cutoff.";
        req.temperature = 0.0;
        req.model = opts.model_name;
        req.tag = tag + "/" + std::to_string(attempt);
        req.seed = derive_seed(0, req.tag);
        std::string reply;
        try {
            reply = with_retry(opts.retry, [&] { return gateway.generate(req); }).text;
        } catch (const GatewayError& e) {
            if (e.aborts()) throw;
            break;
        }
        try {
            return parse_judge_response(reply, question.id, trace_id);
        } catch (const DataError&) {
            prompt += "\n\nYour previous reply could not be parsed. Reply with only the JSON object.";
        }
    }
    FlagRecord f;
    f.question_id = question.id;
    f.trace_id = trace_id;
    f.has_foreknowledge = true;
    f.confidence_level = Confidence::low;
    f.legitimate_reasoning = false;
    f.overall_assessment = "judge reply unusable; flagged conservatively";
    return f;
}

std::vector<FlagRecord> judge_run(const RunArtifact& run, GenerationGateway& gateway, const JudgeOptions& opts,
                                  int parallelism) {
    struct Job {
        const Question* q;
        const ForecastRecord* r;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < run.questions.size(); ++i) {
        if (!run.questions[i].resolved()) continue;
        for (const auto& r : run.forecasts.at(i).individual) jobs.push_back({&run.questions[i], &r});
    }
    std::vector<FlagRecord> out(jobs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex mu;
    auto worker = [&] {
        for (std::size_t k; (k = next++) < jobs.size();) {
            try {
                out[k] = judge_trace(*jobs[k].q, *jobs[k].r, gateway, opts);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) error = std::current_exception();
                next = jobs.size();
            }
        }
    };
    std::vector<std::thread> pool;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(parallelism, 1)), jobs.size());
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

std::map<std::string, FlagCounts> count_flags(const std::vector<FlagRecord>& flags) {
    std::map<std::string, std::set<int>> traces;
    std::map<std::string, FlagCounts> counts;
    for (const auto& f : flags) {
        if (!f.has_foreknowledge) continue;
        ++counts[f.question_id].per_response;
        traces[f.question_id].insert(f.agent_index());
    }
    for (auto& [id, c] : counts) c.per_trace = static_cast<int>(traces[id].size());
    return counts;
}

namespace {

void check_flags_join(const RunArtifact& run, const std::vector<FlagRecord>& flags) {
    std::map<std::string, std::set<int>> agents;
    for (const auto& f : run.forecasts) {
        auto& s = agents[f.question_id];
        for (const auto& r : f.individual) s.insert(r.agent_index);
    }
    for (const auto& f : flags) {
        auto it = agents.find(f.question_id);
        if (it == agents.end()) throw DataError("flag refers to unknown question " + f.question_id);
        if (!it->second.count(f.agent_index())) {
            throw DataError("flag refers to unknown trace " + f.question_id + "/" + f.trace_id);
        }
    }
}

std::optional<Probability> pooled(const RunArtifact& run, const std::vector<ForecastRecord>& records,
                                  const AuditOptions& opts) {
    if (records.empty()) return std::nullopt;
    std::vector<Probability> ps;
    for (const auto& r : records) ps.push_back(r.probability);
    auto method = run.config.aggregation;
    if (method == AggregationMethod::trimmed_mean && ps.size() < 3) method = AggregationMethod::mean;
    const Probability p = aggregate(ps, method);
    return opts.apply_calibration ? calibrate(p, run.config.calibration) : p;
}

template <class Pick>
ScoreReport audit_score(const RunArtifact& run, Pick pick) {
    if (run.questions.size() != run.forecasts.size()) throw DataError("run questions and forecasts are not aligned");
    std::vector<ScoredForecast> scored;
    std::vector<std::pair<std::string, std::string>> excluded;
    for (std::size_t i = 0; i < run.questions.size(); ++i) {
        const auto& q = run.questions[i];
        std::string reason;
        const auto p = pick(q, run.forecasts[i], reason);
        if (!p) {
            excluded.emplace_back(q.id, reason);
        } else if (!q.resolved()) {
            excluded.emplace_back(q.id, "unresolved");
        } else {
            scored.push_back({q.id, *p, q.outcome_bit()});
        }
    }
    auto rep = score(scored);
    rep.excluded = std::move(excluded);
    return rep;
}

}  // namespace

ScoreReport baseline_score(const RunArtifact& run, const AuditOptions& opts) {
    return audit_score(run, [&](const Question&, const FinalForecast& f, std::string& reason) {
        reason = "unforecast";
        return pooled(run, f.individual, opts);
    });
}

ScoreReport filtered_score(const RunArtifact& run, const std::vector<FlagRecord>& flags, const AuditOptions& opts) {
    check_flags_join(run, flags);
    std::set<std::pair<std::string, int>> flagged;
    for (const auto& f : flags) {
        if (f.has_foreknowledge) flagged.emplace(f.question_id, f.agent_index());
    }
    return audit_score(run, [&](const Question& q, const FinalForecast& f, std::string& reason) {
        std::vector<ForecastRecord> kept;
        for (const auto& r : f.individual) {
            if (!flagged.count({q.id, r.agent_index})) kept.push_back(r);
        }
        reason = f.individual.empty() ? "unforecast" : "all_traces_flagged";
        return pooled(run, kept, opts);
    });
}

ScoreReport worst_case_score(const RunArtifact& run, const std::vector<FlagRecord>& flags, int threshold,
                             const AuditOptions& opts) {
    if (threshold < 1) throw std::invalid_argument("worst_case_score: threshold must be >= 1");
    check_flags_join(run, flags);
    const auto counts = count_flags(flags);
    return audit_score(run, [&](const Question& q, const FinalForecast& f, std::string& reason) -> std::optional<Probability> {
        if (auto it = counts.find(q.id); it != counts.end()) {
            const int c = opts.count_responses ? it->second.per_response : it->second.per_trace;
            if (c >= threshold) return Probability(0.5);
        }
        reason = "unforecast";
        return pooled(run, f.individual, opts);
    });
}

PrevalenceEstimate estimate_prevalence(long n_total, long flags, double precision, double recall) {
    if (n_total <= 0) throw std::invalid_argument("estimate_prevalence: n_total must be positive");
    if (flags < 0 || flags > n_total) throw std::invalid_argument("estimate_prevalence: flags must lie in [0, n_total]");
    if (!(precision > 0.0 && precision <= 1.0)) throw std::invalid_argument("estimate_prevalence: precision must lie in (0, 1]");
    if (!(recall > 0.0 && recall <= 1.0)) throw std::invalid_argument("estimate_prevalence: recall must lie in (0, 1]");
    PrevalenceEstimate e;
    e.n_total = static_cast<double>(n_total);
    e.flags = static_cast<double>(flags);
    e.est_tp = precision * e.flags;
    e.est_fp = e.flags - e.est_tp;
    e.est_fn = e.est_tp * (1.0 - recall) / recall;
    e.est_tn = (e.n_total - e.flags) - e.est_fn;
    e.est_prevalence = (e.est_tp + e.est_fn) / e.n_total;
    return e;
}

std::optional<double> ConfusionCounts::precision() const {
    if (tp + fp == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

std::optional<double> ConfusionCounts::recall() const {
    if (tp + fn == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

std::optional<double> ConfusionCounts::false_negative_rate() const {
    if (tp + fn == 0) return std::nullopt;
    return static_cast<double>(fn) / static_cast<double>(tp + fn);
}

ConfusionCounts judge_validation_tally(const std::vector<AuditLabel>& labels) {
    ConfusionCounts c;
    for (const auto& l : labels) {
        if (l.flagged && l.truly_leaky) ++c.tp;
        else if (l.flagged) ++c.fp;
        else if (l.truly_leaky) ++c.fn;
        else ++c.tn;
    }
    return c;
}

}  // namespace foresight
