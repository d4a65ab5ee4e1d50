#include "foresight/pipeline.hpp"

#include "foresight/artifact.hpp"
#include "foresight/error.hpp"
#include "foresight/jsonl.hpp"
#include "foresight/prompts.hpp"
#include "foresight/rng.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <future>
#include <map>
#include <mutex>
#include <set>
#include <thread>

namespace foresight {

std::string to_string(SearchMode m) {
    switch (m) {
        case SearchMode::agentic: return "agentic";
        case SearchMode::nonagentic: return "nonagentic";
        case SearchMode::none: return "none";
    }
    return "agentic";
}

std::string to_string(SupervisorKind k) {
    switch (k) {
        case SupervisorKind::none: return "none";
        case SupervisorKind::best_of_k: return "best_of_k";
        case SupervisorKind::non_agentic: return "non_agentic";
        case SupervisorKind::agentic: return "agentic";
    }
    return "none";
}

SearchMode search_mode_from_string(const std::string& s) {
    if (s == "agentic") return SearchMode::agentic;
    if (s == "nonagentic") return SearchMode::nonagentic;
    if (s == "none") return SearchMode::none;
    throw ConfigError("unknown search mode: " + s);
}

SupervisorKind supervisor_kind_from_string(const std::string& s) {
    if (s == "none") return SupervisorKind::none;
    if (s == "best_of_k") return SupervisorKind::best_of_k;
    if (s == "non_agentic") return SupervisorKind::non_agentic;
    if (s == "agentic") return SupervisorKind::agentic;
    throw ConfigError("unknown supervisor: " + s);
}

DomainBlocklist RunConfig::effective_blocklist() const {
    DomainBlocklist bl;
    for (const auto& name : builtin_blocklists) {
        if (name == "leakage") {
            bl.merge(leakage_blocklist());
        } else if (name == "markets") {
            bl.merge(market_blocklist());
        } else {
            throw ConfigError("blocklists.builtin: unknown list \"" + name + "\"");
        }
    }
    if (!include_market_price) bl.merge(market_blocklist());
    bl.merge(extra_blocklist);
    return bl;
}

void RunConfig::validate(bool have_search_gateway) const {
    if (m_agents < 1) throw ConfigError("pipeline.m_agents must be >= 1");
    if (max_search_stages < 0) throw ConfigError("pipeline.max_search_stages must be >= 0");
    if (nonagentic_queries < 1) throw ConfigError("pipeline.nonagentic_queries must be >= 1");
    if (supervisor_query_cap < 0) throw ConfigError("pipeline.supervisor_query_cap must be >= 0");
    if (max_in_flight < 1) throw ConfigError("pipeline.max_in_flight must be >= 1");
    if (retry.attempts < 1) throw ConfigError("retry.attempts must be >= 1");
    if (!have_search_gateway) {
        if (supervisor == SupervisorKind::agentic && supervisor_query_cap > 0) {
            throw ConfigError("gateways.search: the agentic supervisor requires a search gateway");
        }
        if (search_mode != SearchMode::none && (search_mode == SearchMode::nonagentic || max_search_stages > 0)) {
            throw ConfigError("gateways.search: search mode \"" + to_string(search_mode) +
                              "\" requires a search gateway");
        }
    }
    (void)effective_blocklist();
}

namespace {

GenerationRequest make_request(const RunConfig& config, std::string prompt, std::string system, std::string tag) {
    GenerationRequest r;
    r.prompt = std::move(prompt);
    r.system = std::move(system);
    r.temperature = config.generation.temperature;
    r.max_output_tokens = config.generation.max_output_tokens;
    r.model = config.generation.model;
    r.seed = derive_seed(config.seed, tag);
    r.tag = std::move(tag);
    return r;
}

void absorb(EvidenceAudit& audit, const FetchedEvidence& got) {
    audit.removed_by_blocklist += got.removed_by_blocklist;
    audit.removed_after_cutoff += got.removed_after_cutoff;
    audit.cutoff_echo_complete = audit.cutoff_echo_complete && got.cutoff_echo_complete;
}

}  // namespace

AgentOutcome run_agent(const ValidatedQuestion& question, const RunConfig& config, const Gateways& gateways,
                       int agent_index) {
    const Question& q = question.get();
    if (!gateways.generation) throw ConfigError("missing config key: gateways.generation");
    AgentOutcome out;
    const auto blocklist = config.effective_blocklist();
    const std::string tag = q.id + "/agent/" + std::to_string(agent_index);
    out.audit.market_price_in_prompt = config.include_market_price && q.market_price.has_value();

    std::vector<EvidenceItem> evidence;
    ReasoningTrace trace;
    int budget = config.search_mode == SearchMode::agentic ? config.max_search_stages : 0;

    if (config.search_mode == SearchMode::nonagentic) {
        auto pre = search_nonagentic(q, config.nonagentic_queries, *gateways.generation, *gateways.search, blocklist,
                                     config.retry, tag, config.max_results_per_search);
        absorb(out.audit, pre.evidence);
        out.latency_ms += pre.evidence.latency_ms;
        evidence = std::move(pre.evidence.items);
    }

    int searches_done = 0;
    bool reprompted = false;
    std::string pending_reprompt;
    std::optional<double> answer;
    while (!answer) {
        prompts::AgentContext ctx{&q, config.include_market_price, &evidence, budget - searches_done};
        std::string prompt = prompts::agent_prompt(ctx);
        if (!pending_reprompt.empty()) prompt += "\nYOUR PREVIOUS REPLY:\n" + pending_reprompt + "\n\n" + prompts::final_answer_reprompt();
        const auto req = make_request(config, std::move(prompt), prompts::agent_system(),
                                      tag + "/step/" + std::to_string(trace.steps.size() + 1));
        GenerationResponse resp;
        try {
            resp = with_retry(config.retry, [&] { return gateways.generation->generate(req); });
        } catch (const GatewayError& e) {
            if (e.aborts()) throw;
            out.failure = std::string("generation failed: ") + e.what();
            return out;
        }
        out.latency_ms += resp.latency_ms;
        trace.steps.push_back(resp.text);
        const auto action = prompts::parse_agent_action(resp.text);

        if (action.kind == prompts::AgentAction::Kind::final_answer) {
            answer = action.probability;
        } else if (action.kind == prompts::AgentAction::Kind::search && searches_done < budget && pending_reprompt.empty()) {
            ++searches_done;
            SearchRequest sreq{action.query, q.knowledge_cutoff, config.max_results_per_search, tag + "/search"};
            auto got = fetch_evidence(*gateways.search, sreq, blocklist, config.retry, searches_done);
            absorb(out.audit, got);
            out.latency_ms += got.latency_ms;
            for (auto& it : got.items) evidence.push_back(std::move(it));
        } else if (!reprompted) {
            reprompted = true;
            pending_reprompt = resp.text;
        } else {
            out.failure = "no parseable final answer after one reprompt";
            return out;
        }
    }

    // Cite every evidence item whose URL the reasoning mentions.
    std::set<std::string> seen;
    for (const auto& e : evidence) {
        if (e.source_url.empty() || seen.count(e.source_url)) continue;
        const bool mentioned = std::any_of(trace.steps.begin(), trace.steps.end(),
                                           [&](const std::string& s) { return s.find(e.source_url) != std::string::npos; });
        if (mentioned) {
            seen.insert(e.source_url);
            trace.cited_passages.push_back({e.snippet, e.source_url});
        }
    }

    out.audit.items = static_cast<int>(evidence.size());
    out.audit.undated = static_cast<int>(std::count_if(evidence.begin(), evidence.end(),
                                                       [](const EvidenceItem& e) { return e.undated(); }));
    ForecastRecord rec;
    rec.question_id = q.id;
    rec.agent_index = agent_index;
    rec.probability = Probability(*answer);
    rec.trace = std::move(trace);
    rec.evidence = std::move(evidence);
    check_forecast_record(rec);
    out.record = std::move(rec);
    return out;
}

namespace {

prompts::SupervisorInput supervisor_input(const Question& q, const std::vector<ForecastRecord>& records,
                                          Probability simple_mean, const RunConfig& config) {
    return prompts::SupervisorInput{&q, &records, simple_mean, config.supervisor_query_cap};
}

SupervisorResult low_confidence(Probability simple_mean, std::string summary, std::vector<std::string> queries,
                                long latency) {
    SupervisorResult r;
    r.output.disagreement_summary = std::move(summary);
    r.output.clarifying_queries = std::move(queries);
    r.output.revised_probability = simple_mean;
    r.output.confidence = Confidence::low;
    r.latency_ms = latency;
    return r;
}

}  // namespace

SupervisorResult run_supervisor_agentic(const ValidatedQuestion& question, const std::vector<ForecastRecord>& records,
                                        Probability simple_mean, const RunConfig& config, const Gateways& gateways) {
    const Question& q = question.get();
    if (records.size() < 2) throw std::invalid_argument("run_supervisor_agentic: needs at least 2 forecasts");
    const auto in = supervisor_input(q, records, simple_mean, config);
    const std::string tag = q.id + "/supervisor";
    long latency = 0;
    prompts::DisagreementReply dis;
    try {
        const auto req1 = make_request(config, prompts::supervisor_disagreement_prompt(in),
                                       "You reconcile disagreements between forecasters.", tag + "/disagreement");
        const auto r1 = with_retry(config.retry, [&] { return gateways.generation->generate(req1); });
        latency += r1.latency_ms;
        dis = prompts::parse_disagreement(r1.text, config.supervisor_query_cap);

        std::vector<EvidenceItem> findings;
        const auto blocklist = config.effective_blocklist();
        int stage = 0;
        for (const auto& query : dis.queries) {
            SearchRequest sreq{query, q.knowledge_cutoff, config.max_results_per_search, tag + "/search"};
            auto got = fetch_evidence(*gateways.search, sreq, blocklist, config.retry, ++stage);
            latency += got.latency_ms;
            if (got.failed) return low_confidence(simple_mean, dis.summary, dis.queries, latency);
            for (auto& it : got.items) findings.push_back(std::move(it));
        }

        const auto req3 = make_request(config, prompts::supervisor_revision_prompt(in, dis.summary, findings),
                                       "You reconcile disagreements between forecasters.", tag + "/revision");
        const auto r3 = with_retry(config.retry, [&] { return gateways.generation->generate(req3); });
        latency += r3.latency_ms;
        const auto rev = prompts::parse_revision(r3.text);
        if (!rev) return low_confidence(simple_mean, dis.summary, dis.queries, latency);

        SupervisorResult r;
        r.output.disagreement_summary = dis.summary;
        r.output.clarifying_queries = dis.queries;
        r.output.revised_probability = Probability(rev->revised);
        r.output.confidence = rev->confidence;
        r.latency_ms = latency;
        return r;
    } catch (const GatewayError& e) {
        if (e.aborts()) throw;
        return low_confidence(simple_mean, dis.summary, dis.queries, latency);
    }
}

SupervisorResult run_supervisor_best_of_k(const ValidatedQuestion& question, const std::vector<ForecastRecord>& records,
                                          Probability simple_mean, const RunConfig& config, const Gateways& gateways) {
    const Question& q = question.get();
    std::vector<Probability> candidates;
    for (const auto& r : records) candidates.push_back(r.probability);
    const auto in = supervisor_input(q, records, simple_mean, config);
    const std::string tag = q.id + "/supervisor/best_of_k";

    SupervisorResult out;
    std::optional<double> chosen;
    std::string prompt = prompts::best_of_k_prompt(in);
    for (int attempt = 0; attempt < 2 && !chosen; ++attempt) {
        const auto req = make_request(config, prompt, "You select the best forecast.", tag + "/" + std::to_string(attempt + 1));
        try {
            const auto resp = with_retry(config.retry, [&] { return gateways.generation->generate(req); });
            out.latency_ms += resp.latency_ms;
            chosen = prompts::parse_final_line(resp.text);
            out.output.disagreement_summary = resp.text;
            if (!chosen) prompt += "\nYOUR PREVIOUS REPLY:\n" + resp.text + "\n\n" + prompts::final_answer_reprompt();
        } catch (const GatewayError& e) {
            if (e.aborts()) throw;
            break;
        }
    }
    // Without a usable choice the simple mean is snapped onto the candidate set.
    const auto enforced = best_of_k_enforce(candidates, Probability(chosen.value_or(simple_mean.value())));
    out.output.revised_probability = enforced.value;
    out.output.confidence = Confidence::high;
    out.best_of_k_violation = enforced.violation || !chosen;
    return out;
}

SupervisorResult run_supervisor_nonagentic(const ValidatedQuestion& question, const std::vector<ForecastRecord>& records,
                                           Probability simple_mean, const RunConfig& config, const Gateways& gateways) {
    const Question& q = question.get();
    const auto in = supervisor_input(q, records, simple_mean, config);
    const auto req = make_request(config, prompts::nonagentic_supervisor_prompt(in), "You synthesise forecasts.",
                                  q.id + "/supervisor/non_agentic");
    try {
        const auto resp = with_retry(config.retry, [&] { return gateways.generation->generate(req); });
        const auto p = prompts::parse_final_line(resp.text);
        if (!p) return low_confidence(simple_mean, resp.text, {}, resp.latency_ms);
        SupervisorResult out;
        out.output.disagreement_summary = resp.text;
        out.output.revised_probability = Probability(*p);
        out.output.confidence = Confidence::high;
        out.latency_ms = resp.latency_ms;
        return out;
    } catch (const GatewayError& e) {
        if (e.aborts()) throw;
        return low_confidence(simple_mean, {}, {}, 0);
    }
}

namespace {

FinalForecast run_question_with(const ValidatedQuestion& question, const RunConfig& config, const Gateways& gateways,
                                Semaphore& in_flight) {
    const Question& q = question.get();
    std::vector<std::future<AgentOutcome>> agents;
    agents.reserve(static_cast<std::size_t>(config.m_agents));
    for (int i = 1; i <= config.m_agents; ++i) {
        agents.push_back(std::async(std::launch::async, [&, i] {
            SemaphoreGuard guard(in_flight);
            return run_agent(question, config, gateways, i);
        }));
    }
    std::vector<AgentOutcome> outcomes;
    std::exception_ptr first_error;
    for (auto& f : agents) {
        try {
            outcomes.push_back(f.get());
        } catch (...) {
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);

    FinalForecast ff;
    ff.question_id = q.id;
    ff.calibration = config.calibration;
    for (auto& o : outcomes) {
        ff.latency_ms += o.latency_ms;
        ff.audit.items += o.audit.items;
        ff.audit.undated += o.audit.undated;
        ff.audit.removed_by_blocklist += o.audit.removed_by_blocklist;
        ff.audit.removed_after_cutoff += o.audit.removed_after_cutoff;
        ff.audit.cutoff_echo_complete = ff.audit.cutoff_echo_complete && o.audit.cutoff_echo_complete;
        ff.audit.market_price_in_prompt = ff.audit.market_price_in_prompt || o.audit.market_price_in_prompt;
        if (o.record) {
            ff.individual.push_back(std::move(*o.record));
        } else {
            ++ff.failed_agents;
        }
    }
    if (ff.individual.empty()) {
        ff.status = ForecastStatus::unforecast;
        return ff;
    }

    std::vector<Probability> probs;
    for (const auto& r : ff.individual) probs.push_back(r.probability);
    auto method = config.aggregation;
    if (method == AggregationMethod::trimmed_mean && probs.size() < 3) method = AggregationMethod::mean;
    const Probability raw = aggregate(probs, method);
    ff.aggregate_raw = raw;

    Probability merged = raw;
    if (config.supervisor != SupervisorKind::none && ff.individual.size() >= 2) {
        SupervisorResult sup;
        switch (config.supervisor) {
            case SupervisorKind::agentic:
                sup = run_supervisor_agentic(question, ff.individual, raw, config, gateways);
                break;
            case SupervisorKind::best_of_k:
                sup = run_supervisor_best_of_k(question, ff.individual, raw, config, gateways);
                break;
            case SupervisorKind::non_agentic:
                sup = run_supervisor_nonagentic(question, ff.individual, raw, config, gateways);
                break;
            case SupervisorKind::none: break;
        }
        ff.latency_ms += sup.latency_ms;
        ff.best_of_k_violation = sup.best_of_k_violation;
        merged = merge_supervisor(raw, sup.output);
        ff.supervisor = std::move(sup.output);
    }
    ff.merged = merged;
    ff.final_probability = calibrate(merged, config.calibration);
    return ff;
}

}  // namespace

FinalForecast run_question(const ValidatedQuestion& question, const RunConfig& config, const Gateways& gateways) {
    config.validate(gateways.search != nullptr);
    Semaphore in_flight(config.max_in_flight);
    return run_question_with(question, config, gateways, in_flight);
}

ScoreReport rescore(const std::vector<Question>& questions, const std::vector<FinalForecast>& forecasts) {
    if (questions.size() != forecasts.size()) throw DataError("rescore: questions and forecasts are not aligned");
    std::vector<ScoredForecast> scored;
    ScoreReport rep;
    for (std::size_t i = 0; i < questions.size(); ++i) {
        const auto& q = questions[i];
        const auto& f = forecasts[i];
        if (f.question_id != q.id) throw DataError("rescore: forecast " + f.question_id + " does not match question " + q.id);
        if (f.status == ForecastStatus::unforecast || !f.final_probability) {
            rep.excluded.emplace_back(q.id, "unforecast");
        } else if (!q.resolved()) {
            rep.excluded.emplace_back(q.id, "unresolved");
        } else {
            scored.push_back({q.id, *f.final_probability, q.outcome_bit()});
        }
    }
    auto s = score(scored);
    s.excluded = std::move(rep.excluded);
    return s;
}

namespace {

struct Progress {
    std::map<std::string, FinalForecast> done;
};

Progress read_progress(const std::filesystem::path& path, const std::set<std::string>& ids) {
    Progress p;
    std::string text = read_text_file(path);
    // A final line without its newline is a torn append from an interrupted
    // run; that question simply runs again.
    if (!text.empty() && text.back() != '\n') {
        const auto nl = text.rfind('\n');
        text.erase(nl == std::string::npos ? 0 : nl + 1);
    }
    std::vector<json> lines;
    try {
        lines = parse_jsonl(text, schema::progress, path.string());
    } catch (const DataError& e) {
        throw DataError(std::string("partial run state is corrupt, refusing to resume: ") + e.what());
    }
    for (const auto& j : lines) {
        FinalForecast f;
        try {
            f = j.get<FinalForecast>();
        } catch (const std::exception& e) {
            throw DataError(std::string("partial run state is corrupt, refusing to resume: ") + e.what());
        }
        if (!ids.count(f.question_id)) {
            throw DataError("partial run state is corrupt, refusing to resume: unknown question " + f.question_id);
        }
        if (!p.done.emplace(f.question_id, std::move(f)).second) {
            throw DataError("partial run state is corrupt, refusing to resume: duplicate question " + j.value("question_id", ""));
        }
    }
    return p;
}

}  // namespace

BenchmarkResult run_benchmark(const std::vector<ValidatedQuestion>& dataset, const RunConfig& config,
                              const Gateways& gateways, const std::filesystem::path& run_dir,
                              const BenchmarkOptions& options) {
    namespace fs = std::filesystem;
    config.validate(gateways.search != nullptr);

    std::vector<Question> questions;
    std::set<std::string> ids;
    for (const auto& vq : dataset) {
        if (!ids.insert(vq->id).second) throw DataError("duplicate question id in dataset: " + vq->id);
        questions.push_back(vq.get());
    }
    std::vector<json> qjson(questions.begin(), questions.end());
    const std::string config_doc = artifact::config_document(config);
    const std::string questions_doc = dump_jsonl(schema::questions, qjson);
    const auto progress_path = run_dir / artifact::kProgress;

    Progress progress;
    if (options.resume) {
        if (!fs::exists(progress_path)) throw DataError("no partial run to resume in " + run_dir.string());
        if (read_text_file(run_dir / artifact::kConfig) != config_doc) {
            throw DataError("refusing to resume: configuration differs from the interrupted run");
        }
        if (read_text_file(run_dir / artifact::kQuestions) != questions_doc) {
            throw DataError("refusing to resume: dataset differs from the interrupted run");
        }
        progress = read_progress(progress_path, ids);
        // Rewrite without any torn tail so appends start on a fresh line.
        std::vector<json> kept;
        for (const auto& q : questions) {
            if (auto it = progress.done.find(q.id); it != progress.done.end()) kept.emplace_back(it->second);
        }
        write_jsonl(progress_path, schema::progress, kept);
    } else {
        if (fs::exists(progress_path)) {
            throw DataError("a partial run exists in " + run_dir.string() + "; resume it or use a fresh directory");
        }
        fs::create_directories(run_dir);
        for (const char* f : {artifact::kForecasts, artifact::kScores, artifact::kSummary, artifact::kExclusions}) {
            fs::remove(run_dir / f);
        }
        write_text_file(run_dir / artifact::kConfig, config_doc);
        write_text_file(run_dir / artifact::kQuestions, questions_doc);
        write_text_file(progress_path, schema_line(schema::progress) + "\n");
    }

    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (!progress.done.count(questions[i].id)) pending.push_back(i);
    }
    bool truncated = false;
    if (options.stop_after && *options.stop_after < pending.size()) {
        pending.resize(*options.stop_after);
        truncated = true;
    }

    std::mutex mu;
    std::ofstream progress_out(progress_path, std::ios::binary | std::ios::app);
    if (!progress_out) throw DataError("cannot append to " + progress_path.string());
    std::map<std::string, FinalForecast> fresh;
    std::exception_ptr first_error;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    Semaphore in_flight(config.max_in_flight);

    auto worker = [&] {
        for (;;) {
            const std::size_t k = next++;
            if (k >= pending.size() || stop) return;
            const auto& vq = dataset[pending[k]];
            try {
                auto ff = quantized(run_question_with(vq, config, gateways, in_flight));
                std::lock_guard lock(mu);
                progress_out << json(ff).dump() << '\n';
                progress_out.flush();
                fresh.emplace(ff.question_id, std::move(ff));
            } catch (...) {
                std::lock_guard lock(mu);
                if (!first_error) first_error = std::current_exception();
                stop = true;
                return;
            }
        }
    };
    const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(config.max_in_flight), pending.size());
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < n_workers; ++w) workers.emplace_back(worker);
    for (auto& t : workers) t.join();
    progress_out.close();
    if (first_error) std::rethrow_exception(first_error);

    BenchmarkResult result;
    result.newly_completed = fresh.size();
    if (truncated) return result;

    RunArtifact art;
    art.config = config;
    art.questions = questions;
    for (const auto& q : questions) {
        auto it = fresh.find(q.id);
        FinalForecast f = it != fresh.end() ? it->second : progress.done.at(q.id);
        art.total_latency_ms += f.latency_ms;
        art.forecasts.push_back(std::move(f));
    }
    art.scores = rescore(art.questions, art.forecasts);
    artifact::write(run_dir, art);
    fs::remove(progress_path);
    result.complete = true;
    result.artifact = std::move(art);
    return result;
}

}  // namespace foresight
