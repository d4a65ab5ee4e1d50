#include "foresight/cli.hpp"

#include "foresight/artifact.hpp"
#include "foresight/benchkit.hpp"
#include "foresight/calibration.hpp"
#include "foresight/config.hpp"
#include "foresight/ensemblereg.hpp"
#include "foresight/error.hpp"
#include "foresight/integrity.hpp"
#include "foresight/jsonl.hpp"
#include "foresight/pipeline.hpp"
#include "foresight/report.hpp"
#include "foresight/scoring.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <map>
#include <optional>

namespace foresight::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "Configuration file");
    cmd->add_option("--seed", c.seed, "Seed overriding the configuration");
    cmd->add_option("--out", c.out, "Output run directory (default: config output_dir)");
}

AppConfig load(const Common& c) {
    AppConfig cfg;
    if (!c.config.empty()) {
        cfg = load_config(c.config);
    } else {
        cfg.base_dir = fs::current_path();
    }
    if (c.seed) cfg.run.seed = *c.seed;
    return cfg;
}

fs::path out_dir(const Common& c, const AppConfig& cfg, const fs::path& fallback = {}) {
    if (!c.out.empty()) return c.out;
    if (!fallback.empty()) return fallback;
    if (!c.config.empty()) return cfg.base_dir / cfg.output_dir;
    return cfg.output_dir;
}

std::vector<MarketRecord> read_markets(const fs::path& path) {
    std::vector<MarketRecord> out;
    for (const auto& j : read_jsonl(path, schema::markets)) {
        try {
            out.push_back(j.get<MarketRecord>());
        } catch (const json::exception& e) {
            throw DataError(path.string() + ": " + e.what());
        }
    }
    return out;
}

void write_markets(const fs::path& path, const std::vector<MarketRecord>& markets) {
    std::vector<json> rows(markets.begin(), markets.end());
    write_jsonl(path, schema::markets, rows);
}

std::vector<FlagRecord> read_flags(const fs::path& path) {
    std::vector<FlagRecord> out;
    for (const auto& j : read_jsonl(path, schema::flags)) {
        try {
            out.push_back(j.get<FlagRecord>());
        } catch (const json::exception& e) {
            throw DataError(path.string() + ": " + e.what());
        }
    }
    return out;
}

// (pre-calibration forecast, outcome) pairs from a run, or from a pairs file.
std::vector<LabeledForecast> read_pairs(const std::string& run_dir, const std::string& pairs_path) {
    std::vector<LabeledForecast> pairs;
    if (!pairs_path.empty()) {
        for (const auto& j : read_jsonl(pairs_path, schema::pairs)) {
            try {
                const int o = j.at("outcome").get<int>();
                if (o != 0 && o != 1) throw DataError(pairs_path + ": outcome must be 0 or 1");
                pairs.push_back({j.at("p").get<Probability>(), o});
            } catch (const json::exception& e) {
                throw DataError(pairs_path + ": " + e.what());
            }
        }
        return pairs;
    }
    const auto run = artifact::load(run_dir);
    for (std::size_t i = 0; i < run.questions.size(); ++i) {
        const auto& f = run.forecasts[i];
        if (run.questions[i].resolved() && f.merged) pairs.push_back({*f.merged, run.questions[i].outcome_bit()});
    }
    return pairs;
}

std::map<std::string, double> brier_by_id(const ScoreReport& s) {
    std::map<std::string, double> m;
    for (const auto& q : s.per_question) m[q.question_id] = q.brier;
    return m;
}

std::vector<SynthesisQuestion> synthesis_inputs(const RunArtifact& run) {
    std::vector<SynthesisQuestion> out;
    for (std::size_t i = 0; i < run.questions.size(); ++i) {
        const auto& q = run.questions[i];
        const auto& f = run.forecasts[i];
        if (!q.resolved() || !f.final_probability || f.individual.empty()) continue;
        SynthesisQuestion s;
        s.aggregate_brier = brier(*f.final_probability, q.outcome_bit());
        for (const auto& r : f.individual) s.individual_briers.push_back(brier(r.probability, q.outcome_bit()));
        out.push_back(std::move(s));
    }
    return out;
}

// Questions carrying both a final forecast and a market price, with outcomes.
std::optional<EnsembleRow> ensemble_for(const RunArtifact& run, int n_boot, std::uint64_t seed) {
    std::vector<double> xf, xm;
    std::vector<int> o;
    for (std::size_t i = 0; i < run.questions.size(); ++i) {
        const auto& q = run.questions[i];
        const auto& f = run.forecasts[i];
        if (!q.resolved() || !q.market_price || !f.final_probability) continue;
        xf.push_back(f.final_probability->value());
        xm.push_back(q.market_price->value());
        o.push_back(q.outcome_bit());
    }
    if (xf.size() < 3) return std::nullopt;
    return ensemble_row(xf, xm, o, n_boot, seed);
}

IntegritySummary integrity_for(const RunArtifact& run, const std::vector<FlagRecord>& flags, int threshold,
                               const AuditOptions& opts, ScoreReport* worst_out = nullptr) {
    IntegritySummary s;
    s.threshold = threshold;
    const auto base = baseline_score(run, opts);
    const auto filt = filtered_score(run, flags, opts);
    const auto worst = worst_case_score(run, flags, threshold, opts);
    s.baseline = base.mean_brier;
    s.filtered = filt.mean_brier;
    s.worst_case = worst.mean_brier;
    s.filtered_questions = filt.n_questions;
    for (const auto& f : flags) s.flags += f.has_foreknowledge ? 1 : 0;
    for (const auto& [id, c] : count_flags(flags)) {
        if ((opts.count_responses ? c.per_response : c.per_trace) >= threshold) ++s.worst_case_imputed;
    }
    if (worst_out) *worst_out = worst;
    return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Judgmental forecasting benchmark toolkit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    Common common;

    // bench
    auto* bench = app.add_subcommand("bench", "Benchmark construction");
    bench->require_subcommand(1);
    std::string markets_path;
    auto* ingest = bench->add_subcommand("ingest", "Filter a raw market dump");
    add_common(ingest, common);
    ingest->add_option("--markets", markets_path, "Raw market records")->required();
    auto* make_market = bench->add_subcommand("make-market", "Reword markets and emit dated questions");
    add_common(make_market, common);
    make_market->add_option("--markets", markets_path, "Market records")->required();
    std::string snapshot_date;
    std::optional<std::size_t> snapshot_size;
    auto* snapshot = bench->add_subcommand("snapshot-live", "Sample today's open markets");
    add_common(snapshot, common);
    snapshot->add_option("--markets", markets_path, "Currently open market records")->required();
    snapshot->add_option("--date", snapshot_date, "Snapshot date, YYYY-MM-DD")->required();
    snapshot->add_option("--size", snapshot_size, "Sample size");

    // forecast
    auto* forecast = app.add_subcommand("forecast", "Run the forecasting pipeline");
    forecast->require_subcommand(1);
    auto* frun = forecast->add_subcommand("run", "Forecast a question set");
    add_common(frun, common);
    std::string questions_path;
    bool resume = false;
    std::optional<std::size_t> stop_after;
    frun->add_option("--questions", questions_path, "Question dataset")->required();
    frun->add_flag("--resume", resume, "Resume an interrupted run in the output directory");
    frun->add_option("--stop-after", stop_after, "Stop after this many newly completed questions");

    // calibrate
    auto* calib = app.add_subcommand("calibrate", "Fit or sweep calibration maps");
    calib->require_subcommand(1);
    std::string run_dir, pairs_path, method = "platt", loss = "log";
    bool fit_gamma = false;
    auto* cfit = calib->add_subcommand("fit", "Fit a calibration map");
    add_common(cfit, common);
    auto* src_run = cfit->add_option("--run", run_dir, "Run directory supplying pre-calibration forecasts");
    cfit->add_option("--pairs", pairs_path, "Calibration pairs file")->excludes(src_run);
    cfit->add_option("--method", method, "platt, isotonic or linear")
        ->check(CLI::IsMember({"platt", "isotonic", "linear"}));
    cfit->add_option("--loss", loss, "Platt loss: log or brier")->check(CLI::IsMember({"log", "brier"}));
    cfit->add_flag("--fit-gamma", fit_gamma, "Also fit the log-odds shift");
    double lo = 0.5, hi = 3.0, step = 0.01;
    auto* csweep = calib->add_subcommand("sweep", "Brier across a grid of log-odds slopes");
    add_common(csweep, common);
    auto* sweep_run = csweep->add_option("--run", run_dir, "Run directory");
    csweep->add_option("--pairs", pairs_path, "Calibration pairs file")->excludes(sweep_run);
    csweep->add_option("--lo", lo, "Grid start");
    csweep->add_option("--hi", hi, "Grid end");
    csweep->add_option("--step", step, "Grid step");

    // scoring and analysis
    auto* score_cmd = app.add_subcommand("score", "Re-score a persisted run");
    add_common(score_cmd, common);
    score_cmd->add_option("--run", run_dir, "Run directory")->required();

    std::string run_a, run_b;
    std::optional<int> resamples;
    auto* compare = app.add_subcommand("compare", "Paired bootstrap between two runs");
    add_common(compare, common);
    compare->add_option("--a", run_a, "First run directory")->required();
    compare->add_option("--b", run_b, "Second run directory")->required();
    compare->add_option("--resamples", resamples, "Bootstrap resamples");

    std::optional<int> n_boot;
    auto* ensemble = app.add_subcommand("ensemble", "Mix forecasts with market prices");
    add_common(ensemble, common);
    ensemble->add_option("--run", run_dir, "Run directory")->required();
    ensemble->add_option("--boot", n_boot, "Bootstrap resamples for the weight interval");

    auto* judge = app.add_subcommand("judge", "Screen agent traces for foreknowledge");
    add_common(judge, common);
    judge->add_option("--run", run_dir, "Run directory")->required();

    std::string flags_path;
    std::optional<int> threshold;
    bool calibrated = false, count_responses = false;
    auto* audit = app.add_subcommand("audit", "Filtered and worst-case robustness scores");
    add_common(audit, common);
    audit->add_option("--run", run_dir, "Run directory")->required();
    audit->add_option("--flags", flags_path, "Flag records (default: <run>/flags.jsonl)");
    audit->add_option("--threshold", threshold, "Flags per question that trigger imputation")
        ->check(CLI::PositiveNumber);
    audit->add_flag("--calibrated", calibrated, "Apply the run's calibration to rebuilt aggregates");
    audit->add_flag("--count-responses", count_responses, "Count flagged responses instead of traces");

    std::vector<std::string> report_runs;
    std::string format = "text";
    auto* report_cmd = app.add_subcommand("report", "Emit report tables");
    add_common(report_cmd, common);
    report_cmd->add_option("--run", report_runs, "Run directories")->required();
    report_cmd->add_option("--format", format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
    report_cmd->add_option("--flags", flags_path, "Flag records for the first run");
    report_cmd->add_option("--threshold", threshold, "Worst-case threshold")->check(CLI::PositiveNumber);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::usage);
    }

    try {
        if (ingest->parsed()) {
            const auto cfg = load(common);
            const auto dir = out_dir(common, cfg);
            const auto raw = read_markets(markets_path);
            const auto kept = filter_markets(raw, cfg.market_filter);
            write_markets(dir / "markets.jsonl", kept);
            out << "kept " << kept.size() << " of " << raw.size() << " markets\n";
        } else if (make_market->parsed()) {
            const auto cfg = load(common);
            const auto dir = out_dir(common, cfg);
            const auto gw = build_gateways(cfg);
            if (!gw.generation) throw ConfigError("missing config key: gateways.generation");
            std::vector<Question> questions;
            std::string drops = "# schema: foresight.drops v1\nmarket_id,reason\n";
            std::size_t used = 0;
            for (const auto& m : filter_markets(read_markets(markets_path), cfg.market_filter)) {
                if (!cutoff_schedule(m.open_time, m.close_time)) {
                    drops += m.market_id + ",open too briefly for a cutoff schedule\n";
                    continue;
                }
                const auto rw = reword_question(m.title, m.rules, *gw.generation, cfg.run.retry, cfg.reword_template,
                                                m.market_id + "/reword");
                if (!rw.question) {
                    std::string reason = rw.drop_reason;
                    std::replace(reason.begin(), reason.end(), ',', ';');
                    std::replace(reason.begin(), reason.end(), '\n', ' ');
                    drops += m.market_id + "," + reason + "\n";
                    err << "dropped " << m.market_id << ": " << rw.drop_reason << "\n";
                    continue;
                }
                for (auto& q : generate_questions(m, *rw.question)) questions.push_back(std::move(q));
                ++used;
            }
            save_questions(dir / "questions.jsonl", questions);
            write_text_file(dir / "drops.csv", drops);
            out << "generated " << questions.size() << " questions from " << used << " markets\n";
        } else if (snapshot->parsed()) {
            const auto cfg = load(common);
            const auto dir = out_dir(common, cfg);
            Date date;
            try {
                date = Date::parse(snapshot_date);
            } catch (const std::exception& e) {
                err << "error: --date: " << e.what() << "\n";
                return static_cast<int>(ExitCode::usage);
            }
            const auto snap = snapshot_live(read_markets(markets_path), date, snapshot_size.value_or(cfg.live_sample_size),
                                            cfg.run.seed, cfg.market_filter);
            save_questions(dir / snapshot_filename(date), snap.questions);
            if (snap.shortfall > 0) {
                err << "shortfall: " << snap.shortfall << " fewer open markets than the requested sample\n";
            }
            out << "sampled " << snap.questions.size() << " questions\n";
        } else if (frun->parsed()) {
            const auto cfg = load(common);
            const auto dir = out_dir(common, cfg);
            const auto gw = build_gateways(cfg);
            const auto dataset = load_questions(questions_path);
            const auto res = run_benchmark(dataset, cfg.run, gw, dir, BenchmarkOptions{stop_after, resume});
            if (!res.complete) {
                out << "stopped after " << res.newly_completed << " questions; resume with --resume\n";
            } else {
                const auto& s = res.artifact->scores;
                out << "mean Brier " << report::format_real(s.mean_brier) << " over " << s.n_questions
                    << " questions (" << s.excluded.size() << " excluded)\n";
            }
        } else if (cfit->parsed()) {
            const auto cfg = load(common);
            const auto dir = out_dir(common, cfg);
            if (run_dir.empty() && pairs_path.empty()) throw ConfigError("calibrate fit needs --run or --pairs");
            const auto pairs = read_pairs(run_dir, pairs_path);
            FitSpec spec;
            spec.method = calibration_method_from_string(method);
            spec.platt.loss = loss == "brier" ? PlattLoss::brier : PlattLoss::log_loss;
            spec.platt.fit_gamma = fit_gamma;
            const auto map = fit_calibration(pairs, spec);
            json doc = {{"schema", "foresight.calibration_map"}, {"version", kSchemaVersion}, {"map", map}};
            if (pairs.size() >= 3) {
                const auto loo = leave_one_out(pairs, spec);
                doc["loo_mean_brier"] = loo.mean_brier;
            }
            doc["n_pairs"] = pairs.size();
            write_text_file(dir / "calibration.json", doc.dump(2) + "\n");
            out << json(map).dump() << "\n";
        } else if (csweep->parsed()) {
            const auto cfg = load(common);
            const auto dir = out_dir(common, cfg);
            if (run_dir.empty() && pairs_path.empty()) throw ConfigError("calibrate sweep needs --run or --pairs");
            const auto pairs = read_pairs(run_dir, pairs_path);
            std::vector<Probability> ps;
            std::vector<int> os;
            for (const auto& p : pairs) {
                ps.push_back(p.p);
                os.push_back(p.outcome);
            }
            const auto grid = linspace_grid(lo, hi, step);
            const auto curve = coefficient_sweep(ps, os, grid);
            write_text_file(dir / "sweep.csv", report::sweep_csv(curve));
            out << "argmin alpha " << report::format_real(curve.argmin_alpha) << "\n";
        } else if (score_cmd->parsed()) {
            const auto cfg = load(common);
            const auto dir = out_dir(common, cfg, fs::path(run_dir) / "rescore");
            const auto run = artifact::load(run_dir);
            write_text_file(dir / artifact::kScores, artifact::scores_csv(run.scores));
            write_text_file(dir / artifact::kSummary, artifact::summary_csv(run.scores, run.total_latency_ms));
            write_text_file(dir / artifact::kExclusions, artifact::exclusions_csv(run.scores));
            out << "mean Brier " << report::format_real(run.scores.mean_brier) << " over " << run.scores.n_questions
                << " questions\n";
        } else if (compare->parsed()) {
            const auto cfg = load(common);
            const auto dir = out_dir(common, cfg);
            const auto a = artifact::load(run_a);
            const auto b = artifact::load(run_b);
            const auto bb = brier_by_id(b.scores);
            std::vector<double> xa, xb;
            for (const auto& q : a.scores.per_question) {
                if (auto it = bb.find(q.question_id); it != bb.end()) {
                    xa.push_back(q.brier);
                    xb.push_back(it->second);
                }
            }
            if (xa.empty()) throw DataError("the two runs share no scored questions");
            ReportBundle bundle;
            bundle.comparisons.push_back(
                {run_a, run_b, compare_forecasters(xa, xb, resamples.value_or(cfg.n_resamples), cfg.run.seed)});
            write_text_file(dir / "comparison.csv", report::comparison_csv(bundle));
            const auto& r = bundle.comparisons.front().result;
            out << "mean diff " << report::format_real(r.mean_diff) << ", p " << report::format_real(r.p_value)
                << ", win rate " << report::format_real(r.win_rate) << "\n";
        } else if (ensemble->parsed()) {
            const auto cfg = load(common);
            const auto dir = out_dir(common, cfg);
            const auto run = artifact::load(run_dir);
            auto row = ensemble_for(run, n_boot.value_or(kDefaultWeightBootstrap), cfg.run.seed);
            if (!row) throw DataError("ensemble needs at least 3 resolved questions with market prices");
            ReportBundle bundle;
            bundle.ensembles.push_back({run_dir, *row});
            write_text_file(dir / "ensemble.csv", report::ensemble_csv(bundle));
            out << "forecaster weight " << report::format_real(row->fit.w_forecaster) << ", LOO ensemble Brier "
                << report::format_real(row->loo.mean_brier) << "\n";
        } else if (judge->parsed()) {
            const auto cfg = load(common);
            const auto dir = out_dir(common, cfg, run_dir);
            const auto gw = build_gateways(cfg);
            if (!gw.judge && !gw.generation) throw ConfigError("missing config key: gateways.judge");
            const auto run = artifact::load(run_dir);
            const auto flags = judge_run(run, gw.judge_gateway(), cfg.judge_options, cfg.run.max_in_flight);
            std::vector<json> rows(flags.begin(), flags.end());
            write_jsonl(dir / artifact::kFlags, schema::flags, rows);
            out << std::count_if(flags.begin(), flags.end(), [](const FlagRecord& f) { return f.has_foreknowledge; })
                << " of " << flags.size() << " traces flagged\n";
        } else if (audit->parsed()) {
            const auto cfg = load(common);
            const auto dir = out_dir(common, cfg);
            const auto run = artifact::load(run_dir);
            const auto flags = read_flags(flags_path.empty() ? fs::path(run_dir) / artifact::kFlags : fs::path(flags_path));
            ScoreReport worst;
            ReportBundle bundle;
            bundle.integrity = integrity_for(run, flags, threshold.value_or(cfg.worst_case_threshold),
                                             AuditOptions{calibrated, count_responses}, &worst);
            write_text_file(dir / "integrity.csv", report::integrity_csv(bundle));
            write_text_file(dir / "worst_case_scores.csv", artifact::scores_csv(worst));
            const auto& s = *bundle.integrity;
            out << "baseline " << report::format_real(s.baseline) << ", filtered " << report::format_real(s.filtered)
                << ", worst case " << report::format_real(s.worst_case) << "\n";
        } else if (report_cmd->parsed()) {
            const auto cfg = load(common);
            const auto dir = out_dir(common, cfg);
            ReportBundle bundle;
            bundle.metadata["seed"] = std::to_string(cfg.run.seed);
            std::vector<RunArtifact> runs;
            for (std::size_t i = 0; i < report_runs.size(); ++i) {
                runs.push_back(artifact::load(report_runs[i]));
                bundle.metadata["run." + std::to_string(i + 1)] = report_runs[i];
            }
            for (std::size_t i = 0; i < runs.size(); ++i) {
                const auto& r = runs[i];
                const auto& label = report_runs[i];
                bundle.scores.emplace_back(label, r.scores);
                const auto syn = synthesis_inputs(r);
                if (!syn.empty()) bundle.synthesis.emplace_back(label, synthesis_metrics(syn));
                if (auto row = ensemble_for(r, kDefaultWeightBootstrap, cfg.run.seed)) {
                    bundle.ensembles.push_back({label, *row});
                }
                std::vector<Probability> ps;
                std::vector<int> os;
                for (const auto& p : read_pairs(label, {})) {
                    ps.push_back(p.p);
                    os.push_back(p.outcome);
                }
                if (!ps.empty()) {
                    bundle.sweeps.emplace_back(label, coefficient_sweep(ps, os, linspace_grid(0.5, 3.0, 0.01)));
                }
            }
            for (std::size_t i = 1; i < runs.size(); ++i) {
                const auto bb = brier_by_id(runs[i].scores);
                std::vector<double> xa, xb;
                for (const auto& q : runs[0].scores.per_question) {
                    if (auto it = bb.find(q.question_id); it != bb.end()) {
                        xa.push_back(q.brier);
                        xb.push_back(it->second);
                    }
                }
                if (!xa.empty()) {
                    bundle.comparisons.push_back(
                        {report_runs[0], report_runs[i], compare_forecasters(xa, xb, cfg.n_resamples, cfg.run.seed)});
                }
            }
            const fs::path fp = flags_path.empty() ? fs::path(report_runs[0]) / artifact::kFlags : fs::path(flags_path);
            if (fs::exists(fp)) {
                bundle.integrity = integrity_for(runs[0], read_flags(fp), threshold.value_or(cfg.worst_case_threshold),
                                                 AuditOptions{});
                bundle.metadata["flags"] = fp.string();
            }
            const auto files = emit_report(bundle, format == "csv" ? ReportFormat::csv : ReportFormat::text, dir);
            for (const auto& f : files) out << f.string() << "\n";
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(e.exit_code());
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::data);
    } catch (const json::exception& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::data);
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::data);
    }
    return static_cast<int>(ExitCode::ok);
}

int run(const std::vector<std::string>& args) { return run(args, std::cout, std::cerr); }

}  // namespace foresight::cli
