#include "foresight/artifact.hpp"

#include "foresight/error.hpp"
#include "foresight/jsonl.hpp"
#include "foresight/report.hpp"

#include <sstream>

namespace foresight::artifact {

namespace {

std::string csv_header(std::string_view schema_name) {
    return "# schema: " + std::string(schema_name) + " v" + std::to_string(kSchemaVersion) + "\n";
}

}  // namespace

std::string config_document(const RunConfig& config) {
    return config_to_json(config).dump(2) + "\n";
}

std::string scores_csv(const ScoreReport& report) {
    std::ostringstream out;
    out << csv_header("foresight.scores") << "question_id,brier\n";
    for (const auto& s : report.per_question) out << s.question_id << ',' << report::format_real(s.brier) << '\n';
    return out.str();
}

std::string summary_csv(const ScoreReport& report, long total_latency_ms) {
    std::ostringstream out;
    out << csv_header("foresight.summary") << "n_questions,mean_brier,n_excluded,total_latency_ms\n"
        << report.n_questions << ',' << report::format_real(report.mean_brier) << ',' << report.excluded.size() << ','
        << total_latency_ms << '\n';
    return out.str();
}

std::string exclusions_csv(const ScoreReport& report) {
    std::ostringstream out;
    out << csv_header("foresight.exclusions") << "question_id,reason\n";
    for (const auto& [id, reason] : report.excluded) out << id << ',' << reason << '\n';
    return out.str();
}

void write(const std::filesystem::path& dir, const RunArtifact& run) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / kConfig, config_document(run.config));
    std::vector<json> qs(run.questions.begin(), run.questions.end());
    write_jsonl(dir / kQuestions, schema::questions, qs);
    std::vector<json> fs(run.forecasts.begin(), run.forecasts.end());
    write_jsonl(dir / kForecasts, schema::forecasts, fs);
    write_text_file(dir / kScores, scores_csv(run.scores));
    write_text_file(dir / kSummary, summary_csv(run.scores, run.total_latency_ms));
    write_text_file(dir / kExclusions, exclusions_csv(run.scores));
}

RunArtifact load(const std::filesystem::path& dir) {
    if (!std::filesystem::exists(dir / kForecasts)) {
        throw DataError("not a completed run directory (no " + std::string(kForecasts) + "): " + dir.string());
    }
    RunArtifact run;
    json cfg;
    try {
        cfg = json::parse(read_text_file(dir / kConfig));
    } catch (const json::exception& e) {
        throw DataError((dir / kConfig).string() + ": " + e.what());
    }
    try {
        run.config = config_from_json(cfg);
    } catch (const ConfigError& e) {
        throw DataError((dir / kConfig).string() + ": " + e.what());
    }
    try {
        for (const auto& j : read_jsonl(dir / kQuestions, schema::questions)) {
            run.questions.push_back(validate_question(j.get<Question>()).get());
        }
        for (const auto& j : read_jsonl(dir / kForecasts, schema::forecasts)) {
            run.forecasts.push_back(j.get<FinalForecast>());
        }
    } catch (const json::exception& e) {
        throw DataError(dir.string() + ": " + e.what());
    }
    for (const auto& f : run.forecasts) run.total_latency_ms += f.latency_ms;
    run.scores = rescore(run.questions, run.forecasts);
    return run;
}

}  // namespace foresight::artifact
