#pragma once

#include "foresight/pipeline.hpp"

#include <filesystem>
#include <string>

namespace foresight::artifact {

// Run directory layout:
//   config.json       config snapshot
//   questions.jsonl   the dataset as run
//   forecasts.jsonl   one FinalForecast per question, dataset order
//   scores.csv        per-question Brier
//   summary.csv       n_questions, mean_brier, excluded count, total latency
//   exclusions.csv    question_id,reason
//   progress.jsonl    completed questions while a run is in flight; removed on completion
inline constexpr const char* kConfig = "config.json";
inline constexpr const char* kQuestions = "questions.jsonl";
inline constexpr const char* kForecasts = "forecasts.jsonl";
inline constexpr const char* kScores = "scores.csv";
inline constexpr const char* kSummary = "summary.csv";
inline constexpr const char* kExclusions = "exclusions.csv";
inline constexpr const char* kProgress = "progress.jsonl";
inline constexpr const char* kFlags = "flags.jsonl";

void write(const std::filesystem::path& dir, const RunArtifact& run);
RunArtifact load(const std::filesystem::path& dir);

std::string scores_csv(const ScoreReport& report);
std::string summary_csv(const ScoreReport& report, long total_latency_ms);
std::string exclusions_csv(const ScoreReport& report);
std::string config_document(const RunConfig& config);

}  // namespace foresight::artifact
