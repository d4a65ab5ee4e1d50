#pragma once

#include "foresight/aggregation.hpp"
#include "foresight/calibration.hpp"
#include "foresight/ensemblereg.hpp"
#include "foresight/integrity.hpp"
#include "foresight/scoring.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace foresight {

struct NamedComparison {
    std::string a;
    std::string b;
    PairedComparison result;
};

struct NamedEnsembleRow {
    std::string label;
    EnsembleRow row;
};

struct IntegritySummary {
    double baseline = 0.0;
    double filtered = 0.0;
    double worst_case = 0.0;
    int threshold = kDefaultWorstCaseThreshold;
    int flags = 0;
    int filtered_questions = 0;
    int worst_case_imputed = 0;
};

// Everything the report command can emit. Each entry records the artifact
// path it was computed from.
struct ReportBundle {
    std::map<std::string, std::string> metadata;
    std::vector<std::pair<std::string, ScoreReport>> scores;
    std::vector<std::pair<std::string, SynthesisMetrics>> synthesis;
    std::vector<std::pair<std::string, SweepCurve>> sweeps;
    std::vector<NamedEnsembleRow> ensembles;
    std::vector<NamedComparison> comparisons;
    std::optional<IntegritySummary> integrity;
};

enum class ReportFormat { text, csv };

namespace report {
std::string score_summary_csv(const ReportBundle& b);
std::string synthesis_csv(const ReportBundle& b);
std::string sweep_csv(const SweepCurve& c);
std::string ensemble_csv(const ReportBundle& b);
std::string comparison_csv(const ReportBundle& b);
std::string integrity_csv(const ReportBundle& b);
std::string metadata_csv(const ReportBundle& b);
std::string text(const ReportBundle& b);
std::string format_real(double v);
}  // namespace report

// Writes a deterministic file set under dir; returns the written paths.
std::vector<std::filesystem::path> emit_report(const ReportBundle& bundle, ReportFormat format,
                                               const std::filesystem::path& dir);

}  // namespace foresight
