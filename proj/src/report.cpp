#include "foresight/report.hpp"

#include "foresight/error.hpp"
#include "foresight/jsonl.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

namespace foresight {

namespace report {

namespace {

std::string header(std::string_view schema_name, std::string_view columns) {
    return "# schema: " + std::string(schema_name) + " v" + std::to_string(kSchemaVersion) + "\n" +
           std::string(columns) + "\n";
}

std::string field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}


}  // namespace

std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string score_summary_csv(const ReportBundle& b) {
    std::ostringstream out;
    out << header("foresight.report.scores", "source,n_questions,mean_brier,n_excluded");
    for (const auto& [label, s] : b.scores) {
        out << field(label) << ',' << s.n_questions << ',' << format_real(s.mean_brier) << ',' << s.excluded.size()
            << '\n';
    }
    return out.str();
}

std::string synthesis_csv(const ReportBundle& b) {
    std::ostringstream out;
    out << header("foresight.report.synthesis", "source,n_questions,mean_brier,top_at_3,worst_at_3,outperform");
    for (const auto& [label, m] : b.synthesis) {
        out << field(label) << ',' << m.n_questions << ',' << format_real(m.mean_brier) << ','
            << format_real(m.top_at_3) << ',' << format_real(m.worst_at_3) << ',' << format_real(m.outperform) << '\n';
    }
    return out.str();
}

std::string sweep_csv(const SweepCurve& c) {
    std::ostringstream out;
    out << header("foresight.report.sweep", "alpha,mean_brier");
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
        out << format_real(c.grid[i]) << ',' << format_real(c.brier_at.at(i)) << '\n';
    }
    return out.str();
}

std::string ensemble_csv(const ReportBundle& b) {
    std::ostringstream out;
    out << header("foresight.report.ensemble",
                  "source,n,brier_forecaster,brier_market,w_forecaster,w_forecaster_lo,w_forecaster_hi,w_market,"
                  "w_market_lo,w_market_hi,loo_ensemble_brier,loo_fallback_folds,n_boot,boot_skipped,seed");
    for (const auto& e : b.ensembles) {
        const auto& r = e.row;
        out << field(e.label) << ',' << r.n << ',' << format_real(r.brier_forecaster) << ','
            << format_real(r.brier_market) << ',' << format_real(r.fit.w_forecaster) << ','
            << format_real(r.fit.ci_forecaster.first) << ',' << format_real(r.fit.ci_forecaster.second) << ','
            << format_real(r.fit.w_market) << ',' << format_real(r.fit.ci_market.first) << ','
            << format_real(r.fit.ci_market.second) << ',' << format_real(r.loo.mean_brier) << ','
            << r.loo.fallback_folds << ',' << r.fit.n_boot << ',' << r.fit.skipped << ',' << r.fit.seed << '\n';
    }
    return out.str();
}

std::string comparison_csv(const ReportBundle& b) {
    std::ostringstream out;
    out << header("foresight.report.comparison", "a,b,n_questions,mean_diff,p_value,win_rate_a,n_resamples,seed");
    for (const auto& c : b.comparisons) {
        const auto& r = c.result;
        out << field(c.a) << ',' << field(c.b) << ',' << r.n_questions << ',' << format_real(r.mean_diff) << ','
            << format_real(r.p_value) << ',' << format_real(r.win_rate) << ',' << r.n_resamples << ',' << r.seed
            << '\n';
    }
    return out.str();
}

std::string integrity_csv(const ReportBundle& b) {
    std::ostringstream out;
    out << header("foresight.report.integrity",
                  "threshold,flags,baseline_brier,filtered_brier,worst_case_brier,filtered_questions,worst_case_imputed");
    if (b.integrity) {
        const auto& i = *b.integrity;
        out << i.threshold << ',' << i.flags << ',' << format_real(i.baseline) << ',' << format_real(i.filtered) << ','
            << format_real(i.worst_case) << ',' << i.filtered_questions << ',' << i.worst_case_imputed << '\n';
    }
    return out.str();
}

std::string metadata_csv(const ReportBundle& b) {
    std::ostringstream out;
    out << header("foresight.report.metadata", "key,value");
    for (const auto& [k, v] : b.metadata) out << field(k) << ',' << field(v) << '\n';
    return out.str();
}

std::string text(const ReportBundle& b) {
    std::ostringstream out;
    out << "Run metadata\n";
    for (const auto& [k, v] : b.metadata) out << "  " << k << ": " << v << '\n';
    out << "\nScores\n";
    for (const auto& [label, s] : b.scores) {
        out << "  " << label << ": mean Brier " << format_real(s.mean_brier) << " over " << s.n_questions
            << " questions (" << s.excluded.size() << " excluded)\n";
    }
    if (!b.synthesis.empty()) {
        out << "\nSynthesis\n";
        for (const auto& [label, m] : b.synthesis) {
            out << "  " << label << ": top@3 " << format_real(m.top_at_3) << ", worst@3 " << format_real(m.worst_at_3)
                << ", outperform " << format_real(m.outperform) << '\n';
        }
    }
    if (!b.sweeps.empty()) {
        out << "\nCalibration sweeps\n";
        for (const auto& [label, c] : b.sweeps) {
            out << "  " << label << ": argmin alpha " << format_real(c.argmin_alpha) << " over " << c.grid.size()
                << " grid points\n";
        }
    }
    if (!b.ensembles.empty()) {
        out << "\nEnsembles\n";
        for (const auto& e : b.ensembles) {
            const auto& r = e.row;
            out << "  " << e.label << ": forecaster " << format_real(r.brier_forecaster) << ", market "
                << format_real(r.brier_market) << ", weight " << format_real(r.fit.w_forecaster) << " ["
                << format_real(r.fit.ci_forecaster.first) << ", " << format_real(r.fit.ci_forecaster.second)
                << "], LOO ensemble " << format_real(r.loo.mean_brier) << '\n';
        }
    }
    if (!b.comparisons.empty()) {
        out << "\nComparisons\n";
        for (const auto& c : b.comparisons) {
            out << "  " << c.a << " vs " << c.b << ": mean diff " << format_real(c.result.mean_diff) << ", p "
                << format_real(c.result.p_value) << ", win rate " << format_real(c.result.win_rate) << '\n';
        }
    }
    if (b.integrity) {
        const auto& i = *b.integrity;
        out << "\nIntegrity (threshold " << i.threshold << ", " << i.flags << " flags)\n"
            << "  baseline " << format_real(i.baseline) << ", filtered " << format_real(i.filtered)
            << ", worst case " << format_real(i.worst_case) << '\n';
    }
    return out.str();
}

}  // namespace report

namespace {

std::string slug(const std::string& s) {
    std::string out;
    for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_';
    return out.empty() ? "sweep" : out;
}

}  // namespace

std::vector<std::filesystem::path> emit_report(const ReportBundle& bundle, ReportFormat format,
                                               const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> written;
    try {
        std::filesystem::create_directories(dir);
    } catch (const std::filesystem::filesystem_error& e) {
        throw DataError(std::string("cannot create report directory: ") + e.what());
    }
    auto put = [&](const std::string& name, const std::string& content) {
        write_text_file(dir / name, content);
        written.push_back(dir / name);
    };
    if (format == ReportFormat::text) {
        put("report.txt", report::text(bundle));
        return written;
    }
    put("metadata.csv", report::metadata_csv(bundle));
    put("scores.csv", report::score_summary_csv(bundle));
    put("synthesis.csv", report::synthesis_csv(bundle));
    put("ensemble.csv", report::ensemble_csv(bundle));
    put("comparison.csv", report::comparison_csv(bundle));
    put("integrity.csv", report::integrity_csv(bundle));
    for (std::size_t i = 0; i < bundle.sweeps.size(); ++i) {
        put("sweep-" + std::to_string(i + 1) + "-" + slug(bundle.sweeps[i].first) + ".csv",
            report::sweep_csv(bundle.sweeps[i].second));
    }
    return written;
}

}  // namespace foresight
