#include "foresight/jsonl.hpp"
#include "foresight/report.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>

using namespace foresight;

namespace {

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::size_t columns(const std::string& line) { return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1; }

ReportBundle sample_bundle() {
    ReportBundle b;
    b.metadata = {{"run", "runs/a"}, {"seed", "7"}};
    ScoreReport s;
    s.n_questions = 3;
    s.mean_brier = 0.1234;
    s.excluded = {{"q4", "unforecast"}};
    b.scores.emplace_back("runs/a", s);
    b.synthesis.emplace_back("runs/a", SynthesisMetrics{0.5, 0.25, 0.75, 0.11, 4});
    b.sweeps.emplace_back("runs/a calibrated", SweepCurve{{1.0, 1.5, 2.0}, {0.2, 0.18, 0.19}, 1.5});
    EnsembleRow row;
    row.n = 50;
    row.brier_forecaster = 0.12;
    row.brier_market = 0.11;
    row.fit.w_forecaster = 0.33;
    row.fit.w_market = 0.67;
    row.fit.ci_forecaster = {0.2, 0.45};
    row.fit.ci_market = {0.55, 0.8};
    row.fit.n_boot = 1000;
    row.fit.seed = 3;
    row.loo.mean_brier = 0.106;
    b.ensembles.push_back({"runs/a", row});
    b.comparisons.push_back({"runs/a", "runs/b,2", PairedComparison{-0.01, 0.002, 0.6, 10000, 7, 50}});
    b.integrity = IntegritySummary{0.1159, 0.1161, 0.1201, 5, 12, 49, 1};
    return b;
}

}  // namespace

TEST_CASE("empty bundle gives header-only tables") {
    testing::TempDir tmp;
    const auto files = emit_report(ReportBundle{}, ReportFormat::csv, tmp.path());
    CHECK(files.size() == 6);
    for (const auto& f : files) {
        const auto ls = lines(read_text_file(f));
        REQUIRE(ls.size() == 2);
        CHECK(ls[0].rfind("# schema: foresight.report.", 0) == 0);
        CHECK(ls[0].substr(ls[0].size() - 3) == " v1");
    }
    CHECK(lines(read_text_file(tmp / "ensemble.csv"))[1] ==
          "source,n,brier_forecaster,brier_market,w_forecaster,w_forecaster_lo,w_forecaster_hi,w_market,w_market_lo,"
          "w_market_hi,loo_ensemble_brier,loo_fallback_folds,n_boot,boot_skipped,seed");
}

TEST_CASE("two emissions of one bundle are byte-identical") {
    testing::TempDir a, b;
    const auto bundle = sample_bundle();
    const auto fa = emit_report(bundle, ReportFormat::csv, a.path());
    const auto fb = emit_report(bundle, ReportFormat::csv, b.path());
    REQUIRE(fa.size() == fb.size());
    CHECK(fa.size() == 7);
    for (std::size_t i = 0; i < fa.size(); ++i) {
        CHECK(fa[i].filename() == fb[i].filename());
        CHECK(read_text_file(fa[i]) == read_text_file(fb[i]));
    }
    emit_report(bundle, ReportFormat::text, a.path());
    emit_report(bundle, ReportFormat::text, b.path());
    CHECK(read_text_file(a / "report.txt") == read_text_file(b / "report.txt"));
}

TEST_CASE("rows conform to their headers") {
    const auto bundle = sample_bundle();
    for (const auto& csv : {report::score_summary_csv(bundle), report::synthesis_csv(bundle), report::ensemble_csv(bundle),
                            report::integrity_csv(bundle), report::metadata_csv(bundle),
                            report::sweep_csv(bundle.sweeps[0].second)}) {
        const auto ls = lines(csv);
        REQUIRE(ls.size() >= 3);
        for (std::size_t i = 2; i < ls.size(); ++i) CHECK(columns(ls[i]) == columns(ls[1]));
    }
    const auto ens = lines(report::ensemble_csv(bundle));
    CHECK(ens[2] == "runs/a,50,0.12,0.11,0.33,0.2,0.45,0.67,0.55,0.8,0.106,0,1000,0,3");
    CHECK(lines(report::comparison_csv(bundle))[2] == "runs/a,\"runs/b,2\",50,-0.01,0.002,0.6,10000,7");
    CHECK(lines(report::sweep_csv(bundle.sweeps[0].second))[3] == "1.5,0.18");
    CHECK(lines(report::integrity_csv(bundle))[2] == "5,12,0.1159,0.1161,0.1201,49,1");
}

TEST_CASE("sweep file names are slugged") {
    testing::TempDir tmp;
    emit_report(sample_bundle(), ReportFormat::csv, tmp.path());
    CHECK(std::filesystem::exists(tmp / "sweep-1-runs_a_calibrated.csv"));
}

TEST_CASE("numbers print in shortest round-trip form") {
    for (double v : {0.1, 1.0 / 3.0, 0.668694, 1e-12, 0.0, 0.25, 123456.789}) {
        CHECK(std::stod(report::format_real(v)) == v);
    }
    CHECK(report::format_real(0.25) == "0.25");
    CHECK(report::format_real(1.0) == "1");
}

TEST_CASE("text report mentions each section") {
    const auto t = report::text(sample_bundle());
    for (const char* s : {"Run metadata", "Scores", "Synthesis", "Calibration sweeps", "Ensembles", "Comparisons",
                          "Integrity (threshold 5, 12 flags)", "argmin alpha 1.5", "runs/a vs runs/b,2"}) {
        CHECK(t.find(s) != std::string::npos);
    }
    const auto bare = report::text(ReportBundle{});
    CHECK(bare.find("Synthesis") == std::string::npos);
}
