#pragma once

#include "foresight/integrity.hpp"

#include "support.hpp"

#include <string>
#include <vector>

namespace testing {

// Five resolved questions, ten agents each, with judge flags injected:
//   q1 (o=1) agents 1-5 at 0.9, 6-10 at 0.7; agents 1-5 flagged
//   q2 (o=0) agent 1 at 0.6, the rest at 0.1; agent 1 flagged
//   q3 (o=1) all at 0.95; all ten flagged
//   q4 (o=0) all at 0.3; no flags
//   q5 (o=1) all at 0.6; agents 1-4 flagged, agent 1 on three separate responses
struct AuditFixture {
    foresight::RunArtifact run;
    std::vector<foresight::FlagRecord> flags;
};

inline foresight::FlagRecord flag(const std::string& qid, const std::string& trace, bool positive = true) {
    foresight::FlagRecord f;
    f.question_id = qid;
    f.trace_id = trace;
    f.has_foreknowledge = positive;
    f.confidence_level = positive ? foresight::Confidence::high : foresight::Confidence::low;
    f.legitimate_reasoning = !positive;
    return f;
}

inline AuditFixture audit_fixture() {
    using namespace foresight;
    const std::vector<std::pair<std::string, double>> qs{{"q1", 1}, {"q2", 0}, {"q3", 1}, {"q4", 0}, {"q5", 1}};
    const std::vector<std::vector<double>> probs{
        {0.9, 0.9, 0.9, 0.9, 0.9, 0.7, 0.7, 0.7, 0.7, 0.7},
        {0.6, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1},
        std::vector<double>(10, 0.95),
        std::vector<double>(10, 0.3),
        std::vector<double>(10, 0.6),
    };
    AuditFixture fx;
    fx.run.config.calibration = CalibrationMap::identity();
    for (std::size_t i = 0; i < qs.size(); ++i) {
        fx.run.questions.push_back(question(qs[i].first, qs[i].second));
        FinalForecast f;
        f.question_id = qs[i].first;
        for (int a = 0; a < 10; ++a) {
            ForecastRecord r;
            r.question_id = f.question_id;
            r.agent_index = a + 1;
            r.probability = Probability(probs[i][static_cast<std::size_t>(a)]);
            r.trace.steps = {"FINAL: " + std::to_string(probs[i][static_cast<std::size_t>(a)])};
            f.individual.push_back(r);
        }
        std::vector<Probability> ps(probs[i].begin(), probs[i].end());
        f.aggregate_raw = f.merged = f.final_probability = aggregate(ps, AggregationMethod::mean);
        fx.run.forecasts.push_back(f);
    }
    for (int a = 1; a <= 5; ++a) fx.flags.push_back(flag("q1", std::to_string(a)));
    for (int a = 6; a <= 10; ++a) fx.flags.push_back(flag("q1", std::to_string(a), false));
    fx.flags.push_back(flag("q2", "1"));
    for (int a = 1; a <= 10; ++a) fx.flags.push_back(flag("q3", std::to_string(a)));
    fx.flags.push_back(flag("q4", "3", false));
    for (const char* t : {"1/1", "1/2", "1/3", "2", "3", "4"}) fx.flags.push_back(flag("q5", t));
    fx.run.scores = rescore(fx.run.questions, fx.run.forecasts);
    return fx;
}

// Hand-computed Brier contributions per question.
inline constexpr double kBaselineMean = (0.04 + 0.0225 + 0.0025 + 0.09 + 0.16) / 5.0;
inline constexpr double kFilteredMean = (0.09 + 0.01 + 0.09 + 0.16) / 4.0;
inline constexpr double kWorstCaseMean = (0.25 + 0.0225 + 0.25 + 0.09 + 0.16) / 5.0;
inline constexpr double kWorstCaseResponsesMean = (0.25 + 0.0225 + 0.25 + 0.09 + 0.25) / 5.0;

}  // namespace testing
