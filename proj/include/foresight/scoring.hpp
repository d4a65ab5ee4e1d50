#pragma once

#include "foresight/probability.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace foresight {

inline constexpr int kDefaultBootstrapResamples = 10000;

// Squared error (p - o)^2 against a binary outcome.
double brier(Probability p, int outcome);

// (p - ref)^2 against a market price. A concordance measure, not a proper
// score: a skilled forecaster should sit away from zero.
double brier_vs_reference(Probability p, Probability ref);

enum class SurveyAggregation { median, mean };

Probability aggregate_survey(std::span<const Probability> forecasts, SurveyAggregation method);

struct QuestionScore {
    std::string question_id;
    double brier = 0.0;
    friend bool operator==(const QuestionScore&, const QuestionScore&) = default;
};

struct ScoreReport {
    int n_questions = 0;
    double mean_brier = 0.0;
    std::vector<QuestionScore> per_question;
    // Questions left out of the mean (unforecast or unresolved), with reason.
    std::vector<std::pair<std::string, std::string>> excluded;

    friend bool operator==(const ScoreReport&, const ScoreReport&) = default;
};

struct ScoredForecast {
    std::string question_id;
    Probability probability;
    int outcome = 0;
};

// Mean is accumulated in input order so re-scoring is bit-stable.
ScoreReport score(std::span<const ScoredForecast> forecasts);

struct PairedComparison {
    double mean_diff = 0.0;
    double p_value = 1.0;
    double win_rate = 0.5;
    int n_resamples = 0;
    std::uint64_t seed = 0;
    int n_questions = 0;
};

// Recentred paired bootstrap on per-question Brier differences (a - b).
// Two-sided: p = fraction of resampled means with |mean| >= |observed mean|.
PairedComparison paired_bootstrap(std::span<const double> diffs,
                                  int n_resamples = kDefaultBootstrapResamples,
                                  std::uint64_t seed = 0);

// Fraction of questions where a beats b; ties count one half.
double win_rate(std::span<const double> briers_a, std::span<const double> briers_b);

// Full comparison of two aligned Brier lists: bootstrap on a - b plus win rate of a.
PairedComparison compare_forecasters(std::span<const double> briers_a,
                                     std::span<const double> briers_b,
                                     int n_resamples = kDefaultBootstrapResamples,
                                     std::uint64_t seed = 0);

}  // namespace foresight
