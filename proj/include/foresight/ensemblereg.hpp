#pragma once

#include "foresight/probability.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace foresight {

inline constexpr int kDefaultWeightBootstrap = 1000;

struct SimplexFit {
    double w_forecaster = 0.0;
    double w_market = 0.0;
    std::pair<double, double> ci_forecaster{0.0, 0.0};
    std::pair<double, double> ci_market{0.0, 0.0};
    int n_boot = 0;
    int skipped = 0;  // resamples dropped after repeated unidentifiable draws
    std::uint64_t seed = 0;
};

// argmin over w in [0,1] of sum (o - (w x_f + (1-w) x_m))^2, in closed form.
SimplexFit fit_simplex(std::span<const double> x_f, std::span<const double> x_m, std::span<const int> o);

struct LooResult {
    double mean_brier = 0.0;
    int fallback_folds = 0;  // folds where the weight was unidentifiable (w = 0.5 used)
};

LooResult loo_ensemble_brier(std::span<const double> x_f, std::span<const double> x_m, std::span<const int> o);

// Point estimate plus percentile intervals over resampled question triples.
SimplexFit bootstrap_weights_ci(std::span<const double> x_f, std::span<const double> x_m,
                                std::span<const int> o, int n_boot = kDefaultWeightBootstrap,
                                std::uint64_t seed = 0);

// Forecaster-vs-market comparison row.
struct EnsembleRow {
    int n = 0;
    double brier_forecaster = 0.0;
    double brier_market = 0.0;
    SimplexFit fit;
    LooResult loo;
};

EnsembleRow ensemble_row(std::span<const double> x_f, std::span<const double> x_m, std::span<const int> o,
                         int n_boot = kDefaultWeightBootstrap, std::uint64_t seed = 0);

}  // namespace foresight
