#pragma once

#include "foresight/domain.hpp"

#include <numbers>
#include <span>
#include <vector>

namespace foresight {

// Default log-odds slope for the shipped correction.
inline constexpr double kDefaultExtremization = std::numbers::sqrt3;
inline constexpr double kAlphaMin = 0.05;
inline constexpr double kAlphaMax = 20.0;

struct LabeledForecast {
    Probability p;
    int outcome = 0;
};

// sigmoid(alpha * logit(clamp(p)) + gamma).
Probability platt_apply(Probability p, const CalibrationMap& map);

// sigmoid(d * mean(logit(clamp(p_i)))).
Probability extremize_logodds(std::span<const Probability> forecasts, double d = kDefaultExtremization);

// Normalised geometric pool G_p / (G_p + G_q), G_p = (prod p_i)^(1/n), G_q = (prod (1-p_i))^(1/n).
// platt_apply(geometric_pool(ps), a, 0) == extremize_logodds(ps, a).
Probability geometric_pool(std::span<const Probability> forecasts);

enum class PlattLoss { log_loss, brier };

struct PlattFitOptions {
    PlattLoss loss = PlattLoss::log_loss;
    bool fit_gamma = false;
    double epsilon = kDefaultClampEpsilon;
    int max_iterations = 200;
};

CalibrationMap platt_fit(std::span<const LabeledForecast> pairs, const PlattFitOptions& opts = {});

// Pool-adjacent-violators on (forecast, outcome) pairs. Duplicate forecasts
// are pooled into one weighted point first.
CalibrationMap isotonic_fit(std::span<const LabeledForecast> pairs);
Probability isotonic_apply(Probability p, const CalibrationMap& map);

// Ordinary least squares of outcome on forecast.
CalibrationMap linear_fit(std::span<const LabeledForecast> pairs);
Probability linear_apply(Probability p, const CalibrationMap& map);

// Dispatches on map.method.
Probability calibrate(Probability p, const CalibrationMap& map);

struct SweepCurve {
    std::vector<double> grid;
    std::vector<double> brier_at;
    double argmin_alpha = 1.0;
};

// Mean Brier of platt_apply(p, alpha, gamma = 0) at each grid alpha.
// The first grid point wins ties.
SweepCurve coefficient_sweep(std::span<const Probability> forecasts,
                             std::span<const int> outcomes,
                             std::span<const double> grid);

std::vector<double> linspace_grid(double lo, double hi, double step);

struct FitSpec {
    CalibrationMethod method = CalibrationMethod::platt;
    PlattFitOptions platt;
};

CalibrationMap fit_calibration(std::span<const LabeledForecast> pairs, const FitSpec& spec);

struct LeaveOneOutResult {
    std::vector<double> held_out;  // calibrated forecast for each pair, fit without it
    double mean_brier = 0.0;
};

// Refit on n-1 pairs and apply to the held-out pair, for every pair.
LeaveOneOutResult leave_one_out(std::span<const LabeledForecast> pairs, const FitSpec& spec);

}  // namespace foresight
