#pragma once

#include <cmath>
#include <compare>
#include <stdexcept>
#include <string>

namespace foresight {

// A probability in [0, 1]. Construction rejects NaN and out-of-range values.
class Probability {
public:
    constexpr Probability() = default;
    explicit Probability(double value) : value_(value) {
        if (!(value >= 0.0 && value <= 1.0)) {
            throw std::invalid_argument("probability out of [0,1]: " + std::to_string(value));
        }
    }

    constexpr double value() const noexcept { return value_; }
    constexpr operator double() const noexcept { return value_; }

    Probability complement() const { return Probability(1.0 - value_); }

    friend constexpr auto operator<=>(Probability, Probability) = default;

private:
    double value_ = 0.5;
};

inline constexpr double kDefaultClampEpsilon = 1e-4;

// Decimal places kept when probabilities are persisted.
inline constexpr int kProbabilityDecimals = 6;

// Clamp into [eps, 1-eps]. Only for use ahead of log-odds transforms; scoring
// always uses the unclamped value.
Probability clamp_probability(double p, double epsilon = kDefaultClampEpsilon);

double logit(double p);
double sigmoid(double x);

// Round to the persisted precision.
double quantize_probability(double p);

}  // namespace foresight
