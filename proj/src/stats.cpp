#include "foresight/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace foresight::stats {

double ordered_sum(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
}

double mean(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean of empty list");
    return ordered_sum(xs) / static_cast<double>(xs.size());
}

double median(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("median of empty list");
    std::vector<double> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double percentile(std::span<const double> xs, double q) {
    if (xs.empty()) throw std::invalid_argument("percentile of empty list");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("percentile level outside [0,1]");
    std::vector<double> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace foresight::stats
