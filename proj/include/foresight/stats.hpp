#pragma once

#include <span>
#include <vector>

namespace foresight::stats {

double mean(std::span<const double> xs);
// Midpoint of the two middle values for even counts.
double median(std::span<const double> xs);
// Linear interpolation between order statistics (Hyndman-Fan type 7), q in [0,1].
double percentile(std::span<const double> xs, double q);
// Sum in index order; used wherever bit-stable reductions are required.
double ordered_sum(std::span<const double> xs);

}  // namespace foresight::stats
