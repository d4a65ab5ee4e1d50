#pragma once

#include "foresight/domain.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace foresight {

inline constexpr int kDefaultAgents = 10;

enum class AggregationMethod { mean, trimmed_mean, median };

std::string to_string(AggregationMethod m);
AggregationMethod aggregation_method_from_string(const std::string& s);

// trimmed_mean drops exactly one minimum and one maximum, for any count >= 3.
Probability aggregate(std::span<const Probability> forecasts, AggregationMethod method);

struct BestOfKChoice {
    Probability value;
    bool violation = false;  // the judge's choice was not one of the candidates
};

// Accepts chosen if within 1e-6 of a candidate; otherwise snaps to the nearest
// candidate, lower value on ties.
BestOfKChoice best_of_k_enforce(std::span<const Probability> candidates, Probability chosen);

// Only a high-confidence revision replaces the simple mean.
Probability merge_supervisor(Probability simple_mean, const SupervisorOutput& sup);

enum class SynthesisVariant {
    rank_threshold,  // Top@3: aggregate <= 3rd-best individual
    best_only,       // Top@3: aggregate <= best individual
};

struct SynthesisQuestion {
    double aggregate_brier = 0.0;
    std::vector<double> individual_briers;
};

struct SynthesisMetrics {
    double top_at_3 = 0.0;
    double worst_at_3 = 0.0;
    double outperform = 0.0;
    double mean_brier = 0.0;
    int n_questions = 0;
};

SynthesisMetrics synthesis_metrics(std::span<const SynthesisQuestion> questions,
                                   SynthesisVariant variant = SynthesisVariant::rank_threshold);

struct EnsembleSizePoint {
    int size = 0;
    double mean_brier = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

struct PooledQuestion {
    std::vector<Probability> pool;
    int outcome = 0;
};

// For each size, n_boot replicates of: subsample `size` forecasts per question
// without replacement, average, score; report the replicate mean and the
// 2.5/97.5 percentiles.
std::vector<EnsembleSizePoint> ensemble_size_curve(std::span<const PooledQuestion> questions,
                                                   std::span<const int> sizes, int n_boot,
                                                   std::uint64_t seed);

}  // namespace foresight
