#include "foresight/aggregation.hpp"

#include "foresight/error.hpp"
#include "foresight/rng.hpp"
#include "foresight/scoring.hpp"
#include "foresight/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace foresight {

std::string to_string(AggregationMethod m) {
    switch (m) {
        case AggregationMethod::mean: return "mean";
        case AggregationMethod::trimmed_mean: return "trimmed_mean";
        case AggregationMethod::median: return "median";
    }
    return "mean";
}

AggregationMethod aggregation_method_from_string(const std::string& s) {
    if (s == "mean") return AggregationMethod::mean;
    if (s == "trimmed_mean") return AggregationMethod::trimmed_mean;
    if (s == "median") return AggregationMethod::median;
    throw DataError("unknown aggregation method: " + s);
}

Probability aggregate(std::span<const Probability> forecasts, AggregationMethod method) {
    if (forecasts.empty()) throw std::invalid_argument("aggregate: no forecasts");
    // Sorting first makes every method independent of input order, bit for bit.
    std::vector<double> v(forecasts.begin(), forecasts.end());
    std::sort(v.begin(), v.end());
    double r = 0.0;
    switch (method) {
        case AggregationMethod::mean: r = stats::mean(v); break;
        case AggregationMethod::median: r = stats::median(v); break;
        case AggregationMethod::trimmed_mean:
            if (v.size() < 3) throw std::invalid_argument("aggregate: trimmed mean needs at least 3 forecasts");
            r = stats::mean(std::span<const double>(v).subspan(1, v.size() - 2));
            break;
    }
    return Probability(std::clamp(r, v.front(), v.back()));
}

BestOfKChoice best_of_k_enforce(std::span<const Probability> candidates, Probability chosen) {
    if (candidates.empty()) throw std::invalid_argument("best_of_k_enforce: no candidates");
    const Probability* best = nullptr;
    double best_dist = 0.0;
    for (const auto& c : candidates) {
        const double d = std::abs(c.value() - chosen.value());
        if (!best || d < best_dist || (d == best_dist && c < *best)) {
            best = &c;
            best_dist = d;
        }
    }
    if (best_dist <= 1e-6) return {*best, false};
    return {*best, true};
}

Probability merge_supervisor(Probability simple_mean, const SupervisorOutput& sup) {
    return sup.confidence == Confidence::high ? sup.revised_probability : simple_mean;
}

SynthesisMetrics synthesis_metrics(std::span<const SynthesisQuestion> questions, SynthesisVariant variant) {
    SynthesisMetrics m;
    if (questions.empty()) return m;
    double top = 0, worst = 0, out = 0, sum = 0;
    for (const auto& q : questions) {
        if (q.individual_briers.size() < 3) {
            throw std::invalid_argument("synthesis_metrics: each question needs at least 3 individual forecasts");
        }
        std::vector<double> b = q.individual_briers;
        std::sort(b.begin(), b.end());
        const double best = b.front();
        const double third_best = b[2];
        const double third_worst = b[b.size() - 3];
        const double top_threshold = variant == SynthesisVariant::rank_threshold ? third_best : best;
        if (q.aggregate_brier <= top_threshold) top += 1;
        if (q.aggregate_brier >= third_worst) worst += 1;
        if (q.aggregate_brier < best) out += 1;
        sum += q.aggregate_brier;
    }
    const double n = static_cast<double>(questions.size());
    m.top_at_3 = top / n;
    m.worst_at_3 = worst / n;
    m.outperform = out / n;
    m.mean_brier = sum / n;
    m.n_questions = static_cast<int>(questions.size());
    return m;
}

std::vector<EnsembleSizePoint> ensemble_size_curve(std::span<const PooledQuestion> questions,
                                                   std::span<const int> sizes, int n_boot, std::uint64_t seed) {
    if (questions.empty()) throw std::invalid_argument("ensemble_size_curve: no questions");
    if (n_boot < 1) throw std::invalid_argument("ensemble_size_curve: n_boot must be positive");
    std::size_t min_pool = questions.front().pool.size();
    for (const auto& q : questions) min_pool = std::min(min_pool, q.pool.size());

    std::vector<EnsembleSizePoint> curve;
    for (std::size_t si = 0; si < sizes.size(); ++si) {
        const int size = sizes[si];
        if (size < 1) throw std::invalid_argument("ensemble_size_curve: sizes must be positive");
        if (static_cast<std::size_t>(size) > min_pool) {
            throw std::invalid_argument("ensemble_size_curve: size " + std::to_string(size) +
                                        " exceeds the forecast pool (" + std::to_string(min_pool) + ")");
        }
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(size)));
        std::vector<double> replicate_briers;
        replicate_briers.reserve(static_cast<std::size_t>(n_boot));
        std::vector<std::size_t> idx;
        for (int b = 0; b < n_boot; ++b) {
            double total = 0.0;
            for (const auto& q : questions) {
                idx.resize(q.pool.size());
                std::iota(idx.begin(), idx.end(), std::size_t{0});
                // Partial Fisher-Yates: the first `size` slots are the subsample.
                for (std::size_t k = 0; k < static_cast<std::size_t>(size); ++k) {
                    std::swap(idx[k], idx[k + rng.uniform_index(idx.size() - k)]);
                }
                std::sort(idx.begin(), idx.begin() + size);
                double s = 0.0;
                for (int k = 0; k < size; ++k) s += q.pool[idx[static_cast<std::size_t>(k)]].value();
                total += brier(Probability(std::clamp(s / size, 0.0, 1.0)), q.outcome);
            }
            replicate_briers.push_back(total / static_cast<double>(questions.size()));
        }
        curve.push_back({size, stats::mean(replicate_briers), stats::percentile(replicate_briers, 0.025),
                         stats::percentile(replicate_briers, 0.975)});
    }
    return curve;
}

}  // namespace foresight
