#include "foresight/scoring.hpp"

#include "foresight/error.hpp"
#include "foresight/rng.hpp"
#include "foresight/stats.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>
#include <thread>

namespace foresight {

double brier(Probability p, int outcome) {
    if (outcome != 0 && outcome != 1) throw std::invalid_argument("brier: outcome must be 0 or 1");
    const double d = p.value() - static_cast<double>(outcome);
    return d * d;
}

double brier_vs_reference(Probability p, Probability ref) {
    const double d = p.value() - ref.value();
    return d * d;
}

Probability aggregate_survey(std::span<const Probability> forecasts, SurveyAggregation method) {
    if (forecasts.empty()) throw std::invalid_argument("aggregate_survey: no forecasts");
    std::vector<double> v(forecasts.begin(), forecasts.end());
    const double r = method == SurveyAggregation::median ? stats::median(v) : stats::mean(v);
    return Probability(std::clamp(r, 0.0, 1.0));
}

ScoreReport score(std::span<const ScoredForecast> forecasts) {
    ScoreReport rep;
    double sum = 0.0;
    for (const auto& f : forecasts) {
        const double b = brier(f.probability, f.outcome);
        rep.per_question.push_back({f.question_id, b});
        sum += b;
    }
    rep.n_questions = static_cast<int>(rep.per_question.size());
    rep.mean_brier = rep.n_questions > 0 ? sum / rep.n_questions : 0.0;
    return rep;
}

namespace {

constexpr int kResamplesPerChunk = 1024;

// Counts resampled means of `centred` whose magnitude reaches `threshold`.
long count_extreme(const std::vector<double>& centred, double threshold, int resamples, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t n = centred.size();
    long hits = 0;
    for (int r = 0; r < resamples; ++r) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += centred[rng.uniform_index(n)];
        if (std::abs(s / static_cast<double>(n)) >= threshold) ++hits;
    }
    return hits;
}

}  // namespace

PairedComparison paired_bootstrap(std::span<const double> diffs, int n_resamples, std::uint64_t seed) {
    if (diffs.size() < 2) throw std::invalid_argument("paired_bootstrap: need at least 2 questions");
    if (n_resamples < 1) throw std::invalid_argument("paired_bootstrap: n_resamples must be positive");

    PairedComparison out;
    out.n_resamples = n_resamples;
    out.seed = seed;
    out.n_questions = static_cast<int>(diffs.size());
    out.mean_diff = stats::mean(diffs);

    std::vector<double> centred(diffs.begin(), diffs.end());
    for (double& d : centred) d -= out.mean_diff;
    const double threshold = std::abs(out.mean_diff);

    // Chunk c always draws from stream derive_seed(seed, c), so the result does
    // not depend on how many chunks run at once.
    const int chunks = (n_resamples + kResamplesPerChunk - 1) / kResamplesPerChunk;
    std::vector<std::future<long>> pending;
    pending.reserve(static_cast<std::size_t>(chunks));
    const bool parallel = std::thread::hardware_concurrency() > 1 && chunks > 1;
    for (int c = 0; c < chunks; ++c) {
        const int count = std::min(kResamplesPerChunk, n_resamples - c * kResamplesPerChunk);
        const auto stream = derive_seed(seed, static_cast<std::uint64_t>(c));
        pending.push_back(std::async(parallel ? std::launch::async : std::launch::deferred, count_extreme,
                                     std::cref(centred), threshold, count, stream));
    }
    long hits = 0;
    for (auto& f : pending) hits += f.get();

    // The observed statistic counts as one draw from its own null.
    out.p_value = static_cast<double>(hits + 1) / static_cast<double>(n_resamples + 1);
    return out;
}

double win_rate(std::span<const double> briers_a, std::span<const double> briers_b) {
    if (briers_a.size() != briers_b.size()) throw std::invalid_argument("win_rate: length mismatch");
    if (briers_a.empty()) throw std::invalid_argument("win_rate: no questions");
    double wins = 0.0;
    for (std::size_t i = 0; i < briers_a.size(); ++i) {
        if (briers_a[i] < briers_b[i]) {
            wins += 1.0;
        } else if (briers_a[i] == briers_b[i]) {
            wins += 0.5;
        }
    }
    return wins / static_cast<double>(briers_a.size());
}

PairedComparison compare_forecasters(std::span<const double> briers_a, std::span<const double> briers_b,
                                     int n_resamples, std::uint64_t seed) {
    if (briers_a.size() != briers_b.size()) throw std::invalid_argument("compare_forecasters: length mismatch");
    std::vector<double> diffs(briers_a.size());
    for (std::size_t i = 0; i < diffs.size(); ++i) diffs[i] = briers_a[i] - briers_b[i];
    auto out = paired_bootstrap(diffs, n_resamples, seed);
    out.win_rate = win_rate(briers_a, briers_b);
    return out;
}

}  // namespace foresight
