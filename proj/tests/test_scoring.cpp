#include "foresight/rng.hpp"
#include "foresight/scoring.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace foresight;

TEST_CASE("brier score is squared error against the outcome") {
    CHECK(brier(Probability(0.7), 1) == doctest::Approx(0.09));
    CHECK(brier(Probability(0.7), 0) == doctest::Approx(0.49));
    CHECK(brier(Probability(0.5), 0) == 0.25);
    CHECK(brier(Probability(0.5), 1) == 0.25);
    CHECK(brier(Probability(1.0), 1) == 0.0);
    CHECK_THROWS_AS(brier(Probability(0.5), 2), std::invalid_argument);
}

TEST_CASE("small moves near certainty change the score very little") {
    const double near_certain = brier(Probability(0.999), 1) - brier(Probability(0.995), 1);
    CHECK(near_certain == doctest::Approx(-2.4e-5).epsilon(1e-9));
    // (0.381)^2 - (0.497)^2, expanded by hand: 0.145161 - 0.247009.
    const double mid_range = brier(Probability(0.381), 0) - brier(Probability(0.497), 0);
    CHECK(mid_range == doctest::Approx(0.145161 - 0.247009).epsilon(1e-12));
}

TEST_CASE("distance to a reference price") {
    CHECK(brier_vs_reference(Probability(0.8), Probability(0.6)) == doctest::Approx(0.04));
    CHECK(brier_vs_reference(Probability(0.3), Probability(0.3)) == 0.0);
}

TEST_CASE("survey aggregation") {
    const std::vector<Probability> ps{Probability(0.1), Probability(0.9), Probability(0.2), Probability(0.4)};
    CHECK(aggregate_survey(ps, SurveyAggregation::median).value() == doctest::Approx(0.3));
    CHECK(aggregate_survey(ps, SurveyAggregation::mean).value() == doctest::Approx(0.4));
    CHECK_THROWS_AS(aggregate_survey(std::vector<Probability>{}, SurveyAggregation::mean), std::invalid_argument);
}

TEST_CASE("score report lists per-question scores in input order") {
    const std::vector<ScoredForecast> fs{{"a", Probability(0.8), 1}, {"b", Probability(0.3), 0}, {"c", Probability(0.6), 0}};
    const auto rep = score(fs);
    CHECK(rep.n_questions == 3);
    CHECK(rep.per_question[2].question_id == "c");
    CHECK(rep.mean_brier == doctest::Approx((0.04 + 0.09 + 0.36) / 3.0));
    CHECK(score(fs) == rep);
    CHECK(score(std::vector<ScoredForecast>{}).n_questions == 0);
}

TEST_CASE("win rate counts ties as half") {
    const std::vector<double> a{0.1, 0.2, 0.3, 0.4};
    const std::vector<double> b{0.2, 0.2, 0.1, 0.5};
    CHECK(win_rate(a, b) == doctest::Approx((1 + 0.5 + 0 + 1) / 4.0));
    CHECK(win_rate(a, a) == 0.5);
    CHECK_THROWS_AS(win_rate(a, std::vector<double>{0.1}), std::invalid_argument);
}

TEST_CASE("paired bootstrap edge cases") {
    const std::vector<double> zeros(50, 0.0);
    const auto z = paired_bootstrap(zeros, 2000, 3);
    CHECK(z.p_value == 1.0);
    CHECK(z.mean_diff == 0.0);

    const std::vector<double> shift(500, 0.01);
    const auto s = paired_bootstrap(shift, 2000, 3);
    CHECK(s.p_value == doctest::Approx(1.0 / 2001.0));
    CHECK(s.mean_diff == doctest::Approx(0.01));
    CHECK(s.n_questions == 500);

    CHECK_THROWS_AS(paired_bootstrap(std::vector<double>{0.1}, 100, 0), std::invalid_argument);
    CHECK_THROWS_AS(paired_bootstrap(zeros, 0, 0), std::invalid_argument);
}

TEST_CASE("paired bootstrap is a function of its seed") {
    Rng rng(11);
    std::vector<double> diffs;
    for (int i = 0; i < 120; ++i) diffs.push_back(0.02 + 0.1 * rng.normal());
    const auto a = paired_bootstrap(diffs, 3000, 99);
    const auto b = paired_bootstrap(diffs, 3000, 99);
    CHECK(a.p_value == b.p_value);
    CHECK(a.seed == 99);
    CHECK(a.n_resamples == 3000);
}

TEST_CASE("paired bootstrap agrees with the large-sample normal test") {
    // For a large sample the recentred bootstrap p-value approaches the
    // two-sided normal p-value of the mean, erfc(|z| / sqrt 2).
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        Rng rng(seed);
        const int n = 400;
        std::vector<double> diffs;
        for (int i = 0; i < n; ++i) diffs.push_back(0.012 + 0.1 * rng.normal());
        double m = 0.0;
        for (double d : diffs) m += d;
        m /= n;
        double ss = 0.0;
        for (double d : diffs) ss += (d - m) * (d - m);
        const double se = std::sqrt(ss / n) / std::sqrt(static_cast<double>(n));
        const double p_normal = std::erfc(std::abs(m / se) / std::sqrt(2.0));
        const auto boot = paired_bootstrap(diffs, 10000, seed);
        CHECK(std::abs(boot.p_value - p_normal) < 0.02);
    }
}

TEST_CASE("compare_forecasters combines the bootstrap and win rate") {
    const std::vector<double> a{0.1, 0.2, 0.05, 0.3};
    const std::vector<double> b{0.2, 0.2, 0.15, 0.25};
    const auto c = compare_forecasters(a, b, 500, 5);
    std::vector<double> diffs;
    for (std::size_t i = 0; i < a.size(); ++i) diffs.push_back(a[i] - b[i]);
    const auto direct = paired_bootstrap(diffs, 500, 5);
    CHECK(c.mean_diff == doctest::Approx(-0.0375));
    CHECK(c.p_value == direct.p_value);
    CHECK(c.win_rate == doctest::Approx(0.625));
}
