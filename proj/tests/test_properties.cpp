#include "foresight/aggregation.hpp"
#include "foresight/benchkit.hpp"
#include "foresight/calibration.hpp"
#include "foresight/ensemblereg.hpp"
#include "foresight/integrity.hpp"
#include "foresight/providers.hpp"
#include "foresight/scoring.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace foresight;

namespace {

double mean_brier(const std::vector<Probability>& ps, int o) {
    double s = 0;
    for (const auto& p : ps) s += brier(p, o);
    return s / static_cast<double>(ps.size());
}

}  // namespace

TEST_CASE("mean pooling never scores worse than the average member") {
    Rng rng(101);
    for (int t = 0; t < 2000; ++t) {
        const auto ps = testing::random_list(rng, 1 + rng.uniform_index(12));
        const int o = rng.bernoulli(0.5) ? 1 : 0;
        CHECK(brier(aggregate(ps, AggregationMethod::mean), o) <= mean_brier(ps, o) + 1e-12);
    }
}

TEST_CASE("aggregates lie within the member range") {
    Rng rng(102);
    for (int t = 0; t < 1000; ++t) {
        const auto ps = testing::random_list(rng, 1 + rng.uniform_index(12));
        const auto [lo, hi] = std::minmax_element(ps.begin(), ps.end());
        for (auto m : {AggregationMethod::mean, AggregationMethod::median, AggregationMethod::trimmed_mean}) {
            if (m == AggregationMethod::trimmed_mean && ps.size() < 3) continue;
            const double a = aggregate(ps, m).value();
            CHECK(a >= lo->value() - 1e-12);
            CHECK(a <= hi->value() + 1e-12);
        }
    }
}

TEST_CASE("Platt map is odd-symmetric without a shift and monotone in its input") {
    Rng rng(103);
    for (int t = 0; t < 2000; ++t) {
        const double alpha = 0.1 + 3.0 * rng.uniform01();
        const auto map = CalibrationMap::platt(alpha, 0.0);
        const double p = 0.01 + 0.98 * rng.uniform01();
        const double q = 0.01 + 0.98 * rng.uniform01();
        CHECK(platt_apply(Probability(1 - p), map).value() == doctest::Approx(1 - platt_apply(Probability(p), map).value()).epsilon(1e-12));
        if (p < q) CHECK(platt_apply(Probability(p), map).value() <= platt_apply(Probability(q), map).value());
        CHECK(platt_apply(Probability(0.5), map).value() == doctest::Approx(0.5).epsilon(1e-15));
        // A slope above one pushes forecasts away from one half.
        if (alpha > 1.0) CHECK(std::abs(platt_apply(Probability(p), map).value() - 0.5) >= std::abs(p - 0.5) - 1e-12);
    }
}

TEST_CASE("fitted isotonic maps are non-decreasing") {
    Rng rng(104);
    for (int t = 0; t < 100; ++t) {
        std::vector<LabeledForecast> pairs;
        const auto n = 2 + rng.uniform_index(40);
        for (std::size_t i = 0; i < n; ++i) {
            const double p = rng.uniform01();
            pairs.push_back({Probability(p), rng.bernoulli(p) ? 1 : 0});
        }
        const auto map = isotonic_fit(pairs);
        double prev = -1;
        for (int k = 0; k <= 100; ++k) {
            const double v = isotonic_apply(Probability(k / 100.0), map).value();
            CHECK(v >= prev - 1e-15);
            prev = v;
        }
    }
}

TEST_CASE("prevalence estimate identities") {
    Rng rng(105);
    for (int t = 0; t < 2000; ++t) {
        const long n = 100 + static_cast<long>(rng.uniform_index(100000));
        const long flags = static_cast<long>(rng.uniform_index(static_cast<std::size_t>(n / 10)));
        const double precision = 0.05 + 0.95 * rng.uniform01();
        const double recall = 0.5 + 0.5 * rng.uniform01();
        const auto e = estimate_prevalence(n, flags, precision, recall);
        CHECK(e.est_tp + e.est_fp == doctest::Approx(static_cast<double>(flags)).epsilon(1e-12));
        CHECK(e.est_tp + e.est_fp + e.est_fn + e.est_tn == doctest::Approx(static_cast<double>(n)).epsilon(1e-12));
        if (flags > 0) {
            CHECK(e.est_tp / (e.est_tp + e.est_fp) == doctest::Approx(precision).epsilon(1e-12));
            CHECK(e.est_tp / (e.est_tp + e.est_fn) == doctest::Approx(recall).epsilon(1e-12));
        }
        CHECK(e.est_prevalence == doctest::Approx((e.est_tp + e.est_fn) / static_cast<double>(n)).epsilon(1e-12));
    }
}

TEST_CASE("market filtering is idempotent and only removes") {
    Rng rng(106);
    const char* cats[] = {"Economics", "Sports", "Politics", "Climate/Weather", "AI", "Science"};
    for (int t = 0; t < 50; ++t) {
        std::vector<MarketRecord> ms;
        for (int i = 0; i < 30; ++i) {
            MarketRecord m;
            m.market_id = "m" + std::to_string(i);
            m.title = m.market_id;
            m.open_time = Date(2024, 1, 1);
            m.close_time = m.open_time.plus_days(1 + static_cast<long>(rng.uniform_index(200)));
            m.total_contracts = static_cast<long>(rng.uniform_index(20000));
            m.category = cats[rng.uniform_index(6)];
            ms.push_back(m);
        }
        const auto once = filter_markets(ms);
        CHECK(filter_markets(once) == once);
        for (const auto& m : once) {
            CHECK(m.total_contracts >= 5000);
            CHECK(days_between(m.open_time, m.close_time) >= 7);
            CHECK(std::find(ms.begin(), ms.end(), m) != ms.end());
        }
    }
}

TEST_CASE("cutoff schedules are increasing and stay inside the open span") {
    for (int diff = 1; diff <= 400; ++diff) {
        const auto s = cutoff_schedule_for_span(diff);
        if (diff <= 7) {
            CHECK_FALSE(s);
            continue;
        }
        REQUIRE(s);
        CHECK(s->size() == 5);
        CHECK(s->front() == 1);
        CHECK(std::is_sorted(s->begin(), s->end()));
        CHECK(std::adjacent_find(s->begin(), s->end()) == s->end());
        CHECK(s->back() < diff + 1);
    }
}

TEST_CASE("blocklist merging is idempotent and monotone") {
    auto base = leakage_blocklist();
    const auto once = DomainBlocklist(base).merge(market_blocklist());
    auto twice = once;
    twice.merge(market_blocklist());
    CHECK(twice.blocked_domains == once.blocked_domains);
    CHECK(twice.blocked_urls == once.blocked_urls);
    auto self = once;
    self.merge(once);
    CHECK(self.blocked_domains == once.blocked_domains);

    std::vector<EvidenceItem> items;
    for (const char* u : {"https://polymarket.com/x", "https://news.example.org/a", "https://www.kalshi.com/m",
                          "https://example.com/b", "not a url"}) {
        EvidenceItem e;
        e.source_url = u;
        items.push_back(e);
    }
    const auto first = apply_blocklist(items, once);
    const auto second = apply_blocklist(first.items, once);
    CHECK(second.removed == 0);
    CHECK(second.items == first.items);
    for (const auto& e : first.items) CHECK_FALSE(once.blocks(e.source_url));
    CHECK(first.items.size() + static_cast<std::size_t>(first.removed) == items.size());
}

TEST_CASE("simplex weights are complementary under covariate swap") {
    Rng rng(107);
    for (int t = 0; t < 300; ++t) {
        const auto n = 2 + rng.uniform_index(30);
        std::vector<double> a, b;
        std::vector<int> o;
        for (std::size_t i = 0; i < n; ++i) {
            a.push_back(rng.uniform01());
            b.push_back(rng.uniform01());
            o.push_back(rng.bernoulli(0.5) ? 1 : 0);
        }
        const auto f = fit_simplex(a, b, o);
        const auto g = fit_simplex(b, a, o);
        CHECK(f.w_forecaster + f.w_market == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(f.w_forecaster >= 0.0);
        CHECK(f.w_forecaster <= 1.0);
        CHECK(f.w_forecaster == doctest::Approx(g.w_market).epsilon(1e-12));
    }
}

TEST_CASE("paired comparison is antisymmetric") {
    Rng rng(108);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> a, b;
        for (int i = 0; i < 40; ++i) {
            a.push_back(rng.uniform01());
            b.push_back(rng.uniform01());
        }
        const auto ab = compare_forecasters(a, b, 500, 3);
        const auto ba = compare_forecasters(b, a, 500, 3);
        CHECK(ab.mean_diff == doctest::Approx(-ba.mean_diff).epsilon(1e-12));
        CHECK(ab.win_rate + ba.win_rate == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(ab.p_value > 0.0);
        CHECK(ab.p_value <= 1.0);
    }
}
