#include "foresight/calibration.hpp"

#include "foresight/error.hpp"
#include "foresight/scoring.hpp"
#include "foresight/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace foresight {

Probability platt_apply(Probability p, const CalibrationMap& map) {
    if (map.method != CalibrationMethod::platt) throw std::invalid_argument("platt_apply: map is not a Platt map");
    const double x = logit(clamp_probability(p.value()));
    return Probability(sigmoid(map.alpha * x + map.gamma));
}

Probability extremize_logodds(std::span<const Probability> forecasts, double d) {
    if (forecasts.empty()) throw std::invalid_argument("extremize_logodds: no forecasts");
    if (!(d > 0.0)) throw std::invalid_argument("extremize_logodds: d must be positive");
    double sum = 0.0;
    for (auto p : forecasts) sum += logit(clamp_probability(p.value()));
    return Probability(sigmoid(d * sum / static_cast<double>(forecasts.size())));
}

Probability geometric_pool(std::span<const Probability> forecasts) {
    if (forecasts.empty()) throw std::invalid_argument("geometric_pool: no forecasts");
    double log_p = 0.0;
    double log_q = 0.0;
    for (auto p : forecasts) {
        const double c = clamp_probability(p.value()).value();
        log_p += std::log(c);
        log_q += std::log1p(-c);
    }
    const double n = static_cast<double>(forecasts.size());
    return Probability(sigmoid(log_p / n - log_q / n));
}

namespace {

struct Features {
    std::vector<double> x;
    std::vector<double> y;
};

Features platt_features(std::span<const LabeledForecast> pairs, double eps) {
    Features f;
    f.x.reserve(pairs.size());
    f.y.reserve(pairs.size());
    for (const auto& pr : pairs) {
        if (pr.outcome != 0 && pr.outcome != 1) throw std::invalid_argument("calibration outcome must be 0 or 1");
        f.x.push_back(logit(clamp_probability(pr.p.value(), eps)));
        f.y.push_back(static_cast<double>(pr.outcome));
    }
    return f;
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

struct Eval {
    double loss = 0.0;
    double ga = 0.0, gg = 0.0;             // gradient
    double haa = 0.0, hag = 0.0, hgg = 0.0;  // (Gauss-)Newton curvature
};

Eval evaluate(const Features& f, double alpha, double gamma, PlattLoss loss) {
    Eval e;
    const double n = static_cast<double>(f.x.size());
    for (std::size_t i = 0; i < f.x.size(); ++i) {
        const double z = alpha * f.x[i] + gamma;
        const double s = sigmoid(z);
        const double w = s * (1.0 - s);
        double r;
        double c;
        if (loss == PlattLoss::log_loss) {
            e.loss += f.y[i] * softplus(-z) + (1.0 - f.y[i]) * softplus(z);
            r = s - f.y[i];
            c = w;
        } else {
            const double d = s - f.y[i];
            e.loss += d * d;
            r = 2.0 * d * w;
            c = 2.0 * w * w;
        }
        e.ga += r * f.x[i];
        e.gg += r;
        e.haa += c * f.x[i] * f.x[i];
        e.hag += c * f.x[i];
        e.hgg += c;
    }
    e.loss /= n;
    e.ga /= n;
    e.gg /= n;
    e.haa /= n;
    e.hag /= n;
    e.hgg /= n;
    return e;
}

}  // namespace

CalibrationMap platt_fit(std::span<const LabeledForecast> pairs, const PlattFitOptions& opts) {
    if (pairs.empty()) throw std::invalid_argument("platt_fit: no data");
    const Features f = platt_features(pairs, opts.epsilon);
    const bool has_pos = std::any_of(f.y.begin(), f.y.end(), [](double y) { return y == 1.0; });
    const bool has_neg = std::any_of(f.y.begin(), f.y.end(), [](double y) { return y == 0.0; });
    if (opts.loss == PlattLoss::log_loss && !(has_pos && has_neg)) {
        throw DataError("platt_fit: all outcomes belong to one class; the log-likelihood is unbounded");
    }

    double alpha = 1.0;
    double gamma = 0.0;
    auto project = [](double a) { return std::clamp(a, kAlphaMin, kAlphaMax); };
    Eval cur = evaluate(f, alpha, gamma, opts.loss);

    for (int it = 0; it < opts.max_iterations; ++it) {
        double da = 0.0;
        double dg = 0.0;
        const double ridge = 1e-12 * (1.0 + cur.haa + cur.hgg);
        if (opts.fit_gamma) {
            const double a = cur.haa + ridge, b = cur.hag, c = cur.hgg + ridge;
            const double det = a * c - b * b;
            if (det > 1e-300) {
                da = -(c * cur.ga - b * cur.gg) / det;
                dg = -(a * cur.gg - b * cur.ga) / det;
            } else {
                da = -cur.ga;
                dg = -cur.gg;
            }
            // Alpha pinned at a bound and pushing outward: step gamma alone.
            const bool at_upper = alpha >= kAlphaMax && da > 0;
            const bool at_lower = alpha <= kAlphaMin && da < 0;
            if (at_upper || at_lower) {
                da = 0.0;
                dg = -cur.gg / (cur.hgg + ridge);
            }
        } else {
            da = -cur.ga / (cur.haa + ridge);
        }
        if (!std::isfinite(da) || !std::isfinite(dg)) break;

        double t = 1.0;
        bool accepted = false;
        double na = alpha, ng = gamma;
        Eval next;
        for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
            na = project(alpha + t * da);
            ng = gamma + t * dg;
            next = evaluate(f, na, ng, opts.loss);
            const double decrease = cur.ga * (na - alpha) + cur.gg * (ng - gamma);
            if (next.loss <= cur.loss + 1e-4 * decrease) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        const double moved = std::abs(na - alpha) + std::abs(ng - gamma);
        alpha = na;
        gamma = ng;
        cur = next;
        if (moved < 1e-12) break;
    }
    return CalibrationMap::platt(alpha, opts.fit_gamma ? gamma : 0.0);
}

CalibrationMap isotonic_fit(std::span<const LabeledForecast> pairs) {
    if (pairs.empty()) throw std::invalid_argument("isotonic_fit: no data");
    std::vector<std::pair<double, double>> sorted;
    sorted.reserve(pairs.size());
    for (const auto& pr : pairs) {
        if (pr.outcome != 0 && pr.outcome != 1) throw std::invalid_argument("calibration outcome must be 0 or 1");
        sorted.emplace_back(pr.p.value(), static_cast<double>(pr.outcome));
    }
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    // Pool identical forecasts into weighted points.
    struct Block {
        double x_first, x_last;
        double sum_y;
        double weight;
        double value() const { return sum_y / weight; }
    };
    std::vector<Block> points;
    for (const auto& [x, y] : sorted) {
        if (!points.empty() && points.back().x_first == x) {
            points.back().sum_y += y;
            points.back().weight += 1.0;
        } else {
            points.push_back({x, x, y, 1.0});
        }
    }
    std::vector<double> xs;
    xs.reserve(points.size());
    for (const auto& p : points) xs.push_back(p.x_first);

    // Pool adjacent violators.
    std::vector<Block> stack;
    std::vector<std::size_t> counts;
    for (const auto& p : points) {
        stack.push_back(p);
        counts.push_back(1);
        while (stack.size() > 1 && stack[stack.size() - 2].value() > stack.back().value()) {
            auto top = stack.back();
            auto cnt = counts.back();
            stack.pop_back();
            counts.pop_back();
            stack.back().sum_y += top.sum_y;
            stack.back().weight += top.weight;
            stack.back().x_last = top.x_last;
            counts.back() += cnt;
        }
    }

    CalibrationMap m;
    m.method = CalibrationMethod::isotonic;
    std::size_t idx = 0;
    for (std::size_t b = 0; b < stack.size(); ++b) {
        for (std::size_t k = 0; k < counts[b]; ++k) m.knots.push_back({xs[idx++], stack[b].value()});
    }
    return m;
}

Probability isotonic_apply(Probability p, const CalibrationMap& map) {
    if (map.method != CalibrationMethod::isotonic || map.knots.empty()) {
        throw std::invalid_argument("isotonic_apply: map is not a fitted isotonic map");
    }
    const auto& k = map.knots;
    if (p.value() <= k.front().x) return Probability(k.front().y);
    if (p.value() >= k.back().x) return Probability(k.back().y);
    // Right-continuous step: value of the last knot at or below p.
    auto it = std::upper_bound(k.begin(), k.end(), p.value(), [](double v, const Knot& kn) { return v < kn.x; });
    return Probability(std::prev(it)->y);
}

CalibrationMap linear_fit(std::span<const LabeledForecast> pairs) {
    if (pairs.size() < 2) throw std::invalid_argument("linear_fit: need at least two pairs");
    const double n = static_cast<double>(pairs.size());
    double mx = 0.0, my = 0.0;
    for (const auto& pr : pairs) {
        mx += pr.p.value();
        my += pr.outcome;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& pr : pairs) {
        const double dx = pr.p.value() - mx;
        sxx += dx * dx;
        sxy += dx * (pr.outcome - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("linear_fit: forecasts are constant; slope is unidentifiable");
    const double slope = sxy / sxx;
    CalibrationMap m;
    m.method = CalibrationMethod::linear;
    m.linear_coeffs = std::make_pair(my - slope * mx, slope);
    return m;
}

Probability linear_apply(Probability p, const CalibrationMap& map) {
    if (map.method != CalibrationMethod::linear || !map.linear_coeffs) {
        throw std::invalid_argument("linear_apply: map is not a fitted linear map");
    }
    const auto [intercept, slope] = *map.linear_coeffs;
    return Probability(std::clamp(intercept + slope * p.value(), 0.0, 1.0));
}

Probability calibrate(Probability p, const CalibrationMap& map) {
    switch (map.method) {
        case CalibrationMethod::platt: return platt_apply(p, map);
        case CalibrationMethod::isotonic: return isotonic_apply(p, map);
        case CalibrationMethod::linear: return linear_apply(p, map);
        case CalibrationMethod::identity: return p;
    }
    return p;
}

SweepCurve coefficient_sweep(std::span<const Probability> forecasts, std::span<const int> outcomes,
                             std::span<const double> grid) {
    if (grid.empty()) throw std::invalid_argument("coefficient_sweep: empty grid");
    if (forecasts.size() != outcomes.size()) throw std::invalid_argument("coefficient_sweep: length mismatch");
    if (forecasts.empty()) throw std::invalid_argument("coefficient_sweep: no forecasts");
    SweepCurve c;
    c.grid.assign(grid.begin(), grid.end());
    double best = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto map = CalibrationMap::platt(grid[g], 0.0);
        double sum = 0.0;
        for (std::size_t i = 0; i < forecasts.size(); ++i) sum += brier(platt_apply(forecasts[i], map), outcomes[i]);
        const double mean = sum / static_cast<double>(forecasts.size());
        c.brier_at.push_back(mean);
        if (g == 0 || mean < best) {
            best = mean;
            c.argmin_alpha = grid[g];
        }
    }
    return c;
}

std::vector<double> linspace_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || hi < lo) throw std::invalid_argument("linspace_grid: bad range");
    std::vector<double> g;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) g.push_back(lo + static_cast<double>(i) * step);
    return g;
}

CalibrationMap fit_calibration(std::span<const LabeledForecast> pairs, const FitSpec& spec) {
    switch (spec.method) {
        case CalibrationMethod::platt: return platt_fit(pairs, spec.platt);
        case CalibrationMethod::isotonic: return isotonic_fit(pairs);
        case CalibrationMethod::linear: return linear_fit(pairs);
        case CalibrationMethod::identity: return CalibrationMap::identity();
    }
    return CalibrationMap::identity();
}

LeaveOneOutResult leave_one_out(std::span<const LabeledForecast> pairs, const FitSpec& spec) {
    if (pairs.size() < 2) throw std::invalid_argument("leave_one_out: need at least two pairs");
    LeaveOneOutResult out;
    std::vector<LabeledForecast> rest;
    rest.reserve(pairs.size() - 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        rest.clear();
        for (std::size_t j = 0; j < pairs.size(); ++j) {
            if (j != i) rest.push_back(pairs[j]);
        }
        const auto map = fit_calibration(rest, spec);
        const auto held = calibrate(pairs[i].p, map);
        out.held_out.push_back(held.value());
        sum += brier(held, pairs[i].outcome);
    }
    out.mean_brier = sum / static_cast<double>(pairs.size());
    return out;
}

}  // namespace foresight
