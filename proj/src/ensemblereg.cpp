#include "foresight/ensemblereg.hpp"

#include "foresight/rng.hpp"
#include "foresight/stats.hpp"

#include <algorithm>
#include <stdexcept>

namespace foresight {

namespace {

void check_inputs(std::span<const double> x_f, std::span<const double> x_m, std::span<const int> o) {
    if (x_f.empty()) throw std::invalid_argument("simplex regression: no data");
    if (x_f.size() != x_m.size() || x_f.size() != o.size()) {
        throw std::invalid_argument("simplex regression: covariates and outcomes are not aligned");
    }
    for (std::size_t i = 0; i < x_f.size(); ++i) {
        if (!(x_f[i] >= 0.0 && x_f[i] <= 1.0) || !(x_m[i] >= 0.0 && x_m[i] <= 1.0)) {
            throw std::invalid_argument("simplex regression: covariates must be probabilities");
        }
        if (o[i] != 0 && o[i] != 1) throw std::invalid_argument("simplex regression: outcomes must be 0 or 1");
    }
}

struct Moments {
    double num = 0.0;
    double den = 0.0;
    std::size_t informative = 0;  // indices with x_f != x_m

    void add(double xf, double xm, int o) {
        const double d = xf - xm;
        num += d * (o - xm);
        den += d * d;
        if (d != 0.0) ++informative;
    }
    double weight() const { return std::clamp(num / den, 0.0, 1.0); }
};

double sq(double v) { return v * v; }

}  // namespace

SimplexFit fit_simplex(std::span<const double> x_f, std::span<const double> x_m, std::span<const int> o) {
    check_inputs(x_f, x_m, o);
    Moments m;
    for (std::size_t i = 0; i < x_f.size(); ++i) m.add(x_f[i], x_m[i], o[i]);
    if (m.informative == 0) throw std::invalid_argument("fit_simplex: forecaster and market are identical; weight unidentifiable");
    SimplexFit fit;
    fit.w_forecaster = m.weight();
    fit.w_market = 1.0 - fit.w_forecaster;
    fit.ci_forecaster = {fit.w_forecaster, fit.w_forecaster};
    fit.ci_market = {fit.w_market, fit.w_market};
    return fit;
}

LooResult loo_ensemble_brier(std::span<const double> x_f, std::span<const double> x_m, std::span<const int> o) {
    check_inputs(x_f, x_m, o);
    const std::size_t n = x_f.size();
    if (n < 3) throw std::invalid_argument("loo_ensemble_brier: needs at least 3 questions");
    LooResult out;
    std::vector<double> briers(n);
    for (std::size_t i = 0; i < n; ++i) {
        Moments m;
        for (std::size_t k = 0; k < n; ++k) {
            if (k != i) m.add(x_f[k], x_m[k], o[k]);
        }
        double w = 0.5;
        if (m.informative == 0) {
            ++out.fallback_folds;
        } else {
            w = m.weight();
        }
        briers[i] = sq(o[i] - (w * x_f[i] + (1.0 - w) * x_m[i]));
    }
    out.mean_brier = stats::mean(briers);
    return out;
}

SimplexFit bootstrap_weights_ci(std::span<const double> x_f, std::span<const double> x_m, std::span<const int> o,
                                int n_boot, std::uint64_t seed) {
    if (n_boot < 1) throw std::invalid_argument("bootstrap_weights_ci: n_boot must be >= 1");
    SimplexFit fit = fit_simplex(x_f, x_m, o);
    fit.n_boot = n_boot;
    fit.seed = seed;
    const std::size_t n = x_f.size();
    std::vector<double> ws;
    ws.reserve(static_cast<std::size_t>(n_boot));
    for (int b = 0; b < n_boot; ++b) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
        bool drawn = false;
        for (int attempt = 0; attempt < 10 && !drawn; ++attempt) {
            Moments m;
            for (std::size_t k = 0; k < n; ++k) {
                const std::size_t i = rng.uniform_index(n);
                m.add(x_f[i], x_m[i], o[i]);
            }
            if (m.informative > 0) {
                ws.push_back(m.weight());
                drawn = true;
            }
        }
        if (!drawn) ++fit.skipped;
    }
    if (!ws.empty()) {
        const double lo = std::clamp(stats::percentile(ws, 0.025), 0.0, 1.0);
        const double hi = std::clamp(stats::percentile(ws, 0.975), 0.0, 1.0);
        fit.ci_forecaster = {lo, hi};
        fit.ci_market = {1.0 - hi, 1.0 - lo};
    }
    return fit;
}

EnsembleRow ensemble_row(std::span<const double> x_f, std::span<const double> x_m, std::span<const int> o, int n_boot,
                         std::uint64_t seed) {
    check_inputs(x_f, x_m, o);
    EnsembleRow row;
    row.n = static_cast<int>(x_f.size());
    std::vector<double> bf, bm;
    for (std::size_t i = 0; i < x_f.size(); ++i) {
        bf.push_back(sq(x_f[i] - o[i]));
        bm.push_back(sq(x_m[i] - o[i]));
    }
    row.brier_forecaster = stats::mean(bf);
    row.brier_market = stats::mean(bm);
    row.fit = bootstrap_weights_ci(x_f, x_m, o, n_boot, seed);
    row.loo = loo_ensemble_brier(x_f, x_m, o);
    return row;
}

}  // namespace foresight
