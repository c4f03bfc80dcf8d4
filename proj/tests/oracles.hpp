#pragma once

// Independent test oracles. These deliberately re-derive values by brute
// force (grid suprema, direct minimization, normal equations) so they share
// no code path with the library implementations they check.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "phiquad/detail/scalar_opt.hpp"
#include "phiquad/divergence.hpp"
#include "phiquad/empirical.hpp"

namespace oracles {

// Brute-force conjugate: max over grid x of z*x - phi(x).
inline double conjugate_grid(const phiquad::DivergenceSpec& spec, double z, double lo, double hi,
                             double step) {
    double best = -1e300;
    for (double x = lo; x <= hi + 1e-15; x += step) {
        const auto v = spec.phi(x);
        if (!v.is_finite()) continue;
        best = std::max(best, z * x - v.value());
    }
    return best;
}

// CVaR by direct minimization of C + (1-alpha)^-1 E[(X-C)+] over a fine grid
// plus golden refinement.
inline double cvar_minimization(const phiquad::EmpiricalDistribution& x, double alpha) {
    auto objective = [&](double c) {
        double tail = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            tail += x.prob(i) * std::max(x.value(i) - c, 0.0);
        return c + tail / (1.0 - alpha);
    };
    const double lo = x.ess_inf() - 1.0, hi = x.ess_sup() + 1.0;
    double best = 1e300;
    for (int k = 0; k <= 4000; ++k) best = std::min(best, objective(lo + (hi - lo) * k / 4000.0));
    best = std::min(best, phiquad::detail::golden_min(objective, lo, hi, 1e-12, 65).value);
    return best;
}

// Ordinary least squares with intercept via normal equations.
struct OlsFit {
    std::vector<double> coef;
    double intercept = 0.0;
};

inline OlsFit ols(const std::vector<std::vector<double>>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size(), d = xs.front().size();
    const std::size_t m = d + 1;
    std::vector<double> a(m * m, 0.0), b(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(m, 1.0);
        for (std::size_t j = 0; j < d; ++j) row[j] = xs[i][j];
        for (std::size_t p = 0; p < m; ++p) {
            for (std::size_t q = 0; q < m; ++q) a[p * m + q] += row[p] * row[q];
            b[p] += row[p] * ys[i];
        }
    }
    const auto sol = phiquad::detail::solve_linear(a, b);
    OlsFit fit;
    fit.coef.assign(sol.begin(), sol.begin() + static_cast<std::ptrdiff_t>(d));
    fit.intercept = sol[d];
    return fit;
}

// Small random uniform-probability distributions with well-separated atoms.
inline phiquad::EmpiricalDistribution random_distribution(std::mt19937_64& rng, int min_atoms = 2,
                                                          int max_atoms = 5) {
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    const int n = min_atoms + static_cast<int>(rng() % (max_atoms - min_atoms + 1));
    std::vector<double> values;
    while (static_cast<int>(values.size()) < n) {
        const double v = std::round(unif(rng) * 64.0) / 64.0; // keep atoms >= 1/64 apart
        bool clash = false;
        for (double u : values) clash = clash || std::abs(u - v) < 1e-9;
        if (!clash) values.push_back(v);
    }
    return phiquad::EmpiricalDistribution::uniform(std::move(values));
}

} // namespace oracles
