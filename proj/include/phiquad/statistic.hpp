#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "phiquad/detail/scalar_opt.hpp"
#include "phiquad/divergence.hpp"
#include "phiquad/empirical.hpp"
#include "phiquad/errors.hpp"
#include "phiquad/primal.hpp"

// Optimality characterizations for the statistic: the smooth 2x2
// characterizing system, the subdifferential membership test, and the exact
// sorted-atom interval for positively homogeneous conjugates.

namespace phiquad {

// Solution of the characterizing equations. c is the multiplier-scale offset
// (the conjugate argument is X/t - c); the statistic equals t * c.
struct CharacterizingSolution {
    double c = 0.0;
    double t = 0.0;
    double residual_1 = 0.0;
    double residual_2 = 0.0;
    double statistic() const { return c * t; }
};

namespace detail {

// Residuals of the smooth system at offset s (outcome units) and scale t:
//   g1 = E[phi*'((X-s)/t)] - 1
//   g2 = beta + E[phi*((X-s)/t)] - (1/t) E[(X-s) phi*'((X-s)/t)]
inline std::pair<double, double> characterizing_residuals(const DivergenceSpec& spec, double beta,
                                                          const EmpiricalDistribution& x, double s,
                                                          double t) {
    double g1 = 0.0, g2 = beta;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double z = (x.value(i) - s) / t;
        const ExtendedReal v = spec.conjugate(z);
        if (!v.is_finite()) return {kInf, kInf};
        const double der = spec.conjugate_subgradient(z).lower;
        g1 += x.prob(i) * der;
        g2 += x.prob(i) * (v.value() - z * der);
    }
    return {g1 - 1.0, g2};
}

} // namespace detail

// Damped Newton on the characterizing system, initialized from the primal
// optimizers, with a bisection fallback (offset root at fixed scale inside a
// golden-section outer loop) when Newton stalls.
inline CharacterizingSolution solve_characterizing(const DivergenceSpec& spec, double beta,
                                                   const EmpiricalDistribution& x) {
    require_beta(beta);
    if (!spec.smooth_conjugate())
        throw NonsmoothSpecError(spec.name() +
                                 ": characterizing equations need a smooth conjugate; "
                                 "use the membership check instead");
    if (x.is_constant()) throw DegenerateInput("solve_characterizing: constant input");

    const auto warm = primal_risk(spec, beta, x);
    double s = warm.c, t = warm.t;

    auto norm_at = [&](double ss, double tt) {
        const auto [g1, g2] = detail::characterizing_residuals(spec, beta, x, ss, tt);
        return std::sqrt(g1 * g1 + g2 * g2);
    };

    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
        const auto [g1, g2] = detail::characterizing_residuals(spec, beta, x, s, t);
        const double norm = std::sqrt(g1 * g1 + g2 * g2);
        if (norm <= 1e-11) {
            converged = true;
            break;
        }
        const double hs = 1e-7 * (1.0 + std::abs(s));
        const double ht = 1e-7 * t;
        const auto [a1, a2] = detail::characterizing_residuals(spec, beta, x, s + hs, t);
        const auto [b1, b2] = detail::characterizing_residuals(spec, beta, x, s, t + ht);
        const double j11 = (a1 - g1) / hs, j12 = (b1 - g1) / ht;
        const double j21 = (a2 - g2) / hs, j22 = (b2 - g2) / ht;
        const double det = j11 * j22 - j12 * j21;
        if (!std::isfinite(det) || std::abs(det) < 1e-300) break;
        double ds = (-g1 * j22 + g2 * j12) / det;
        double dt = (-g2 * j11 + g1 * j21) / det;
        double damp = 1.0;
        bool stepped = false;
        for (int halving = 0; halving < 60; ++halving, damp *= 0.5) {
            const double ts = s + damp * ds;
            const double tt = t + damp * dt;
            if (tt <= 0.0) continue;
            if (norm_at(ts, tt) < norm) {
                s = ts;
                t = tt;
                stepped = true;
                break;
            }
        }
        if (!stepped) break;
    }

    if (!converged && norm_at(s, t) > 1e-11) {
        // Fallback: for each t, solve g1 = 0 in the offset (monotone), then
        // drive |g2| to zero over t by golden section.
        const double span = 1.0 + x.ess_sup() - x.ess_inf();
        auto offset_root = [&](double tt) {
            return detail::bisect_root(
                [&](double ss) {
                    return detail::characterizing_residuals(spec, beta, x, ss, tt).first;
                },
                x.ess_inf() - 40.0 * span, x.ess_sup() + 40.0 * span, 1e-13 * span);
        };
        const auto best = detail::golden_min(
            [&](double tt) {
                const double ss = offset_root(tt);
                return std::abs(detail::characterizing_residuals(spec, beta, x, ss, tt).second);
            },
            detail::kTFloor, detail::initial_brackets(x).t_hi * 10.0, 1e-13, 129);
        t = best.x;
        s = offset_root(t);
    }

    const auto [g1, g2] = detail::characterizing_residuals(spec, beta, x, s, t);
    return {s / t, t, g1, g2};
}

// True when 0 lies in (1, beta)^T + E[box of one-sided derivatives of
// t phi*((X-C)/t) in (C, t)] for some scale in the bracket, each component
// inflated by 1e-7. The infimum over the scale may sit on the positivity
// boundary (homogeneous conjugates); that case is admitted when the partial
// derivative in t stays nonnegative at the smallest bracket point.
inline bool statistic_membership_check(const DivergenceSpec& spec, double beta,
                                       const EmpiricalDistribution& x, double c) {
    require_beta(beta);
    constexpr double tol = 1e-7;
    const double t_hi = detail::initial_brackets(x).t_hi * 10.0;

    // log-spaced scale grid, floor included
    std::vector<double> grid;
    const int points = 240;
    for (int k = 0; k <= points; ++k)
        grid.push_back(detail::kTFloor *
                       std::pow(t_hi / detail::kTFloor, static_cast<double>(k) / points));

    struct Box {
        bool finite = false;
        bool c_ok = false;
        double t_lo = 0.0, t_hi = 0.0; // beta + E[d/dt interval]
    };
    auto box_at = [&](double t) {
        Box b;
        double c_lo = 0.0, c_hi = 0.0;
        double tl = 0.0, th = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double z = (x.value(i) - c) / t;
            const ExtendedReal v = spec.conjugate(z);
            if (!v.is_finite()) return b;
            const auto g = spec.conjugate_subgradient(z);
            // d/dC [t phi*((X-C)/t)] = -phi*'(z); interval flips sign
            c_lo += x.prob(i) * -g.upper;
            c_hi += x.prob(i) * -g.lower;
            // d/dt [t phi*((X-C)/t)] = phi*(z) - z phi*'(z)
            const double e1 = v.value() - z * g.lower;
            const double e2 = v.value() - z * g.upper;
            tl += x.prob(i) * std::min(e1, e2);
            th += x.prob(i) * std::max(e1, e2);
        }
        b.finite = true;
        b.c_ok = 1.0 + c_lo <= tol && 1.0 + c_hi >= -tol;
        b.t_lo = beta + tl;
        b.t_hi = beta + th;
        return b;
    };

    Box prev;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const Box b = box_at(grid[gi]);
        if (b.finite && b.c_ok) {
            if (b.t_lo <= tol && b.t_hi >= -tol) return true;
            if (gi == 0 && b.t_lo >= -tol) return true; // infimum at the scale floor
            // The scale condition for a smooth conjugate holds at one exact
            // root; bisect when the interval-valued map crosses zero between
            // grid points.
            if (prev.finite && prev.c_ok &&
                ((prev.t_hi >= -tol && b.t_lo <= tol) || (prev.t_lo <= tol && b.t_hi >= -tol))) {
                double lo = grid[gi - 1], hi = grid[gi];
                for (int it = 0; it < 80; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const Box m = box_at(mid);
                    if (!m.finite) break;
                    if (m.c_ok && m.t_lo <= tol && m.t_hi >= -tol) return true;
                    const double fm = 0.5 * (m.t_lo + m.t_hi);
                    const double fp = 0.5 * (prev.t_lo + prev.t_hi);
                    ((fm > 0.0) == (fp > 0.0) ? lo : hi) = mid;
                }
            }
        }
        prev = b;
    }
    return false;
}

// Exact interval {C : E[d-phi*(X-C)] <= 1 <= E[d+phi*(X-C)]} for positively
// homogeneous conjugates, by scanning sorted atoms and the gaps between them.
inline std::pair<double, double> homogeneous_statistic(const DivergenceSpec& spec,
                                                       const EmpiricalDistribution& x) {
    if (!spec.homogeneous_conjugate())
        throw HomogeneityError(spec.name() + ": statistic shortcut needs a homogeneous conjugate");
    const double s_neg = spec.conjugate_subgradient(-1.0).lower;
    const double s_pos = spec.conjugate_subgradient(1.0).upper;

    const auto sorted = detail::sort_atoms(x);
    const std::size_t n = sorted.values.size();
    auto holds = [&](double c) {
        double p_below = 0.0, p_at = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (sorted.values[i] < c - 1e-12)
                p_below += sorted.probs[i];
            else if (sorted.values[i] <= c + 1e-12)
                p_at += sorted.probs[i];
        }
        const double p_above = std::max(1.0 - p_below - p_at, 0.0);
        const double left = s_neg * (p_below + p_at) + s_pos * p_above;  // E[d-]
        const double right = s_neg * p_below + s_pos * (p_at + p_above); // E[d+]
        return left <= 1.0 + 1e-12 && right >= 1.0 - 1e-12;
    };

    double lo = 0.0, hi = 0.0;
    bool any = false;
    auto consider = [&](double c) {
        if (!holds(c)) return;
        if (!any) {
            lo = hi = c;
            any = true;
        } else {
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
    };
    for (std::size_t i = 0; i < n; ++i) {
        consider(sorted.values[i]);
        if (i + 1 < n && sorted.values[i + 1] > sorted.values[i] + 1e-12) {
            // interior of a gap: if it holds, both endpoints join the interval
            const double mid = 0.5 * (sorted.values[i] + sorted.values[i + 1]);
            if (holds(mid)) {
                consider(sorted.values[i]);
                consider(sorted.values[i + 1]);
            }
        }
    }
    if (!any) throw UnboundedError(spec.name() + ": empty homogeneous statistic interval");
    return {lo, hi};
}

} // namespace phiquad
