#pragma once

#include <cmath>
#include <utility>

#include "phiquad/detail/scalar_opt.hpp"
#include "phiquad/divergence.hpp"
#include "phiquad/empirical.hpp"
#include "phiquad/errors.hpp"
#include "phiquad/quadrangle_result.hpp"

// Quadrangle elements as low-dimensional convex minimizations of the
// perspective-function objective
//
//     f(c, t) = c + t*beta + E[ t * phi*((X - c)/t) ],   t > 0,
//
// which is jointly convex in (c, t). The offset c is kept in outcome units;
// the multiplier form used elsewhere is c/t. Any atom whose conjugate
// evaluates to +inf makes the objective +inf, which is how domain constraints
// such as t >= ess sup(X - c) enter the search.

namespace phiquad {

struct PrimalSolution {
    double value = 0.0;
    double c = 0.0; // outcome units
    double t = 0.0;
    double c_over_t() const { return c / t; }
};

struct ScalarSolution {
    double value = 0.0;
    double t = 0.0;
};

namespace detail {

inline constexpr double kTFloor = 1e-9;

inline double expected_perspective(const DivergenceSpec& spec, const EmpiricalDistribution& x,
                                   double c, double t) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const ExtendedReal g = spec.conjugate((x.value(i) - c) / t);
        if (!g.is_finite()) return kInf;
        s += x.prob(i) * t * g.value();
    }
    return s;
}

inline double risk_objective(const DivergenceSpec& spec, double beta,
                             const EmpiricalDistribution& x, double c, double t) {
    const double e = expected_perspective(spec, x, c, t);
    return c + t * beta + e;
}

inline double deviation_objective(const DivergenceSpec& spec, double beta,
                                  const EmpiricalDistribution& x, double c, double t,
                                  double mean) {
    const double e = expected_perspective(spec, x, c, t);
    return c + t * beta + e - mean;
}

struct Brackets {
    double c_lo, c_hi;
    double t_hi;
};

inline Brackets initial_brackets(const EmpiricalDistribution& x) {
    const double span = x.ess_sup() - x.ess_inf();
    const double pad = 1.0 + span;
    const double amax = std::max(std::abs(x.ess_sup()), std::abs(x.ess_inf()));
    return {x.ess_inf() - pad, x.ess_sup() + pad, 10.0 * (1.0 + amax)};
}

// Minimizes a jointly convex objective over (c, t > 0) by nesting two
// golden-section searches: the outer over the offset c on the partially
// minimized g(c) = inf_t f(c, t), the inner over the scale t. The inner
// problem is always well bracketed (large t drives every conjugate argument
// to 0), so thin feasible slices in c at a fixed t cannot trap the search.
// A Nelder-Mead pass in (c, log t) then tightens nonsmooth diagonal valleys.
template <typename F>
PrimalSolution minimize_offset_scale(F&& obj, const EmpiricalDistribution& x) {
    Brackets br = initial_brackets(x);
    const double scale = 1.0 + std::max(std::abs(x.ess_sup()), std::abs(x.ess_inf()));

    auto inner = [&](double c) { return minimize_over_scale([&](double t) { return obj(c, t); },
                                                            kTFloor, br.t_hi); };

    ScalarMin outer;
    int expansions = 0;
    while (true) {
        outer = golden_min([&](double c) { return inner(c).value; }, br.c_lo, br.c_hi, 1e-11 * scale);
        const double width = br.c_hi - br.c_lo;
        const bool on_edge = outer.x - br.c_lo < 1e-3 * width || br.c_hi - outer.x < 1e-3 * width;
        if (!on_edge || expansions >= 4) break;
        const double mid = 0.5 * (br.c_lo + br.c_hi);
        br.c_lo = mid - 5.0 * width;
        br.c_hi = mid + 5.0 * width;
        ++expansions;
    }
    if (!(outer.value < kInf))
        throw UnboundedError("primal minimization found no finite value; check the spec/beta pair");
    if (expansions >= 4 && (outer.x - br.c_lo < 1e-3 * (br.c_hi - br.c_lo) ||
                            br.c_hi - outer.x < 1e-3 * (br.c_hi - br.c_lo)))
        throw UnboundedError("primal minimizer ran off the offset bracket after expansions");

    double c = outer.x;
    auto in = inner(c);
    double t = in.x, value = in.value;

    // Nonsmooth finisher; t is clamped at the positivity floor.
    auto nm_obj = [&](Point2 p) { return obj(p.x, std::max(std::exp(p.y), kTFloor)); };
    const auto nm = nelder_mead_2d(nm_obj, {c, std::log(t)}, 1e-5 * scale, 1e-5, 400);
    if (nm.value < value) {
        c = nm.p.x;
        t = std::max(std::exp(nm.p.y), kTFloor);
        value = nm.value;
    }
    return {value, c, t};
}

// 1-D minimization over t with top-edge expansion.
template <typename F>
ScalarSolution minimize_scale(F&& obj, const EmpiricalDistribution& x) {
    const auto best = minimize_over_scale(obj, kTFloor, initial_brackets(x).t_hi);
    if (!(best.value < kInf))
        throw UnboundedError("primal scale minimization found no finite value");
    return {best.value, best.x};
}

} // namespace detail

inline void require_beta(double beta) {
    if (!(beta > 0.0)) throw DomainError("beta must be strictly positive");
}

// inf over (c, t) of c + t beta + E[t phi*((X-c)/t)].
inline PrimalSolution primal_risk(const DivergenceSpec& spec, double beta,
                                  const EmpiricalDistribution& x) {
    require_beta(beta);
    if (x.is_constant()) return {x.value(0), x.value(0), detail::kTFloor};
    return detail::minimize_offset_scale(
        [&](double c, double t) { return detail::risk_objective(spec, beta, x, c, t); }, x);
}

// inf over t of t(beta + E[phi*(X/t)]).
inline ScalarSolution primal_regret(const DivergenceSpec& spec, double beta,
                                    const EmpiricalDistribution& x) {
    require_beta(beta);
    return detail::minimize_scale(
        [&](double t) { return detail::risk_objective(spec, beta, x, 0.0, t); }, x);
}

// inf over (c, t) of c + t beta + E[t phi*((X-c)/t) - X].
inline PrimalSolution primal_deviation(const DivergenceSpec& spec, double beta,
                                       const EmpiricalDistribution& x) {
    require_beta(beta);
    if (x.is_constant()) return {0.0, x.value(0), detail::kTFloor};
    const double mean = x.mean();
    return detail::minimize_offset_scale(
        [&](double c, double t) { return detail::deviation_objective(spec, beta, x, c, t, mean); },
        x);
}

// inf over t of t(beta + E[phi*(X/t) - X/t]).
inline ScalarSolution primal_error(const DivergenceSpec& spec, double beta,
                                   const EmpiricalDistribution& x) {
    require_beta(beta);
    const double mean = x.mean();
    return detail::minimize_scale(
        [&](double t) { return detail::risk_objective(spec, beta, x, 0.0, t) - mean; }, x);
}

// Argmin interval over c of inf_t f(c, t). A flat bottom is traced outward
// from the minimizer and its edges located by predicate bisection; a curved
// bottom collapses to a point.
inline std::pair<double, double> primal_statistic(const DivergenceSpec& spec, double beta,
                                                  const EmpiricalDistribution& x) {
    require_beta(beta);
    if (x.is_constant()) return {x.value(0), x.value(0)};

    const auto joint = detail::minimize_offset_scale(
        [&](double c, double t) { return detail::risk_objective(spec, beta, x, c, t); }, x);
    const double t_hint_hi = detail::initial_brackets(x).t_hi;

    auto inner = [&](double c) {
        return detail::minimize_over_scale(
                   [&](double t) { return detail::risk_objective(spec, beta, x, c, t); },
                   detail::kTFloor, t_hint_hi)
            .value;
    };

    double c0 = joint.c;
    double m = std::min(inner(c0), joint.value);
    const double scale = 1.0 + std::abs(x.ess_sup()) + std::abs(x.ess_inf());
    const double thr = 1e-10 * (1.0 + std::abs(m));
    auto flat = [&](double c) { return inner(c) <= m + thr; };

    const double probe = 1e-4 * scale;
    const bool flat_right = flat(c0 + probe);
    const bool flat_left = flat(c0 - probe);

    if (!flat_right && !flat_left) {
        // Curved bottom: polish the single point.
        const auto fine = detail::golden_min(inner, c0 - probe, c0 + probe, 1e-13 * scale, 9);
        return {fine.x, fine.x};
    }

    double hi;
    if (flat_right) {
        double step = probe;
        while (flat(c0 + step) && step < 64.0 * scale) step *= 2.0;
        hi = detail::bisect_predicate([&](double c) { return flat(c); }, c0 + step / 2.0,
                                      c0 + step, 1e-12 * scale);
    } else {
        // the edge sits between the minimizer and the probe
        hi = detail::bisect_predicate([&](double c) { return flat(c); }, c0, c0 + probe,
                                      1e-12 * scale);
    }
    double lo;
    if (flat_left) {
        double step = probe;
        while (flat(c0 - step) && step < 64.0 * scale) step *= 2.0;
        lo = -detail::bisect_predicate([&](double c) { return flat(-c); }, -(c0 - step / 2.0),
                                       -(c0 - step), 1e-12 * scale);
    } else {
        lo = -detail::bisect_predicate([&](double c) { return flat(-c); }, -c0, -(c0 - probe),
                                       1e-12 * scale);
    }
    return {lo, hi};
}

// All five elements through the primal route.
inline QuadrangleResult primal_quadrangle(const DivergenceSpec& spec, double beta,
                                          const EmpiricalDistribution& x) {
    QuadrangleResult r;
    r.beta = beta;
    r.spec_name = spec.name();
    const auto risk = primal_risk(spec, beta, x);
    r.risk = risk.value;
    r.optimal_c = risk.c;
    r.optimal_t = risk.t;
    r.deviation = primal_deviation(spec, beta, x).value;
    r.regret = primal_regret(spec, beta, x).value;
    r.error = primal_error(spec, beta, x).value;
    const auto stat = primal_statistic(spec, beta, x);
    r.statistic_lo = stat.first;
    r.statistic_hi = stat.second;
    return r;
}

} // namespace phiquad
