#pragma once

#include <cmath>

#include "phiquad/detail/scalar_opt.hpp"
#include "phiquad/divergence.hpp"
#include "phiquad/empirical.hpp"
#include "phiquad/errors.hpp"
#include "phiquad/primal.hpp"
#include "phiquad/quadrangle_result.hpp"

// Closed-form evaluators for the quadrangles generated by each catalog
// divergence. They serve as independent oracles for the primal route and as
// the fast production path inside the application solvers.

namespace phiquad {

// Radius-to-level conversions, kept in one place because each family carries
// its own parameterization.
inline double second_order_level(double beta) { return 1.0 - 1.0 / std::sqrt(1.0 + beta); }
inline double tvd_tail_level(double beta) { return 0.5 * beta; }
inline double interval_quantile_level(double a, double b) { return (b - 1.0) / (b - a); }

// Extended Pearson chi^2: mean/standard-deviation quadrangle.
inline QuadrangleResult mean_quadrangle(double beta, const EmpiricalDistribution& x) {
    require_beta(beta);
    QuadrangleResult r;
    r.beta = beta;
    r.spec_name = DivergenceSpec::pearson_chi2_extended().name();
    const double m = x.mean(), sd = x.stdev();
    r.risk = m + std::sqrt(beta) * sd;
    r.deviation = std::sqrt(beta) * sd;
    r.regret = m + std::sqrt(beta) * x.l2_norm();
    r.error = std::sqrt(beta) * x.l2_norm();
    r.statistic_lo = r.statistic_hi = m;
    r.optimal_c = m;
    r.optimal_t = std::max(sd / (2.0 * std::sqrt(beta)), detail::kTFloor);
    return r;
}

// Indicator divergence: VaR/CVaR quadrangle. The radius drops out.
inline QuadrangleResult quantile_quadrangle(double alpha, const EmpiricalDistribution& x) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("quantile_quadrangle: alpha in (0,1)");
    QuadrangleResult r;
    r.beta = 0.0;
    r.spec_name = DivergenceSpec::indicator_cvar(alpha).name();
    const double m = x.mean();
    r.risk = cvar(x, alpha);
    r.deviation = r.risk - m;
    r.regret = x.mean_positive_part() / (1.0 - alpha);
    r.error = x.expectation_of([&](double v) {
        return alpha / (1.0 - alpha) * std::max(v, 0.0) + std::max(-v, 0.0);
    });
    const auto iv = value_at_risk_interval(x, alpha);
    r.statistic_lo = iv.first;
    r.statistic_hi = iv.second;
    r.optimal_c = r.statistic_mid();
    r.optimal_t = detail::kTFloor;
    return r;
}

// Extended TVD: range-based quadrangle.
inline QuadrangleResult range_quadrangle(double beta, const EmpiricalDistribution& x) {
    require_beta(beta);
    QuadrangleResult r;
    r.beta = beta;
    r.spec_name = DivergenceSpec::tvd_extended().name();
    const double sup = x.ess_sup(), inf = x.ess_inf(), m = x.mean();
    const double linf = std::max(std::abs(sup), std::abs(inf));
    r.risk = 0.5 * beta * (sup - inf) + m;
    r.deviation = 0.5 * beta * (sup - inf);
    r.regret = beta * linf + m;
    r.error = beta * linf;
    r.statistic_lo = r.statistic_hi = 0.5 * (sup + inf);
    r.optimal_c = 0.5 * (sup + inf);
    r.optimal_t = std::max(0.5 * (sup - inf), detail::kTFloor);
    return r;
}

namespace detail {

// t * ln E[exp(X/t)], shifted by the essential supremum so the exponents stay
// nonpositive; well behaved down to t -> 0 where it tends to ess sup.
inline double entropic_value(const EmpiricalDistribution& x, double t) {
    const double m = x.ess_sup();
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x.prob(i) * std::exp((x.value(i) - m) / t);
    return m + t * std::log(s);
}

} // namespace detail

// KL divergence: entropic value-at-risk quadrangle.
inline QuadrangleResult evar_quadrangle(double beta, const EmpiricalDistribution& x) {
    require_beta(beta);
    QuadrangleResult r;
    r.beta = beta;
    r.spec_name = DivergenceSpec::kl().name();
    const double m = x.mean();

    const double t_hi = detail::initial_brackets(x).t_hi * 10.0;
    auto risk_obj = [&](double t) { return t * beta + detail::entropic_value(x, t); };
    const auto rmin = detail::minimize_over_scale(risk_obj, detail::kTFloor, t_hi, 8, 129);
    const double stat = x.is_constant() ? x.value(0) : detail::entropic_value(x, rmin.x);
    r.risk = x.is_constant() ? x.value(0) : rmin.value;
    r.optimal_t = rmin.x;
    r.optimal_c = stat;
    r.deviation = r.risk - m;

    auto exp_or_inf = [&](double v, double t) {
        const double z = v / t;
        return z > 700.0 ? detail::kInf : std::expm1(z);
    };
    auto regret_obj = [&](double t) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = exp_or_inf(x.value(i), t);
            if (e == detail::kInf) return detail::kInf;
            s += x.prob(i) * e;
        }
        return t * (beta + s);
    };
    r.regret = detail::minimize_over_scale(regret_obj, detail::kTFloor, t_hi, 8, 129).value;
    r.error = r.regret - m;
    r.statistic_lo = r.statistic_hi = stat;
    return r;
}

// Non-extended TVD: mixture of essential supremum and CVaR at level beta/2.
inline QuadrangleResult tvd_supremum_quadrangle(double beta, const EmpiricalDistribution& x) {
    if (!(beta > 0.0 && beta < 2.0)) throw DomainError("tvd quadrangle: beta must be in (0,2)");
    QuadrangleResult r;
    r.beta = beta;
    r.spec_name = DivergenceSpec::tvd().name();
    const double sup = x.ess_sup(), m = x.mean();
    const double level = tvd_tail_level(beta);
    r.risk = x.is_constant() ? x.value(0)
                             : 0.5 * beta * sup + (1.0 - 0.5 * beta) * cvar(x, level);
    r.deviation = r.risk - m;

    // Regret and error share the scale objective t(beta - 1) + E[X + t]_+ with
    // the conjugate's domain requiring t >= ess sup X.
    const double t_lo = std::max(detail::kTFloor, sup);
    const double t_hi = std::max(t_lo * 10.0, detail::initial_brackets(x).t_hi);
    auto regret_obj = [&](double t) {
        return t * (beta - 1.0) +
               x.expectation_of([&](double v) { return std::max(v + t, 0.0); });
    };
    r.regret = detail::minimize_over_scale(regret_obj, t_lo, t_hi, 8, 129).value;
    r.error = r.regret - m;

    const auto q = value_at_risk_interval(x, level);
    r.statistic_lo = 0.5 * (sup + q.first);
    r.statistic_hi = 0.5 * (sup + q.second);
    r.optimal_c = r.statistic_mid();
    r.optimal_t = std::max(0.5 * (sup - 0.5 * (q.first + q.second)), detail::kTFloor);
    return r;
}

// Non-extended Pearson chi^2: second-order superquantile quadrangle. The risk
// path uses the equivalent x^2 - 1 member of the divergence class, whose
// conjugate makes the inner scale minimization explicit; the reported
// optimizers are mapped back to the catalog (x-1)^2 representative via
// c_catalog = q + 2t.
inline QuadrangleResult second_order_quadrangle(double beta, const EmpiricalDistribution& x) {
    require_beta(beta);
    QuadrangleResult r;
    r.beta = beta;
    r.spec_name = DivergenceSpec::pearson_chi2().name();
    const double m = x.mean();

    double q, upper_second;
    if (x.is_constant()) {
        q = x.value(0);
        upper_second = 0.0;
    } else {
        q = second_order_quantile(x, second_order_level(beta));
        upper_second = x.expectation_of(
            [&](double v) { return v >= q ? (v - q) * (v - q) : 0.0; });
    }
    r.risk = q + std::sqrt((beta + 1.0) * upper_second);
    r.deviation = r.risk - m;
    const double t_star = std::sqrt(upper_second / (4.0 * (beta + 1.0)));
    r.optimal_t = std::max(t_star, detail::kTFloor);
    r.optimal_c = q + 2.0 * t_star;
    r.statistic_lo = r.statistic_hi = q + 2.0 * t_star;

    // Regret/error use the catalog conjugate directly (value -1 below z = -2).
    const double t_hi = detail::initial_brackets(x).t_hi * 10.0;
    auto regret_obj = [&](double t) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double v = x.value(i);
            s += x.prob(i) * (v >= -2.0 * t ? 0.25 * v * v / t + v : -t);
        }
        return t * beta + s;
    };
    r.regret = detail::minimize_over_scale(regret_obj, detail::kTFloor, t_hi, 8, 129).value;
    r.error = r.regret - m;
    return r;
}

// Generalized Pearson chi^2: expectile quadrangle. Error and regret follow
// the asymmetric-squared closed form; risk and deviation come from the error
// evaluated at the expectile, which is where the offset minimization lands.
inline QuadrangleResult expectile_quadrangle(double q, double beta, const EmpiricalDistribution& x) {
    require_beta(beta);
    if (!(q > 0.0 && q < 1.0)) throw DomainError("expectile_quadrangle: q in (0,1)");
    QuadrangleResult r;
    r.beta = beta;
    r.spec_name = DivergenceSpec::generalized_chi2_expectile(q).name();
    const double m = x.mean();

    auto weighted_square = [&](double shift) {
        return x.expectation_of([&](double v) {
            const double d = v - shift;
            return d > 0.0 ? q * d * d : (1.0 - q) * d * d;
        });
    };
    r.error = std::sqrt(beta * weighted_square(0.0));
    r.regret = m + r.error;
    const double e_q = x.is_constant() ? x.value(0) : expectile(x, q);
    r.statistic_lo = r.statistic_hi = e_q;
    const double w_at_stat = weighted_square(e_q);
    r.deviation = std::sqrt(beta * w_at_stat);
    r.risk = m + r.deviation;
    r.optimal_c = e_q;
    r.optimal_t = std::max(std::sqrt(w_at_stat / (4.0 * beta)), detail::kTFloor);
    return r;
}

// Finite-interval indicator divergence: CVaR/mean mixture with asymmetric
// piecewise-linear regret and error. The radius drops out.
inline QuadrangleResult interval_indicator_quadrangle(double a, double b,
                                                      const EmpiricalDistribution& x) {
    if (!(a > 0.0 && a < 1.0 && b > 1.0)) throw DomainError("interval quadrangle: 0 < a < 1 < b");
    QuadrangleResult r;
    r.beta = 0.0;
    r.spec_name = DivergenceSpec::interval_indicator(a, b).name();
    const double m = x.mean();
    const double level = interval_quantile_level(a, b);
    r.risk = (1.0 - a) * cvar(x, level) + a * m;
    r.deviation = r.risk - m;
    r.error = x.expectation_of([&](double v) {
        return (1.0 - a) * std::max(-v, 0.0) + (b - 1.0) * std::max(v, 0.0);
    });
    r.regret = r.error + m; // equivalently E[b X+ - a X-]
    const auto iv = value_at_risk_interval(x, level);
    r.statistic_lo = iv.first;
    r.statistic_hi = iv.second;
    r.optimal_c = r.statistic_mid();
    r.optimal_t = detail::kTFloor;
    return r;
}

enum class QuadElement { Risk, Deviation, Regret, Error };

// Single quadrangle element through the closed-form path, skipping the other
// minimizations. The recovery grids call this in tight loops.
inline double closed_form_element(const DivergenceSpec& spec, double beta,
                                  const EmpiricalDistribution& x, QuadElement which) {
    const double m = x.mean();
    const bool wants_risk = which == QuadElement::Risk || which == QuadElement::Deviation;
    const bool center = which == QuadElement::Deviation || which == QuadElement::Error;
    double value = 0.0;
    switch (spec.kind()) {
    case DivergenceKind::Kl: {
        const double t_hi = detail::initial_brackets(x).t_hi * 10.0;
        if (wants_risk) {
            value = x.is_constant()
                        ? x.value(0)
                        : detail::minimize_over_scale(
                              [&](double t) { return t * beta + detail::entropic_value(x, t); },
                              detail::kTFloor, t_hi, 8, 65)
                              .value;
        } else {
            auto obj = [&](double t) {
                double s = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    const double z = x.value(i) / t;
                    if (z > 700.0) return detail::kInf;
                    s += x.prob(i) * std::expm1(z);
                }
                return t * (beta + s);
            };
            value = detail::minimize_over_scale(obj, detail::kTFloor, t_hi, 8, 65).value;
        }
        break;
    }
    case DivergenceKind::Tvd: {
        if (!(beta < 2.0)) throw DomainError("tvd element: beta must be in (0,2)");
        if (wants_risk) {
            value = x.is_constant() ? x.value(0)
                                    : 0.5 * beta * x.ess_sup() +
                                          (1.0 - 0.5 * beta) * cvar(x, tvd_tail_level(beta));
        } else {
            const double t_lo = std::max(detail::kTFloor, x.ess_sup());
            const double t_hi = std::max(t_lo * 10.0, detail::initial_brackets(x).t_hi);
            auto obj = [&](double t) {
                return t * (beta - 1.0) +
                       x.expectation_of([&](double v) { return std::max(v + t, 0.0); });
            };
            value = detail::minimize_over_scale(obj, t_lo, t_hi, 8, 65).value;
        }
        break;
    }
    case DivergenceKind::TvdExtended: {
        const double linf = std::max(std::abs(x.ess_sup()), std::abs(x.ess_inf()));
        value = wants_risk ? 0.5 * beta * (x.ess_sup() - x.ess_inf()) + m : beta * linf + m;
        break;
    }
    case DivergenceKind::PearsonChi2: {
        if (wants_risk) {
            if (x.is_constant()) {
                value = x.value(0);
            } else {
                const double q = second_order_quantile(x, second_order_level(beta));
                const double u = x.expectation_of(
                    [&](double v) { return v >= q ? (v - q) * (v - q) : 0.0; });
                value = q + std::sqrt((beta + 1.0) * u);
            }
        } else {
            const double t_hi = detail::initial_brackets(x).t_hi * 10.0;
            auto obj = [&](double t) {
                double s = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    const double v = x.value(i);
                    s += x.prob(i) * (v >= -2.0 * t ? 0.25 * v * v / t + v : -t);
                }
                return t * beta + s;
            };
            value = detail::minimize_over_scale(obj, detail::kTFloor, t_hi, 8, 65).value;
        }
        break;
    }
    case DivergenceKind::PearsonChi2Extended:
        value = wants_risk ? m + std::sqrt(beta) * x.stdev() : m + std::sqrt(beta) * x.l2_norm();
        break;
    case DivergenceKind::IndicatorCvar:
        value = wants_risk ? cvar(x, spec.alpha())
                           : x.mean_positive_part() / (1.0 - spec.alpha()) ;
        break;
    case DivergenceKind::GeneralizedChi2Expectile: {
        const double q = spec.q();
        if (wants_risk) {
            const double e_q = x.is_constant() ? x.value(0) : expectile(x, q);
            const double w = x.expectation_of([&](double v) {
                const double d = v - e_q;
                return d > 0.0 ? q * d * d : (1.0 - q) * d * d;
            });
            value = m + std::sqrt(beta * w);
        } else {
            const double w = x.expectation_of([&](double v) {
                return v > 0.0 ? q * v * v : (1.0 - q) * v * v;
            });
            value = m + std::sqrt(beta * w);
        }
        break;
    }
    case DivergenceKind::IntervalIndicator: {
        const double a = spec.a(), b = spec.b();
        value = wants_risk
                    ? (1.0 - a) * cvar(x, interval_quantile_level(a, b)) + a * m
                    : m + x.expectation_of([&](double v) {
                          return (1.0 - a) * std::max(-v, 0.0) + (b - 1.0) * std::max(v, 0.0);
                      });
        break;
    }
    }
    return center ? value - m : value;
}

// Closed form matching a catalog entry, with the run radius where the family
// uses one.
inline QuadrangleResult closed_form_quadrangle(const DivergenceSpec& spec, double beta,
                                               const EmpiricalDistribution& x) {
    switch (spec.kind()) {
    case DivergenceKind::Kl:
        return evar_quadrangle(beta, x);
    case DivergenceKind::Tvd:
        return tvd_supremum_quadrangle(beta, x);
    case DivergenceKind::TvdExtended:
        return range_quadrangle(beta, x);
    case DivergenceKind::PearsonChi2:
        return second_order_quadrangle(beta, x);
    case DivergenceKind::PearsonChi2Extended:
        return mean_quadrangle(beta, x);
    case DivergenceKind::IndicatorCvar:
        return quantile_quadrangle(spec.alpha(), x);
    case DivergenceKind::GeneralizedChi2Expectile:
        return expectile_quadrangle(spec.q(), beta, x);
    case DivergenceKind::IntervalIndicator:
        return interval_indicator_quadrangle(spec.a(), spec.b(), x);
    }
    throw DomainError("closed_form_quadrangle: unknown divergence kind");
}

} // namespace phiquad
