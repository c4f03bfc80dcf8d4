#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "phiquad/closed_form.hpp"
#include "phiquad/divergence.hpp"
#include "phiquad/dual.hpp"
#include "phiquad/empirical.hpp"
#include "phiquad/primal.hpp"

// Cross-route equivalence and axiom report: primal vs closed form vs the
// brute-force dual oracle, plus the quadrangle axioms re-verified over an
// independent offset grid.

namespace phiquad {

struct VerifyCheck {
    std::string name;
    double gap = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool dual_skipped = false; // atom count beyond the oracle limit
    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

namespace detail {

inline void push_check(VerifyReport& report, const std::string& name, double gap, double tol) {
    report.checks.push_back({name, gap, tol, std::abs(gap) <= tol});
}

} // namespace detail

inline VerifyReport verify_routes(const DivergenceSpec& spec, double beta,
                                  const EmpiricalDistribution& x) {
    VerifyReport report;
    const auto primal = primal_quadrangle(spec, beta, x);
    const auto closed = closed_form_quadrangle(spec, beta, x);
    const double mean = x.mean();

    detail::push_check(report, "closed vs primal: risk", closed.risk - primal.risk, 1e-5);
    detail::push_check(report, "closed vs primal: deviation", closed.deviation - primal.deviation,
                       1e-5);
    detail::push_check(report, "closed vs primal: regret", closed.regret - primal.regret, 1e-5);
    detail::push_check(report, "closed vs primal: error", closed.error - primal.error, 1e-5);

    if (x.size() <= 8) {
        const auto dr = dual_risk_oracle(spec, beta, x);
        const auto dv = dual_regret_oracle(spec, beta, x);
        detail::push_check(report, "dual vs primal: risk", dr.value - primal.risk, 1e-4);
        detail::push_check(report, "dual vs primal: regret", dv.value - primal.regret, 1e-4);
        detail::push_check(report, "dual vs primal: deviation",
                           dr.value - mean - primal.deviation, 1e-4);
        detail::push_check(report, "dual vs primal: error", dv.value - mean - primal.error, 1e-4);
    } else {
        report.dual_skipped = true;
    }

    // Axioms. Constancy on the collapsed distribution; aversity on the input.
    const EmpiricalDistribution constant({mean}, {1.0});
    detail::push_check(report, "constancy: R(const) = const",
                       primal_risk(spec, beta, constant).value - mean, 1e-9);
    if (!x.is_constant()) {
        const bool averse = primal.risk > mean + 1e-9;
        report.checks.push_back({"aversity: R(X) > E[X]", primal.risk - mean, 0.0, averse});
        report.checks.push_back(
            {"aversity: E(X) > 0", primal.error, 0.0, primal.error > 1e-9});
    }
    detail::push_check(report, "centerness: R = D + E[X]",
                       primal.risk - primal.deviation - mean, 1e-7);
    detail::push_check(report, "centerness: V = E + E[X]", primal.regret - primal.error - mean,
                       1e-7);

    // Certainty equivalence and error projection re-minimized over an
    // independent offset grid around the statistic.
    const double span = 1.0 + x.ess_sup() - x.ess_inf();
    double ce_min = detail::kInf, ep_min = detail::kInf;
    const double c0 = primal.statistic_mid();
    for (int k = -40; k <= 40; ++k) {
        const double c = c0 + span * k / 20.0;
        const auto shifted = x.shifted(c);
        ce_min = std::min(ce_min, c + primal_regret(spec, beta, shifted).value);
        ep_min = std::min(ep_min, primal_error(spec, beta, shifted).value);
    }
    // refine near the best coarse offset by golden section
    const auto ce_fine = detail::golden_min(
        [&](double c) { return c + primal_regret(spec, beta, x.shifted(c)).value; },
        c0 - span, c0 + span, 1e-9 * span, 33);
    const auto ep_fine = detail::golden_min(
        [&](double c) { return primal_error(spec, beta, x.shifted(c)).value; }, c0 - span,
        c0 + span, 1e-9 * span, 33);
    ce_min = std::min(ce_min, ce_fine.value);
    ep_min = std::min(ep_min, ep_fine.value);
    detail::push_check(report, "certainty equivalence: R = min_C {C + V(X-C)}",
                       primal.risk - ce_min, 1e-5);
    detail::push_check(report, "error projection: D = min_C E(X-C)", primal.deviation - ep_min,
                       1e-5);

    // The indicator families must not feel the radius.
    if (spec.homogeneous_conjugate()) {
        const auto other = primal_risk(spec, 2.0 * beta, x);
        detail::push_check(report, "radius independence (homogeneous conjugate)",
                           other.value - primal.risk, 1e-6);
    }
    return report;
}

} // namespace phiquad
