#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "phiquad/detail/scalar_opt.hpp"
#include "phiquad/divergence.hpp"
#include "phiquad/empirical.hpp"
#include "phiquad/errors.hpp"
#include "phiquad/primal.hpp"

// Dual representations by direct maximization of E[XQ] over the risk
// envelope, plus extraction of risk identifiers from primal optimizers.
// The oracles are deliberately brute force (n <= 8 atoms) and share no code
// with the primal minimization they certify.

namespace phiquad {

// Worst-case weight vector over atoms with feasibility diagnostics.
struct RiskIdentifier {
    std::vector<double> weights;
    double mean_weight = 0.0;       // E[Q]
    double divergence_value = 0.0;  // E[phi(Q)]
    double attained_objective = 0.0; // E[X Q]
};

struct DualSolution {
    double value = 0.0;
    RiskIdentifier identifier;
};

namespace detail {

inline constexpr std::size_t kOracleAtomLimit = 8;

inline double weighted_mean(const std::vector<double>& q, const EmpiricalDistribution& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += x.prob(i) * q[i];
    return s;
}

inline double weighted_objective(const std::vector<double>& q, const EmpiricalDistribution& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += x.prob(i) * x.value(i) * q[i];
    return s;
}

inline double divergence_of(const DivergenceSpec& spec, const std::vector<double>& q,
                            const EmpiricalDistribution& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const ExtendedReal v = spec.phi(q[i]);
        if (!v.is_finite()) return kInf;
        s += x.prob(i) * v.value();
    }
    return s;
}

// Pulls q toward the all-ones vector (always strictly feasible) until the
// divergence budget holds; q is returned unchanged when already feasible.
inline void repair_toward_ones(const DivergenceSpec& spec, double beta, std::vector<double>& q,
                               const EmpiricalDistribution& x) {
    if (divergence_of(spec, q, x) <= beta) return;
    const std::vector<double> start = q;
    auto feasible = [&](double lam) {
        std::vector<double> trial(start.size());
        for (std::size_t i = 0; i < start.size(); ++i) trial[i] = 1.0 + lam * (start[i] - 1.0);
        return divergence_of(spec, trial, x) <= beta;
    };
    const double lam = bisect_predicate(feasible, 0.0, 1.0, 1e-14);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = 1.0 + lam * (start[i] - 1.0);
}

// Longest feasible step along q + s*d for s >= 0: probe at the problem scale,
// shrink into the feasible range, then expand and bisect the edge to relative
// precision.
template <typename Feasible>
double max_feasible_step(Feasible&& feasible, double scale_hint, double cap = 1e12) {
    if (!feasible(0.0)) return 0.0;
    double s = std::max(scale_hint, 1e-12);
    while (!feasible(s) && s > 1e-16 * scale_hint) s *= 0.25;
    if (!feasible(s)) return 0.0;
    while (s < cap && feasible(2.0 * s)) s *= 2.0;
    double lo = s, hi = std::min(2.0 * s, cap);
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    return lo;
}

struct EnvelopeOracle {
    const DivergenceSpec& spec;
    double beta;
    const EmpiricalDistribution& x;
    bool mean_constrained;

    bool feasible(const std::vector<double>& q) const {
        if (divergence_of(spec, q, x) > beta) return false;
        if (!mean_constrained) return true;
        return std::abs(weighted_mean(q, x) - 1.0) <= 1e-11;
    }

    // Projected subgradient ascent from Q = 1 with feasibility repair,
    // followed by boundary pushes and pairwise-exchange polish.
    std::vector<double> solve() const {
        const std::size_t n = x.size();
        std::vector<double> q(n, 1.0), best(n, 1.0);
        double best_val = weighted_objective(q, x);

        double spread = 0.0;
        const double m = x.mean();
        for (std::size_t i = 0; i < n; ++i) spread = std::max(spread, std::abs(x.value(i) - m));
        const double step0 = spread > 0.0 ? 2.0 / spread : 0.0;

        for (int k = 1; k <= 500 && step0 > 0.0; ++k) {
            const double s = step0 / std::sqrt(static_cast<double>(k));
            for (std::size_t i = 0; i < n; ++i) q[i] += s * x.value(i);
            if (mean_constrained) {
                const double shift = weighted_mean(q, x) - 1.0;
                for (double& v : q) v -= shift;
            }
            repair_toward_ones(spec, beta, q, x);
            const double val = weighted_objective(q, x);
            if (val > best_val && feasible(q)) {
                best_val = val;
                best = q;
            }
        }

        q = best;
        polish(q);
        if (weighted_objective(q, x) > best_val) best = q;
        return best;
    }

    void polish(std::vector<double>& q) const {
        const double val_scale = 1.0 + std::abs(weighted_objective(q, x));
        for (int pass = 0; pass < 120; ++pass) {
            double gained = 0.0;
            gained += radial_push(q);
            gained += direction_sweep(q);
            if (gained <= 1e-13 * val_scale) break;
        }
        if (mean_constrained) {
            const double shift = weighted_mean(q, x) - 1.0;
            for (double& v : q) v -= shift;
            repair_toward_ones(spec, beta, q, x);
        }
    }

    // Scales the deviation from 1: Q(s) = 1 + (1+s)(Q - 1); objective is
    // linear in s, so push to the feasibility boundary when it gains.
    double radial_push(std::vector<double>& q) const {
        const std::size_t n = x.size();
        double gain_rate = 0.0;
        for (std::size_t i = 0; i < n; ++i) gain_rate += x.prob(i) * x.value(i) * (q[i] - 1.0);
        if (gain_rate <= 0.0) return 0.0;
        const std::vector<double> base = q;
        auto feas = [&](double s) {
            std::vector<double> trial(n);
            for (std::size_t i = 0; i < n; ++i) trial[i] = 1.0 + (1.0 + s) * (base[i] - 1.0);
            return divergence_of(spec, trial, x) <= beta;
        };
        const double s = max_feasible_step(feas, 1.0, 1e8);
        if (s <= 0.0) return 0.0;
        for (std::size_t i = 0; i < n; ++i) q[i] = 1.0 + (1.0 + s) * (base[i] - 1.0);
        return s * gain_rate;
    }

    // Maximal feasible travel along direction d from base, then the objective
    // there. The blend parameter below tilts d toward the pull-in direction
    // (1 - q), which strictly decreases the divergence and lifts coordinates
    // off domain edges, so the search can slide along a curved boundary and
    // never jams where phi turns infinite.
    double objective_after_travel(const std::vector<double>& base, const std::vector<double>& d,
                                  std::vector<double>* out) const {
        auto feas = [&](double s) {
            double div = 0.0;
            for (std::size_t i = 0; i < base.size(); ++i) {
                const ExtendedReal v = spec.phi(base[i] + s * d[i]);
                if (!v.is_finite()) return false;
                div += x.prob(i) * v.value();
            }
            return div <= beta;
        };
        const double s = max_feasible_step(feas, 1.0, 1e8);
        double obj = 0.0;
        for (std::size_t i = 0; i < base.size(); ++i) {
            const double v = base[i] + s * d[i];
            obj += x.prob(i) * x.value(i) * v;
            if (out) (*out)[i] = v;
        }
        return obj;
    }

    // One sweep of blended line searches. Directions: mean-preserving pair
    // exchanges for both envelopes, plus raw pair sums and single axes for the
    // unconstrained one. Each direction is blended with the pull-in direction
    // over theta in [0, 1.5] (theta > 1 tilts outward) and the blend angle is
    // chosen by golden section on the objective after maximal travel.
    double direction_sweep(std::vector<double>& q) const {
        const std::size_t n = x.size();
        double total = 0.0;
        std::vector<double> dir(n), trial(n);

        auto try_direction = [&](const std::vector<double>& d_raw) {
            const std::vector<double> base = q;
            const double before = weighted_objective(q, x);
            auto blended_value = [&](double theta) {
                for (std::size_t i = 0; i < n; ++i)
                    dir[i] = theta * d_raw[i] + (1.0 - theta) * (1.0 - base[i]);
                return -objective_after_travel(base, dir, nullptr);
            };
            // theta = 1 is the pure exchange; it sits on the scan grid and is
            // also compared directly because near-tied atoms make the gain a
            // needle-thin spike there.
            auto best = golden_min(blended_value, 0.0, 1.5, 1e-3, 13);
            const double pure = blended_value(1.0);
            if (pure < best.value) best = {1.0, pure};
            if (-best.value > before + 1e-15 * (1.0 + std::abs(before))) {
                for (std::size_t i = 0; i < n; ++i)
                    dir[i] = best.x * d_raw[i] + (1.0 - best.x) * (1.0 - base[i]);
                objective_after_travel(base, dir, &trial);
                q = trial;
                total += -best.value - before;
            }
        };

        // Gradient tilt: moves every coordinate at once, which pair exchanges
        // cannot imitate on a curved boundary. Components pointing out of the
        // domain at an edge are clipped, and the mean-constrained variant is
        // re-projected onto the hyperplane over the unclipped coordinates.
        try_direction(clipped_gradient(q));
        // Same gradient projected onto the tangent plane of the divergence
        // surface: the escape direction when the budget is tight and the raw
        // tilt immediately leaves the feasible set.
        try_direction(boundary_tangent(q));
        // Tangent step with retraction: the tangent exits a strictly curved
        // surface at second order (zero feasible travel), so step first and
        // pull back in afterwards.
        total += tangent_retraction_steps(q);
        // Multiplicative exponential tilt: additive moves crawl when the
        // weights span orders of magnitude; for entropy-type envelopes this
        // family contains the exact maximizer shape.
        total += geometric_tilt(q);

        std::vector<double> d(n, 0.0);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                for (int sign : {+1, -1}) {
                    std::fill(d.begin(), d.end(), 0.0);
                    d[i] = sign / x.prob(i);
                    d[j] = -sign / x.prob(j);
                    try_direction(d);
                    if (!mean_constrained) {
                        d[j] = sign / x.prob(j);
                        try_direction(d);
                    }
                }
            }
        }
        if (!mean_constrained) {
            for (std::size_t i = 0; i < n; ++i) {
                for (int sign : {+1, -1}) {
                    std::fill(d.begin(), d.end(), 0.0);
                    d[i] = sign / x.prob(i);
                    try_direction(d);
                }
            }
        }
        return total;
    }

    // Zeroes direction components that point out of dom(phi) at a pinned
    // coordinate, then (mean case) re-projects onto the hyperplane over the
    // surviving coordinates; repeats until stable.
    void clip_and_project(const std::vector<double>& q, std::vector<double>& d) const {
        const std::size_t n = x.size();
        std::vector<bool> clipped(n, false);
        for (std::size_t round = 0; round <= n; ++round) {
            if (mean_constrained) {
                double pd = 0.0, pw = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    if (!clipped[i]) {
                        pd += x.prob(i) * d[i];
                        pw += x.prob(i);
                    }
                if (pw > 0.0)
                    for (std::size_t i = 0; i < n; ++i)
                        if (!clipped[i]) d[i] -= pd / pw;
            }
            bool changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (clipped[i] || d[i] == 0.0) continue;
                const double eps = 1e-9 * (1.0 + std::abs(q[i]));
                const bool out_low = d[i] < 0.0 && !spec.phi(q[i] - eps).is_finite();
                const bool out_high = d[i] > 0.0 && !spec.phi(q[i] + eps).is_finite();
                if (out_low || out_high) {
                    d[i] = 0.0;
                    clipped[i] = true;
                    changed = true;
                }
            }
            if (!changed) break;
        }
    }

    std::vector<double> clipped_gradient(const std::vector<double>& q) const {
        std::vector<double> d(x.values());
        clip_and_project(q, d);
        return d;
    }

    double geometric_tilt(std::vector<double>& q) const {
        const std::size_t n = x.size();
        for (double v : q)
            if (v < 0.0) return 0.0; // negative weights: tilt family undefined
        const double before = weighted_objective(q, x);
        const std::vector<double> base = q;
        std::vector<double> trial(n);
        auto value_at = [&](double s) {
            for (std::size_t i = 0; i < n; ++i) {
                const double e = s * x.value(i);
                if (e > 600.0) return kInf;
                trial[i] = base[i] * std::exp(e);
            }
            if (mean_constrained) {
                const double m = weighted_mean(trial, x);
                if (!(m > 1e-300)) return kInf;
                for (double& v : trial) v /= m;
            }
            repair_toward_ones(spec, beta, trial, x);
            return -weighted_objective(trial, x);
        };
        const double spread = step_scale();
        const auto best = golden_min(value_at, -4.0 / spread, 4.0 / spread, 1e-12 / spread, 17);
        if (-best.value > before + 1e-15 * (1.0 + std::abs(before))) {
            value_at(best.x);
            q = trial;
            return -best.value - before;
        }
        return 0.0;
    }

    double step_scale() const { return 1.0 + std::abs(x.ess_sup()) + std::abs(x.ess_inf()); }

    // Minimal pull-in toward the all-ones vector restoring E[phi(Q)] <= beta.
    // Moving toward 1 is always domain-safe, and it preserves the mean when q
    // sits on the hyperplane.
    void retract(std::vector<double>& q) const {
        if (divergence_of(spec, q, x) <= beta) return;
        const std::vector<double> trial = q;
        auto infeasible_at = [&](double mu) {
            std::vector<double> point(trial.size());
            for (std::size_t i = 0; i < trial.size(); ++i)
                point[i] = trial[i] + mu * (1.0 - trial[i]);
            return divergence_of(spec, point, x) > beta;
        };
        // Smallest feasible mu: the largest infeasible mu bounds it from below.
        double mu = bisect_predicate(infeasible_at, 0.0, 1.0, 1e-13, 60);
        mu = std::min(1.0, mu + 1e-12);
        for (std::size_t i = 0; i < q.size(); ++i) q[i] = trial[i] + mu * (1.0 - trial[i]);
    }

    double tangent_retraction_steps(std::vector<double>& q) const {
        double total = 0.0;
        const double scale = 1.0 + std::abs(x.ess_sup()) + std::abs(x.ess_inf());
        for (int iter = 0; iter < 6; ++iter) {
            const auto d = boundary_tangent(q);
            double dn = 0.0;
            for (std::size_t i = 0; i < q.size(); ++i) dn += x.prob(i) * d[i] * d[i];
            if (dn <= 1e-16) break;
            const double before = weighted_objective(q, x);
            std::vector<double> best = q;
            double best_val = before;
            double s = scale / std::sqrt(dn);
            for (int halving = 0; halving < 24; ++halving, s *= 0.5) {
                std::vector<double> trial = q;
                for (std::size_t i = 0; i < q.size(); ++i) trial[i] += s * d[i];
                retract(trial);
                if (divergence_of(spec, trial, x) > beta) continue;
                const double val = weighted_objective(trial, x);
                if (val > best_val) {
                    best_val = val;
                    best = trial;
                    break;
                }
            }
            if (best_val <= before + 1e-15 * (1.0 + std::abs(before))) break;
            q = best;
            total += best_val - before;
        }
        return total;
    }

    std::vector<double> boundary_tangent(const std::vector<double>& q) const {
        const std::size_t n = x.size();
        std::vector<double> d(x.values());
        std::vector<double> nu(n, 0.0); // numeric dphi/dq, the surface normal
        for (std::size_t i = 0; i < n; ++i) {
            const double h = 1e-6 * (1.0 + std::abs(q[i]));
            const ExtendedReal at = spec.phi(q[i]);
            const ExtendedReal up = spec.phi(q[i] + h), dn = spec.phi(q[i] - h);
            if (up.is_finite() && dn.is_finite())
                nu[i] = (up.value() - dn.value()) / (2.0 * h);
            else if (up.is_finite() && at.is_finite())
                nu[i] = (up.value() - at.value()) / h; // one-sided at a domain edge
            else if (dn.is_finite() && at.is_finite())
                nu[i] = (at.value() - dn.value()) / h;
        }
        // Alternate the three projections (hyperplane, surface tangent, domain
        // clip) until stable; done once they no longer interfere.
        for (int round = 0; round < 8; ++round) {
            clip_and_project(q, d);
            std::vector<double> nu_eff = nu;
            for (std::size_t i = 0; i < n; ++i)
                if (d[i] == 0.0) nu_eff[i] = 0.0; // restrict to surviving coords
            if (mean_constrained) {
                double pn = 0.0, pw = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    if (d[i] != 0.0) {
                        pn += x.prob(i) * nu_eff[i];
                        pw += x.prob(i);
                    }
                if (pw > 0.0)
                    for (std::size_t i = 0; i < n; ++i)
                        if (d[i] != 0.0) nu_eff[i] -= pn / pw;
            }
            double gn = 0.0, nn = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                gn += x.prob(i) * d[i] * nu_eff[i];
                nn += x.prob(i) * nu_eff[i] * nu_eff[i];
            }
            if (nn <= 1e-14 || std::abs(gn) <= 1e-13 * (1.0 + nn)) break;
            for (std::size_t i = 0; i < n; ++i) d[i] -= gn / nn * nu_eff[i];
        }
        return d;
    }
};

inline RiskIdentifier make_identifier(const DivergenceSpec& spec, const std::vector<double>& q,
                                      const EmpiricalDistribution& x) {
    RiskIdentifier id;
    id.weights = q;
    id.mean_weight = weighted_mean(q, x);
    id.divergence_value = divergence_of(spec, q, x);
    id.attained_objective = weighted_objective(q, x);
    return id;
}

inline void check_oracle_limits(const DivergenceSpec& spec, double beta,
                                const EmpiricalDistribution& x) {
    require_beta(beta);
    (void)spec;
    if (x.size() > kOracleAtomLimit)
        throw DomainError("dual oracle is limited to 8 atoms by design");
}

} // namespace detail

// sup E[XQ] over {E[Q] = 1, E[phi(Q)] <= beta}.
inline DualSolution dual_risk_oracle(const DivergenceSpec& spec, double beta,
                                     const EmpiricalDistribution& x) {
    detail::check_oracle_limits(spec, beta, x);
    detail::EnvelopeOracle oracle{spec, beta, x, /*mean_constrained=*/true};
    const auto q = oracle.solve();
    auto id = detail::make_identifier(spec, q, x);
    return {id.attained_objective, std::move(id)};
}

// sup E[XQ] over {E[phi(Q)] <= beta}; no mean constraint.
inline DualSolution dual_regret_oracle(const DivergenceSpec& spec, double beta,
                                       const EmpiricalDistribution& x) {
    detail::check_oracle_limits(spec, beta, x);
    detail::EnvelopeOracle oracle{spec, beta, x, /*mean_constrained=*/false};
    const auto q = oracle.solve();
    auto id = detail::make_identifier(spec, q, x);
    return {id.attained_objective, std::move(id)};
}

// sup E[X(Q-1)] over the mean-constrained envelope: risk value less E[X].
inline DualSolution dual_deviation_oracle(const DivergenceSpec& spec, double beta,
                                          const EmpiricalDistribution& x) {
    auto sol = dual_risk_oracle(spec, beta, x);
    sol.value -= x.mean();
    return sol;
}

// sup E[X(Q-1)] over the unconstrained envelope: regret value less E[X].
inline DualSolution dual_error_oracle(const DivergenceSpec& spec, double beta,
                                      const EmpiricalDistribution& x) {
    auto sol = dual_regret_oracle(spec, beta, x);
    sol.value -= x.mean();
    return sol;
}

namespace detail {

struct KinkGroup {
    std::vector<std::size_t> atoms;
    std::vector<double> lo, hi; // per-atom selection interval
    double mean_span() const {
        double s = 0.0;
        for (std::size_t k = 0; k < atoms.size(); ++k) s += hi[k] - lo[k];
        return s;
    }
};

// Per-atom subgradient selection at z_i = (x_i - c)/t. Atoms within x-unit
// tolerance of a conjugate kink are grouped by kink level; each group gets a
// single interpolation parameter, fixed afterwards by the envelope
// constraints. Intervals are capped by per-atom feasibility
// p_i phi(q_i) <= beta, which bounds any admissible identifier coordinate.
struct Selection {
    std::vector<double> weights;   // non-kink atoms resolved, kink atoms at lo
    std::vector<KinkGroup> groups; // ordered by kink level
};

inline Selection select_subgradients(const DivergenceSpec& spec, double beta,
                                     const EmpiricalDistribution& x, double c, double t) {
    const double xtol =
        1e-7 * (1.0 + std::max(std::abs(x.ess_sup()), std::abs(x.ess_inf())) + std::abs(c));
    const auto kinks = spec.conjugate_kinks();
    Selection sel;
    sel.weights.assign(x.size(), 0.0);
    sel.groups.resize(kinks.size());

    for (std::size_t i = 0; i < x.size(); ++i) {
        int group = -1;
        for (std::size_t k = 0; k < kinks.size(); ++k)
            if (std::abs(x.value(i) - c - t * kinks[k]) <= xtol) {
                group = static_cast<int>(k);
                break;
            }
        if (group < 0) {
            const double z = (x.value(i) - c) / t;
            const auto g = spec.conjugate_subgradient(z);
            sel.weights[i] = 0.5 * (g.lower + g.upper); // equal at smooth points
            continue;
        }
        const auto g = spec.conjugate_subgradient(kinks[static_cast<std::size_t>(group)]);
        const auto [qlo, qhi] = spec.feasible_weight_range(beta / x.prob(i));
        auto& kg = sel.groups[static_cast<std::size_t>(group)];
        kg.atoms.push_back(i);
        kg.lo.push_back(std::max(g.lower, qlo));
        kg.hi.push_back(std::min(g.upper, qhi));
        sel.weights[i] = kg.lo.back();
    }
    std::erase_if(sel.groups, [](const KinkGroup& g) { return g.atoms.empty(); });
    return sel;
}

inline void apply_group(const KinkGroup& g, double lambda, std::vector<double>& w) {
    for (std::size_t k = 0; k < g.atoms.size(); ++k)
        w[g.atoms[k]] = g.lo[k] + lambda * (g.hi[k] - g.lo[k]);
}

} // namespace detail

namespace detail {

// Midpoint-selection mean E[Q(c)] as a function of the offset; nonincreasing
// in c since the conjugate subgradient is monotone and z = (x - c)/t.
inline double midpoint_mean(const DivergenceSpec& spec, const EmpiricalDistribution& x, double c,
                            double t) {
    double mean = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double z = (x.value(i) - c) / t;
        if (!spec.conjugate(z).is_finite()) return z > 0.0 ? kInf : -kInf;
        const auto g = spec.conjugate_subgradient(z);
        mean += x.prob(i) * 0.5 * (std::max(g.lower, -1e12) + std::min(g.upper, 1e12));
    }
    return mean;
}

// Re-tunes the offset to first-order stationarity E[Q] = 1 at the given
// scale, absorbing slack left by the derivative-free primal search.
inline double repair_offset(const DivergenceSpec& spec, const EmpiricalDistribution& x, double c,
                            double t) {
    const double span = 0.1 * (1.0 + x.ess_sup() - x.ess_inf());
    return bisect_root([&](double cc) { return midpoint_mean(spec, x, cc, t) - 1.0; }, c - span,
                       c + span, 1e-15 * (1.0 + std::abs(c)));
}

} // namespace detail

// Risk identifier from the risk-problem optimizers: Q_i in the conjugate
// subgradient at X_i / t - c_over_t. Kink selections are pinned by E[Q] = 1
// (one group) or by E[Q] = 1 together with dual attainment E[XQ] = R (two
// groups). Throws KinkResolutionError when no selection meets the envelope
// constraints within 1e-6, which signals inaccurate primal optimizers.
inline RiskIdentifier risk_identifier_from_primal(const DivergenceSpec& spec, double beta,
                                                  const EmpiricalDistribution& x, double c_over_t,
                                                  double t, bool allow_offset_repair = true) {
    require_beta(beta);
    const double c = c_over_t * t;

    // Boundary attainment: a scale pinned to its positivity floor with a
    // kink-free conjugate means the infimum is approached as t -> 0 and the
    // risk degenerates to the essential supremum. The conjugate argument
    // diverges there, so the identifier is taken in the limit instead:
    // weight 1/P(argmax) on the maximal atoms, zero elsewhere.
    if (t <= 2.0 * detail::kTFloor && spec.conjugate_kinks().empty()) {
        const double sup = x.ess_sup();
        const double xtol = 1e-9 * (1.0 + std::abs(sup));
        double mass = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x.value(i) >= sup - xtol) mass += x.prob(i);
        std::vector<double> w(x.size(), 0.0);
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x.value(i) >= sup - xtol) w[i] = 1.0 / mass;
        auto id = detail::make_identifier(spec, w, x);
        if (id.divergence_value > beta + 1e-6)
            throw KinkResolutionError(spec.name() +
                                      ": supremum-limit identifier exceeds the radius");
        return id;
    }

    auto sel = detail::select_subgradients(spec, beta, x, c, t);
    auto& w = sel.weights;

    const double target_mean = 1.0;
    if (!sel.groups.empty()) {
        // Residuals are linear in the group parameters; solve directly.
        if (sel.groups.size() == 1) {
            const auto& g = sel.groups[0];
            double base = detail::weighted_mean(w, x);
            double span = 0.0;
            for (std::size_t k = 0; k < g.atoms.size(); ++k)
                span += x.prob(g.atoms[k]) * (g.hi[k] - g.lo[k]);
            const double lam = span > 0.0 ? (target_mean - base) / span : 0.0;
            if (lam < -1e-6 || lam > 1.0 + 1e-6)
                throw KinkResolutionError(spec.name() + ": no kink selection reaches E[Q] = 1");
            detail::apply_group(g, std::clamp(lam, 0.0, 1.0), w);
        } else {
            // Two kink levels: match the mean and the attained objective.
            const double risk_value = detail::risk_objective(spec, beta, x, c, t);
            double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;
            for (std::size_t k = 0; k < sel.groups[0].atoms.size(); ++k) {
                const auto i = sel.groups[0].atoms[k];
                const double d = x.prob(i) * (sel.groups[0].hi[k] - sel.groups[0].lo[k]);
                a11 += d;
                a21 += d * x.value(i);
            }
            for (std::size_t k = 0; k < sel.groups[1].atoms.size(); ++k) {
                const auto i = sel.groups[1].atoms[k];
                const double d = x.prob(i) * (sel.groups[1].hi[k] - sel.groups[1].lo[k]);
                a12 += d;
                a22 += d * x.value(i);
            }
            const double b1 = target_mean - detail::weighted_mean(w, x);
            const double b2 = risk_value - detail::weighted_objective(w, x);
            const double det = a11 * a22 - a12 * a21;
            double l1, l2;
            if (std::abs(det) > 1e-14 * (1.0 + std::abs(a11 * a22))) {
                l1 = (b1 * a22 - a12 * b2) / det;
                l2 = (a11 * b2 - b1 * a21) / det;
            } else {
                l1 = l2 = a11 + a12 > 0.0 ? b1 / (a11 + a12) : 0.0;
            }
            if (l1 < -1e-5 || l1 > 1.0 + 1e-5 || l2 < -1e-5 || l2 > 1.0 + 1e-5)
                throw KinkResolutionError(spec.name() + ": kink selection outside [0,1]");
            detail::apply_group(sel.groups[0], std::clamp(l1, 0.0, 1.0), w);
            detail::apply_group(sel.groups[1], std::clamp(l2, 0.0, 1.0), w);
        }
    }

    auto id = detail::make_identifier(spec, w, x);
    if (std::abs(id.mean_weight - 1.0) > 1e-6) {
        // A smooth conjugate leaves no kink freedom, so residual mean error is
        // optimizer slack in the offset; re-tune it once and retry.
        if (allow_offset_repair) {
            const double repaired = detail::repair_offset(spec, x, c, t);
            return risk_identifier_from_primal(spec, beta, x, repaired / t, t,
                                               /*allow_offset_repair=*/false);
        }
        throw KinkResolutionError(spec.name() + ": identifier mean off by " +
                                  std::to_string(id.mean_weight - 1.0));
    }
    return id;
}

// Error identifier: Q_i in the conjugate subgradient at X_i / t. Kink groups
// are pinned by dual attainment E[XQ] = V; when the objective is insensitive
// to the selection the mean residual E[Q] - 1 is used instead, which is the
// constraint that emerges automatically at the statistic.
inline RiskIdentifier error_identifier_from_primal(const DivergenceSpec& spec, double beta,
                                                   const EmpiricalDistribution& x, double t) {
    require_beta(beta);
    auto sel = detail::select_subgradients(spec, beta, x, 0.0, t);
    auto& w = sel.weights;

    if (!sel.groups.empty()) {
        const double regret_value = detail::risk_objective(spec, beta, x, 0.0, t);
        double obj_span = 0.0, mean_span = 0.0;
        for (const auto& g : sel.groups)
            for (std::size_t k = 0; k < g.atoms.size(); ++k) {
                const auto i = g.atoms[k];
                obj_span += x.prob(i) * x.value(i) * (g.hi[k] - g.lo[k]);
                mean_span += x.prob(i) * (g.hi[k] - g.lo[k]);
            }
        const double obj_base = detail::weighted_objective(w, x);
        const double mean_base = detail::weighted_mean(w, x);
        double lam;
        if (std::abs(obj_span) > 1e-10 * (1.0 + std::abs(regret_value)))
            lam = (regret_value - obj_base) / obj_span;
        else if (mean_span > 0.0)
            lam = (1.0 - mean_base) / mean_span;
        else
            lam = 0.0;
        lam = std::clamp(lam, 0.0, 1.0);
        for (const auto& g : sel.groups) detail::apply_group(g, lam, w);
    }
    return detail::make_identifier(spec, w, x);
}

} // namespace phiquad
