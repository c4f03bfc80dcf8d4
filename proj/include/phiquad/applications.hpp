#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "phiquad/closed_form.hpp"
#include "phiquad/divergence.hpp"
#include "phiquad/dual.hpp"
#include "phiquad/empirical.hpp"
#include "phiquad/errors.hpp"
#include "phiquad/primal.hpp"

// The three application solvers: portfolio loss minimization over the budget
// hyperplane, margin classification with quadratic regularization, and linear
// regression in both the error-minimization and deviation-minimization
// routes. All of them minimize a quadrangle element of an affine image of the
// data, so the outer problems are convex; subgradients in the decision
// variables come from the risk identifier of the current scalar loss.

namespace phiquad {

struct PortfolioProblem {
    std::vector<std::vector<double>> losses; // scenarios x assets
    std::vector<double> probs;               // empty means equiprobable
    DivergenceSpec spec;
    double beta = 1.0;
    bool long_only = false;
};

struct ClassificationProblem {
    std::vector<std::vector<double>> features; // n x d
    std::vector<int> labels;                   // +1 / -1
    DivergenceSpec spec;
    double beta = 1.0;
    double reg_weight = 1.0; // coefficient on ||w||^2
};

struct RegressionProblem {
    std::vector<std::vector<double>> regressors; // n x d
    std::vector<double> response;
    DivergenceSpec spec;
    double beta = 1.0;
};

struct SolverDiagnostics {
    int iterations = 0;
    double final_step = 0.0;
    bool converged = false;
};

struct SolutionReport {
    std::vector<double> decision;
    double intercept = 0.0; // b for classification, offset C for regression
    double objective = 0.0;
    std::vector<double> weights; // per-sample identifier
    SolverDiagnostics diagnostics;
};

struct RegressionSolution {
    SolutionReport error_route;     // joint minimization over (coefficients, C)
    SolutionReport deviation_route; // coefficients only; C from the statistic
    double statistic_lo = 0.0;      // statistic interval of the route-B residual
    double statistic_hi = 0.0;
};

namespace detail {

inline std::vector<double> uniform_probs(std::size_t n) {
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

// Subgradient descent with iterate averaging, then a coordinate pattern
// search with shrinking steps (axis and diagonal directions). The pattern
// stage needs only objective values, so it survives the kinks where the
// identifier-based subgradient is ambiguous.
template <typename Objective, typename Subgradient, typename Project>
SolverDiagnostics minimize_convex(std::vector<double>& v, Objective&& objective,
                                  Subgradient&& subgradient, Project&& project, int iter_cap) {
    const std::size_t d = v.size();
    project(v);
    double best_val = objective(v);
    std::vector<double> best = v;

    std::vector<double> g(d, 0.0);
    subgradient(v, g);
    double gnorm0 = 0.0;
    for (double gi : g) gnorm0 += gi * gi;
    gnorm0 = std::sqrt(gnorm0);
    double vscale = 1.0;
    for (double vi : v) vscale = std::max(vscale, std::abs(vi));
    const double step0 = gnorm0 > 0.0 ? 0.5 * vscale / gnorm0 : 0.0;

    std::vector<double> avg(v);
    int avg_count = 1;
    int iters = 0;
    for (int k = 1; k <= iter_cap && step0 > 0.0; ++k, ++iters) {
        subgradient(v, g);
        const double s = step0 / std::sqrt(static_cast<double>(k));
        for (std::size_t j = 0; j < d; ++j) v[j] -= s * g[j];
        project(v);
        if (k > iter_cap / 2) {
            ++avg_count;
            for (std::size_t j = 0; j < d; ++j)
                avg[j] += (v[j] - avg[j]) / static_cast<double>(avg_count);
        }
        if (k % 16 == 0) {
            const double val = objective(v);
            if (val < best_val) {
                best_val = val;
                best = v;
            }
        }
    }
    project(avg);
    if (objective(avg) < best_val) {
        best_val = objective(avg);
        best = avg;
    }
    v = best;

    // Pattern polish: axis and two-coordinate diagonal moves.
    double step = 0.05 * vscale;
    const double step_floor = 1e-10 * vscale;
    int polish_iters = 0;
    while (step > step_floor && polish_iters < 4000) {
        bool improved = false;
        auto attempt = [&](std::vector<double> cand) {
            project(cand);
            const double val = objective(cand);
            if (val < best_val - 1e-15 * (1.0 + std::abs(best_val))) {
                best_val = val;
                v = cand;
                improved = true;
            }
        };
        for (std::size_t a = 0; a < d; ++a) {
            for (double sgn : {+1.0, -1.0}) {
                std::vector<double> cand = v;
                cand[a] += sgn * step;
                attempt(std::move(cand));
                ++polish_iters;
            }
        }
        for (std::size_t a = 0; a + 1 < d; ++a) {
            for (std::size_t b = a + 1; b < d; ++b) {
                for (double sa : {+1.0, -1.0}) {
                    for (double sb : {+1.0, -1.0}) {
                        std::vector<double> cand = v;
                        cand[a] += sa * step;
                        cand[b] += sb * step;
                        attempt(std::move(cand));
                        ++polish_iters;
                    }
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return {iters + polish_iters, step, step <= step_floor};
}

struct LossEval {
    QuadrangleResult quad;
    EmpiricalDistribution dist;
};

inline LossEval eval_loss(const DivergenceSpec& spec, double beta, std::vector<double> values,
                          const std::vector<double>& probs) {
    EmpiricalDistribution dist(std::move(values), probs);
    return {closed_form_quadrangle(spec, beta, dist), std::move(dist)};
}

// Identifier weights for the risk of the given scalar loss; falls back to the
// all-ones vector for a constant loss.
inline std::vector<double> risk_weights(const DivergenceSpec& spec, double beta,
                                        const LossEval& ev) {
    if (ev.dist.is_constant()) return std::vector<double>(ev.dist.size(), 1.0);
    const auto id = risk_identifier_from_primal(spec, beta, ev.dist, ev.quad.c_over_t(),
                                                ev.quad.optimal_t);
    return id.weights;
}

} // namespace detail

inline SolutionReport solve_portfolio(const PortfolioProblem& problem, int iter_cap = 20000) {
    const std::size_t n = problem.losses.size();
    if (n < 2) throw DegenerateInput("portfolio: need at least two scenarios");
    const std::size_t d = problem.losses.front().size();
    if (d < 2) throw DegenerateInput("portfolio: need at least two assets");
    const auto probs = problem.probs.empty() ? detail::uniform_probs(n) : problem.probs;

    auto portfolio_loss = [&](const std::vector<double>& w) {
        std::vector<double> values(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) values[i] += problem.losses[i][j] * w[j];
        return values;
    };
    auto objective = [&](const std::vector<double>& w) {
        return detail::eval_loss(problem.spec, problem.beta, portfolio_loss(w), probs).quad.risk;
    };
    auto subgradient = [&](const std::vector<double>& w, std::vector<double>& g) {
        const auto ev = detail::eval_loss(problem.spec, problem.beta, portfolio_loss(w), probs);
        const auto q = detail::risk_weights(problem.spec, problem.beta, ev);
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) g[j] += probs[i] * q[i] * problem.losses[i][j];
    };
    auto project = [&](std::vector<double>& w) {
        for (int round = 0; round < (problem.long_only ? 16 : 1); ++round) {
            double sum = 0.0;
            for (double wi : w) sum += wi;
            const double shift = (sum - 1.0) / static_cast<double>(d);
            for (double& wi : w) wi -= shift;
            if (!problem.long_only) break;
            bool clipped = false;
            for (double& wi : w)
                if (wi < 0.0) {
                    wi = 0.0;
                    clipped = true;
                }
            if (!clipped) break;
        }
    };

    SolutionReport report;
    report.decision.assign(d, 1.0 / static_cast<double>(d));
    report.diagnostics =
        detail::minimize_convex(report.decision, objective, subgradient, project, iter_cap);
    const auto ev = detail::eval_loss(problem.spec, problem.beta, portfolio_loss(report.decision), probs);
    report.objective = ev.quad.risk;
    report.weights = detail::risk_weights(problem.spec, problem.beta, ev);
    return report;
}

inline SolutionReport solve_classification(const ClassificationProblem& problem,
                                           int iter_cap = 20000) {
    const std::size_t n = problem.features.size();
    if (n == 0 || problem.labels.size() != n)
        throw DegenerateInput("classification: features/labels size mismatch");
    const std::size_t d = problem.features.front().size();
    bool has_pos = false, has_neg = false;
    for (int y : problem.labels) (y > 0 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) throw DegenerateInput("classification: both labels required");
    const auto probs = detail::uniform_probs(n);

    // Decision vector layout: w (d entries) then the threshold b.
    auto negative_margin = [&](const std::vector<double>& v) {
        std::vector<double> values(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double score = -v[d];
            for (std::size_t j = 0; j < d; ++j) score += problem.features[i][j] * v[j];
            values[i] = -static_cast<double>(problem.labels[i]) * score;
        }
        return values;
    };
    auto reg_term = [&](const std::vector<double>& v) {
        double r = 0.0;
        for (std::size_t j = 0; j < d; ++j) r += v[j] * v[j];
        return problem.reg_weight * r;
    };
    auto objective = [&](const std::vector<double>& v) {
        return detail::eval_loss(problem.spec, problem.beta, negative_margin(v), probs).quad.risk +
               reg_term(v);
    };
    auto subgradient = [&](const std::vector<double>& v, std::vector<double>& g) {
        const auto ev = detail::eval_loss(problem.spec, problem.beta, negative_margin(v), probs);
        const auto q = detail::risk_weights(problem.spec, problem.beta, ev);
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double y = problem.labels[i];
            for (std::size_t j = 0; j < d; ++j)
                g[j] += probs[i] * q[i] * (-y * problem.features[i][j]);
            g[d] += probs[i] * q[i] * y;
        }
        for (std::size_t j = 0; j < d; ++j) g[j] += 2.0 * problem.reg_weight * v[j];
    };
    auto project = [](std::vector<double>&) {};

    SolutionReport report;
    std::vector<double> v(d + 1, 0.0);
    v[0] = 1e-3; // break the all-zero saddle of the margin
    report.diagnostics = detail::minimize_convex(v, objective, subgradient, project, iter_cap);
    report.decision.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(d));
    report.intercept = v[d];
    const auto ev = detail::eval_loss(problem.spec, problem.beta, negative_margin(v), probs);
    report.objective = ev.quad.risk + reg_term(v);
    report.weights = detail::risk_weights(problem.spec, problem.beta, ev);
    return report;
}

inline RegressionSolution solve_regression(const RegressionProblem& problem, int iter_cap = 20000) {
    const std::size_t n = problem.regressors.size();
    if (n == 0 || problem.response.size() != n)
        throw DegenerateInput("regression: regressors/response size mismatch");
    const std::size_t d = problem.regressors.front().size();
    if (n <= d) throw DegenerateInput("regression: need more samples than regressors");
    const auto probs = detail::uniform_probs(n);

    auto residual = [&](const std::vector<double>& coef, double c) {
        std::vector<double> values(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double fit = c;
            for (std::size_t j = 0; j < d; ++j) fit += problem.regressors[i][j] * coef[j];
            values[i] = problem.response[i] - fit;
        }
        return values;
    };

    RegressionSolution sol;

    {
        // Route A: error minimization over (coefficients, C).
        auto objective = [&](const std::vector<double>& v) {
            const std::vector<double> coef(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(d));
            return detail::eval_loss(problem.spec, problem.beta, residual(coef, v[d]), probs)
                .quad.error;
        };
        auto subgradient = [&](const std::vector<double>& v, std::vector<double>& g) {
            const std::vector<double> coef(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(d));
            const auto ev =
                detail::eval_loss(problem.spec, problem.beta, residual(coef, v[d]), probs);
            std::vector<double> q(n, 1.0);
            if (!ev.dist.is_constant())
                q = error_identifier_from_primal(problem.spec, problem.beta, ev.dist,
                                                 ev.quad.optimal_t)
                        .weights;
            std::fill(g.begin(), g.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double wfac = probs[i] * (q[i] - 1.0);
                for (std::size_t j = 0; j < d; ++j) g[j] -= wfac * problem.regressors[i][j];
                g[d] -= wfac;
            }
        };
        auto project = [](std::vector<double>&) {};
        std::vector<double> v(d + 1, 0.0);
        sol.error_route.diagnostics =
            detail::minimize_convex(v, objective, subgradient, project, iter_cap);
        sol.error_route.decision.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(d));
        sol.error_route.intercept = v[d];
        const auto ev = detail::eval_loss(problem.spec, problem.beta,
                                          residual(sol.error_route.decision, v[d]), probs);
        sol.error_route.objective = ev.quad.error;
        sol.error_route.weights =
            ev.dist.is_constant()
                ? std::vector<double>(n, 1.0)
                : error_identifier_from_primal(problem.spec, problem.beta, ev.dist,
                                               ev.quad.optimal_t)
                      .weights;
    }

    {
        // Route B: deviation minimization over coefficients, then the offset
        // from the statistic of the centered residual.
        auto objective = [&](const std::vector<double>& coef) {
            return detail::eval_loss(problem.spec, problem.beta, residual(coef, 0.0), probs)
                .quad.deviation;
        };
        auto subgradient = [&](const std::vector<double>& coef, std::vector<double>& g) {
            const auto ev =
                detail::eval_loss(problem.spec, problem.beta, residual(coef, 0.0), probs);
            const auto q = detail::risk_weights(problem.spec, problem.beta, ev);
            std::fill(g.begin(), g.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double wfac = probs[i] * (q[i] - 1.0);
                for (std::size_t j = 0; j < d; ++j) g[j] -= wfac * problem.regressors[i][j];
            }
        };
        auto project = [](std::vector<double>&) {};
        std::vector<double> coef(d, 0.0);
        sol.deviation_route.diagnostics =
            detail::minimize_convex(coef, objective, subgradient, project, iter_cap);
        sol.deviation_route.decision = coef;
        const auto ev =
            detail::eval_loss(problem.spec, problem.beta, residual(coef, 0.0), probs);
        sol.deviation_route.objective = ev.quad.deviation;
        sol.statistic_lo = ev.quad.statistic_lo;
        sol.statistic_hi = ev.quad.statistic_hi;
        sol.deviation_route.intercept = ev.quad.statistic_mid();
        sol.deviation_route.weights = detail::risk_weights(problem.spec, problem.beta, ev);
    }
    return sol;
}

} // namespace phiquad
