#pragma once

#include <string>

namespace phiquad {

// The five quadrangle values for one (divergence, beta, X) triple, plus the
// optimizers of the risk problem. optimal_c is the offset in outcome units
// (the statistic scale); the conjugate is evaluated at (X - optimal_c) / optimal_t,
// so the risk-scale multiplier equals optimal_c / optimal_t.
struct QuadrangleResult {
    double risk = 0.0;
    double deviation = 0.0;
    double regret = 0.0;
    double error = 0.0;
    double statistic_lo = 0.0;
    double statistic_hi = 0.0;
    double optimal_t = 0.0;
    double optimal_c = 0.0;
    double beta = 0.0;
    std::string spec_name;

    double c_over_t() const { return optimal_c / optimal_t; }
    double statistic_mid() const { return 0.5 * (statistic_lo + statistic_hi); }
};

} // namespace phiquad
