#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "phiquad/detail/scalar_opt.hpp"
#include "phiquad/errors.hpp"

namespace phiquad {

// Random variable on a finite sample space: atom outcomes paired with
// strictly positive probabilities summing to one.
class EmpiricalDistribution {
  public:
    EmpiricalDistribution(std::vector<double> values, std::vector<double> probs)
        : values_(std::move(values)), probs_(std::move(probs)) {
        validate();
    }

    static EmpiricalDistribution uniform(std::vector<double> values) {
        const std::size_t n = values.size();
        if (n == 0) throw DegenerateInput("distribution needs at least one atom");
        return EmpiricalDistribution(std::move(values), std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    std::size_t size() const { return values_.size(); }
    double value(std::size_t i) const { return values_[i]; }
    double prob(std::size_t i) const { return probs_[i]; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& probs() const { return probs_; }

    double mean() const {
        double s = 0.0;
        for (std::size_t i = 0; i < size(); ++i) s += probs_[i] * values_[i];
        return s;
    }

    // Population standard deviation.
    double stdev() const {
        const double m = mean();
        double s = 0.0;
        for (std::size_t i = 0; i < size(); ++i) s += probs_[i] * (values_[i] - m) * (values_[i] - m);
        return std::sqrt(std::max(s, 0.0));
    }

    // sqrt(E[X^2]).
    double l2_norm() const {
        double s = 0.0;
        for (std::size_t i = 0; i < size(); ++i) s += probs_[i] * values_[i] * values_[i];
        return std::sqrt(s);
    }

    double ess_sup() const { return *std::max_element(values_.begin(), values_.end()); }
    double ess_inf() const { return *std::min_element(values_.begin(), values_.end()); }

    bool is_constant() const {
        const double span = ess_sup() - ess_inf();
        return span <= 1e-14 * (1.0 + std::abs(ess_sup()) + std::abs(ess_inf()));
    }

    EmpiricalDistribution shifted(double c) const {
        std::vector<double> v = values_;
        for (double& x : v) x -= c;
        return EmpiricalDistribution(std::move(v), probs_);
    }

    template <typename F>
    double expectation_of(F&& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < size(); ++i) s += probs_[i] * f(values_[i]);
        return s;
    }

    // E[max(X, 0)] and E[max(-X, 0)].
    double mean_positive_part() const {
        double s = 0.0;
        for (std::size_t i = 0; i < size(); ++i) s += probs_[i] * std::max(values_[i], 0.0);
        return s;
    }
    double mean_negative_part() const {
        double s = 0.0;
        for (std::size_t i = 0; i < size(); ++i) s += probs_[i] * std::max(-values_[i], 0.0);
        return s;
    }

  private:
    void validate() const {
        if (values_.empty() || values_.size() != probs_.size())
            throw DegenerateInput("distribution: values and probs must have equal length >= 1");
        double total = 0.0;
        for (double p : probs_) {
            if (!(p > 0.0)) throw DegenerateInput("distribution: probabilities must be strictly positive");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw DegenerateInput("distribution: probabilities must sum to 1 within 1e-12");
        for (double v : values_)
            if (!std::isfinite(v)) throw DegenerateInput("distribution: atom values must be finite");
    }

    std::vector<double> values_;
    std::vector<double> probs_;
};

namespace detail {

// Atoms sorted ascending with cumulative probabilities from below.
struct SortedAtoms {
    std::vector<double> values;
    std::vector<double> probs;
    std::vector<double> cum; // cum[i] = P(X <= values[i])
};

inline SortedAtoms sort_atoms(const EmpiricalDistribution& x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x.value(a) < x.value(b); });
    SortedAtoms s;
    s.values.reserve(x.size());
    s.probs.reserve(x.size());
    s.cum.reserve(x.size());
    double running = 0.0;
    for (std::size_t i : idx) {
        s.values.push_back(x.value(i));
        s.probs.push_back(x.prob(i));
        running += x.prob(i);
        s.cum.push_back(running);
    }
    s.cum.back() = 1.0;
    return s;
}

} // namespace detail

// Lower (left-continuous) alpha-quantile: inf{x : P(X <= x) >= alpha}.
// alpha = 0 returns the essential infimum.
inline double value_at_risk(const EmpiricalDistribution& x, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("value_at_risk: alpha must be in [0,1)");
    if (alpha == 0.0) return x.ess_inf();
    const auto s = detail::sort_atoms(x);
    for (std::size_t i = 0; i < s.values.size(); ++i)
        if (s.cum[i] >= alpha - 1e-12) return s.values[i];
    return s.values.back();
}

// Argmin interval of C + (1-alpha)^-1 E[(X-C)+]: a single atom, or the span
// between consecutive atoms when alpha falls exactly on a cumulative boundary.
inline std::pair<double, double> value_at_risk_interval(const EmpiricalDistribution& x, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw DomainError("value_at_risk_interval: alpha must be in [0,1)");
    if (alpha == 0.0) return {x.ess_inf(), x.ess_inf()};
    const auto s = detail::sort_atoms(x);
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (s.cum[i] >= alpha - 1e-12) {
            if (std::abs(s.cum[i] - alpha) <= 1e-12 && i + 1 < s.values.size())
                return {s.values[i], s.values[i + 1]};
            return {s.values[i], s.values[i]};
        }
    }
    return {s.values.back(), s.values.back()};
}

// Rockafellar-Uryasev value by the exact sorted-atom formula: the mean of the
// worst (1-alpha) probability mass, splitting the boundary atom fractionally.
inline double cvar(const EmpiricalDistribution& x, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("cvar: alpha must be in [0,1)");
    const auto s = detail::sort_atoms(x);
    const double tail = 1.0 - alpha;
    double remaining = tail;
    double acc = 0.0;
    for (std::size_t i = s.values.size(); i-- > 0 && remaining > 1e-15;) {
        const double take = std::min(s.probs[i], remaining);
        acc += take * s.values[i];
        remaining -= take;
    }
    return acc / tail;
}

// Unique root of q E[(X-C)+] = (1-q) E[(X-C)-].
inline double expectile(const EmpiricalDistribution& x, double q) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("expectile: q must be in (0,1)");
    if (x.is_constant()) return x.value(0);
    auto g = [&](double c) {
        double pos = 0.0, neg = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x.value(i) - c;
            pos += x.prob(i) * std::max(d, 0.0);
            neg += x.prob(i) * std::max(-d, 0.0);
        }
        return q * pos - (1.0 - q) * neg;
    };
    const double lo = x.ess_inf(), hi = x.ess_sup();
    return detail::bisect_root(g, lo, hi, 1e-14 * (1.0 + std::abs(lo) + std::abs(hi)));
}

// Root q of ||(X-q)+||_1 / ||(X-q)+||_2 = 1 - alpha, with L^p norms under the
// atom probabilities. The ratio decreases from 1 (q -> -inf) toward
// sqrt(P(X = ess sup)) (q -> ess sup); when the target is below that limit the
// minimizer sits at the essential supremum and that value is returned.
inline double second_order_quantile(const EmpiricalDistribution& x, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("second_order_quantile: alpha must be in (0,1)");
    if (x.is_constant()) throw DegenerateInput("second_order_quantile: constant input");
    const double target = 1.0 - alpha;
    const double sup = x.ess_sup();
    auto ratio = [&](double q) {
        double l1 = 0.0, l2sq = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = std::max(x.value(i) - q, 0.0);
            l1 += x.prob(i) * d;
            l2sq += x.prob(i) * d * d;
        }
        if (l2sq <= 0.0) return 0.0;
        return l1 / std::sqrt(l2sq);
    };
    // Expand the left end until the (decreasing) ratio brackets the target.
    double lo = x.ess_inf() - 1.0 - (sup - x.ess_inf());
    for (int i = 0; i < 80 && ratio(lo) < target; ++i)
        lo = sup - 2.0 * (sup - lo);
    const double hi = sup - 1e-12 * (1.0 + std::abs(sup));
    // Strictly above the target everywhere means the minimizer collapses to
    // the essential supremum; at a flat plateau the bisection below lands on
    // an (equally optimal) interior point instead.
    if (ratio(hi) > target + 1e-9) return sup;
    return detail::bisect_root([&](double q) { return ratio(q) - target; }, lo, hi,
                               1e-14 * (1.0 + std::abs(lo) + std::abs(hi)));
}

} // namespace phiquad
