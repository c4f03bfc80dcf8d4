#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phiquad/errors.hpp"
#include "phiquad/extended_real.hpp"

namespace phiquad {

enum class DivergenceKind {
    Kl,                       // x ln x - x + 1 on x >= 0
    Tvd,                      // |x - 1| on x >= 0
    TvdExtended,              // |x - 1| on R
    PearsonChi2,              // (x - 1)^2 on x >= 0
    PearsonChi2Extended,      // (x - 1)^2 on R
    IndicatorCvar,            // 0 on [0, (1-alpha)^-1], +inf elsewhere
    GeneralizedChi2Expectile, // (x-1)^2 / q above 1, (x-1)^2 / (1-q) below
    IntervalIndicator,        // 0 on [a, b], +inf elsewhere
};

// Closed interval of one-sided derivatives of the conjugate at a point.
// Bounds may be infinite at the edge of the conjugate's effective domain.
struct SubgradientInterval {
    double lower = 0.0;
    double upper = 0.0;
    bool is_point() const { return lower == upper; }
    bool contains(double g, double tol = 0.0) const { return g >= lower - tol && g <= upper + tol; }
};

// One catalog entry: a divergence function phi together with its hand-derived
// convex conjugate and conjugate subgradient. The catalog is a closed
// enumeration; conjugates are exact formulas, cross-checked in the tests by a
// brute-force grid supremum.
//
// Each entry pins one representative of the equivalence class
// {phi(x) + k(x-1)}: the member with phi(1) = 0 and 0 in the subgradient at 1.
class DivergenceSpec {
  public:
    static DivergenceSpec kl() { return DivergenceSpec(DivergenceKind::Kl); }
    static DivergenceSpec tvd() { return DivergenceSpec(DivergenceKind::Tvd); }
    static DivergenceSpec tvd_extended() { return DivergenceSpec(DivergenceKind::TvdExtended); }
    static DivergenceSpec pearson_chi2() { return DivergenceSpec(DivergenceKind::PearsonChi2); }
    static DivergenceSpec pearson_chi2_extended() {
        return DivergenceSpec(DivergenceKind::PearsonChi2Extended);
    }
    static DivergenceSpec indicator_cvar(double alpha) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw DomainError("indicator_cvar: alpha must be in (0,1)");
        DivergenceSpec s(DivergenceKind::IndicatorCvar);
        s.alpha_ = alpha;
        return s;
    }
    static DivergenceSpec generalized_chi2_expectile(double q) {
        if (!(q > 0.0 && q < 1.0))
            throw DomainError("generalized_chi2_expectile: q must be in (0,1)");
        DivergenceSpec s(DivergenceKind::GeneralizedChi2Expectile);
        s.q_ = q;
        return s;
    }
    static DivergenceSpec interval_indicator(double a, double b) {
        if (!(a > 0.0 && a < 1.0 && b > 1.0))
            throw DomainError("interval_indicator: need 0 < a < 1 < b");
        DivergenceSpec s(DivergenceKind::IntervalIndicator);
        s.a_ = a;
        s.b_ = b;
        return s;
    }

    DivergenceKind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    double q() const { return q_; }
    double a() const { return a_; }
    double b() const { return b_; }

    // True when phi is finite for some x < 0.
    bool is_extended() const {
        return kind_ == DivergenceKind::TvdExtended || kind_ == DivergenceKind::PearsonChi2Extended ||
               kind_ == DivergenceKind::GeneralizedChi2Expectile;
    }

    // Conjugates accepted by the smooth characterizing system.
    bool smooth_conjugate() const {
        return kind_ == DivergenceKind::Kl || kind_ == DivergenceKind::PearsonChi2Extended ||
               kind_ == DivergenceKind::GeneralizedChi2Expectile;
    }

    // Positively homogeneous conjugates (support functions of [slope_neg, slope_pos]).
    bool homogeneous_conjugate() const {
        return kind_ == DivergenceKind::IndicatorCvar || kind_ == DivergenceKind::IntervalIndicator;
    }

    ExtendedReal phi(double x) const {
        switch (kind_) {
        case DivergenceKind::Kl:
            if (x < 0.0) return ExtendedReal::infinity();
            if (x == 0.0) return ExtendedReal(1.0); // 0 ln 0 := 0
            return ExtendedReal(x * std::log(x) - x + 1.0);
        case DivergenceKind::Tvd:
            if (x < 0.0) return ExtendedReal::infinity();
            return ExtendedReal(std::abs(x - 1.0));
        case DivergenceKind::TvdExtended:
            return ExtendedReal(std::abs(x - 1.0));
        case DivergenceKind::PearsonChi2:
            if (x < 0.0) return ExtendedReal::infinity();
            return ExtendedReal((x - 1.0) * (x - 1.0));
        case DivergenceKind::PearsonChi2Extended:
            return ExtendedReal((x - 1.0) * (x - 1.0));
        case DivergenceKind::IndicatorCvar:
            return (x >= 0.0 && x <= 1.0 / (1.0 - alpha_)) ? ExtendedReal(0.0)
                                                           : ExtendedReal::infinity();
        case DivergenceKind::GeneralizedChi2Expectile: {
            const double d = (x - 1.0) * (x - 1.0);
            return ExtendedReal(x > 1.0 ? d / q_ : d / (1.0 - q_));
        }
        case DivergenceKind::IntervalIndicator:
            return (x >= a_ && x <= b_) ? ExtendedReal(0.0) : ExtendedReal::infinity();
        }
        return ExtendedReal::infinity();
    }

    ExtendedReal conjugate(double z) const {
        switch (kind_) {
        case DivergenceKind::Kl:
            if (z > 700.0) return ExtendedReal::infinity(); // saturates past double range
            return ExtendedReal(std::expm1(z));
        case DivergenceKind::Tvd:
            if (z > 1.0) return ExtendedReal::infinity();
            return ExtendedReal(-1.0 + std::max(z + 1.0, 0.0));
        case DivergenceKind::TvdExtended:
            if (z < -1.0 || z > 1.0) return ExtendedReal::infinity();
            return ExtendedReal(z);
        case DivergenceKind::PearsonChi2:
            if (z < -2.0) return ExtendedReal(-1.0);
            return ExtendedReal(0.25 * z * z + z);
        case DivergenceKind::PearsonChi2Extended:
            return ExtendedReal(0.25 * z * z + z);
        case DivergenceKind::IndicatorCvar:
            return ExtendedReal(std::max(0.0, z / (1.0 - alpha_)));
        case DivergenceKind::GeneralizedChi2Expectile:
            return ExtendedReal(z > 0.0 ? 0.25 * q_ * z * z + z : 0.25 * (1.0 - q_) * z * z + z);
        case DivergenceKind::IntervalIndicator:
            return ExtendedReal(z < 0.0 ? a_ * z : b_ * z);
        }
        return ExtendedReal::infinity();
    }

    // One-sided derivative interval of the conjugate. Throws DomainError where
    // the conjugate is +inf.
    SubgradientInterval conjugate_subgradient(double z) const {
        constexpr double inf = std::numeric_limits<double>::infinity();
        if (!conjugate(z).is_finite())
            throw DomainError(name() + ": conjugate subgradient requested outside dom(phi*)");
        switch (kind_) {
        case DivergenceKind::Kl: {
            const double e = std::exp(z);
            return {e, e};
        }
        case DivergenceKind::Tvd:
            if (z < -1.0) return {0.0, 0.0};
            if (z == -1.0) return {0.0, 1.0};
            if (z < 1.0) return {1.0, 1.0};
            return {1.0, inf}; // right edge of dom(phi*)
        case DivergenceKind::TvdExtended:
            if (z == -1.0) return {-inf, 1.0};
            if (z < 1.0) return {1.0, 1.0};
            return {1.0, inf};
        case DivergenceKind::PearsonChi2:
            if (z <= -2.0) return {0.0, 0.0};
            return {0.5 * z + 1.0, 0.5 * z + 1.0};
        case DivergenceKind::PearsonChi2Extended:
            return {0.5 * z + 1.0, 0.5 * z + 1.0};
        case DivergenceKind::IndicatorCvar:
            if (z < 0.0) return {0.0, 0.0};
            if (z == 0.0) return {0.0, 1.0 / (1.0 - alpha_)};
            return {1.0 / (1.0 - alpha_), 1.0 / (1.0 - alpha_)};
        case DivergenceKind::GeneralizedChi2Expectile: {
            const double g = z > 0.0 ? 0.5 * q_ * z + 1.0 : 0.5 * (1.0 - q_) * z + 1.0;
            return {g, g};
        }
        case DivergenceKind::IntervalIndicator:
            if (z < 0.0) return {a_, a_};
            if (z == 0.0) return {a_, b_};
            return {b_, b_};
        }
        return {0.0, 0.0};
    }

    // z-locations where the conjugate subgradient is an interval.
    std::vector<double> conjugate_kinks() const {
        switch (kind_) {
        case DivergenceKind::Tvd:
            return {-1.0, 1.0};
        case DivergenceKind::TvdExtended:
            return {-1.0, 1.0};
        case DivergenceKind::IndicatorCvar:
        case DivergenceKind::IntervalIndicator:
            return {0.0};
        default:
            return {};
        }
    }

    // Weight interval {q : phi(q) <= budget} around 1, intersected with the
    // domain of phi. Bounds any feasible identifier coordinate since
    // p_i * phi(q_i) <= E[phi(Q)] <= beta.
    std::pair<double, double> feasible_weight_range(double budget) const {
        auto ok = [&](double x) { return phi(x) <= ExtendedReal(budget); };
        // Walks outward from 1 (always feasible) until infeasible, then bisects
        // the edge. dir is +1 or -1.
        auto edge = [&](double dir) {
            double in = 1.0, step = 1.0;
            while (ok(in + dir * step)) {
                in += dir * step;
                step *= 2.0;
                if (std::abs(in) > 1e12) return in;
            }
            double out = in + dir * step;
            for (int i = 0; i < 200 && std::abs(out - in) > 1e-12 * (1.0 + std::abs(in)); ++i) {
                const double mid = 0.5 * (in + out);
                (ok(mid) ? in : out) = mid;
            }
            return in;
        };
        return {edge(-1.0), edge(+1.0)};
    }

    // Probe ranges for validation and for the conjugate oracle in the tests.
    std::pair<double, double> phi_probe_range() const {
        return is_extended() ? std::pair{-5.0, 5.0} : std::pair{0.0, 5.0};
    }
    std::pair<double, double> conjugate_probe_range() const {
        switch (kind_) {
        case DivergenceKind::Kl:
            return {-3.0, 3.0};
        case DivergenceKind::Tvd:
            return {-3.0, 1.0};
        case DivergenceKind::TvdExtended:
            return {-1.0, 1.0};
        default:
            return {-6.0, 6.0};
        }
    }

    std::string name() const {
        char buf[96];
        switch (kind_) {
        case DivergenceKind::Kl:
            return "kl";
        case DivergenceKind::Tvd:
            return "tvd";
        case DivergenceKind::TvdExtended:
            return "tvd_extended";
        case DivergenceKind::PearsonChi2:
            return "pearson_chi2";
        case DivergenceKind::PearsonChi2Extended:
            return "pearson_chi2_extended";
        case DivergenceKind::IndicatorCvar:
            std::snprintf(buf, sizeof buf, "indicator_cvar:alpha=%.12g", alpha_);
            return buf;
        case DivergenceKind::GeneralizedChi2Expectile:
            std::snprintf(buf, sizeof buf, "generalized_chi2_expectile:q=%.12g", q_);
            return buf;
        case DivergenceKind::IntervalIndicator:
            std::snprintf(buf, sizeof buf, "interval_indicator:a=%.12g,b=%.12g", a_, b_);
            return buf;
        }
        return "?";
    }

  private:
    explicit DivergenceSpec(DivergenceKind kind) : kind_(kind) {}

    DivergenceKind kind_;
    double alpha_ = 0.0;
    double q_ = 0.0;
    double a_ = 0.0;
    double b_ = 0.0;
};

// All eight catalog entries with representative parameters.
inline std::vector<DivergenceSpec> default_catalog() {
    return {DivergenceSpec::kl(),
            DivergenceSpec::tvd(),
            DivergenceSpec::tvd_extended(),
            DivergenceSpec::pearson_chi2(),
            DivergenceSpec::pearson_chi2_extended(),
            DivergenceSpec::indicator_cvar(0.75),
            DivergenceSpec::generalized_chi2_expectile(0.75),
            DivergenceSpec::interval_indicator(0.5, 2.0)};
}

// ---------------------------------------------------------------------------
// Spec-string grammar: name[:key=value[,key=value...]]
// A beta key is tolerated anywhere and handed back to the caller; the radius
// is a run parameter, not part of the divergence itself.

struct SpecParse {
    DivergenceSpec spec;
    std::optional<double> beta;
};

inline SpecParse parse_spec_string(std::string_view text) {
    const auto colon = text.find(':');
    const std::string head(text.substr(0, colon));
    std::optional<double> alpha, q, a, b, beta;

    if (colon != std::string_view::npos) {
        std::string_view rest = text.substr(colon + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            std::string_view item = rest.substr(0, comma);
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
            const auto eq = item.find('=');
            if (eq == std::string_view::npos)
                throw DomainError("spec string: expected key=value, got '" + std::string(item) + "'");
            const std::string key(item.substr(0, eq));
            double value = 0.0;
            try {
                value = std::stod(std::string(item.substr(eq + 1)));
            } catch (const std::exception&) {
                throw DomainError("spec string: bad numeric value in '" + std::string(item) + "'");
            }
            if (key == "alpha")
                alpha = value;
            else if (key == "q")
                q = value;
            else if (key == "a")
                a = value;
            else if (key == "b")
                b = value;
            else if (key == "beta")
                beta = value;
            else
                throw DomainError("spec string: unknown key '" + key + "'");
        }
    }

    auto require = [&](bool cond, const char* msg) {
        if (!cond) throw DomainError(std::string("spec string: ") + msg);
    };

    if (head == "kl") return {DivergenceSpec::kl(), beta};
    if (head == "tvd") return {DivergenceSpec::tvd(), beta};
    if (head == "tvd_extended") return {DivergenceSpec::tvd_extended(), beta};
    if (head == "pearson_chi2") return {DivergenceSpec::pearson_chi2(), beta};
    if (head == "pearson_chi2_extended") return {DivergenceSpec::pearson_chi2_extended(), beta};
    if (head == "indicator_cvar") {
        require(alpha.has_value(), "indicator_cvar needs alpha=...");
        return {DivergenceSpec::indicator_cvar(*alpha), beta};
    }
    if (head == "generalized_chi2_expectile") {
        require(q.has_value(), "generalized_chi2_expectile needs q=...");
        return {DivergenceSpec::generalized_chi2_expectile(*q), beta};
    }
    if (head == "interval_indicator") {
        require(a.has_value() && b.has_value(), "interval_indicator needs a=...,b=...");
        return {DivergenceSpec::interval_indicator(*a, *b), beta};
    }
    throw DomainError("spec string: unknown divergence '" + head + "'");
}

// ---------------------------------------------------------------------------
// Axiom validation on probe grids. Failures are reported, not thrown, so a
// deliberately broken function can be inspected.

struct ValidationCheck {
    std::string axiom;
    bool passed = false;
    std::string note;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

// Validates an arbitrary candidate divergence function, so tests can probe
// perturbed variants. Grid: step 1e-2 over the probe range.
inline ValidationReport validate_divergence(const std::function<ExtendedReal(double)>& phi,
                                            bool extended, double lo = 0.0, double hi = 5.0) {
    ValidationReport report;
    const double step = 1e-2;

    const double at_one = phi(1.0).value();
    report.checks.push_back({"phi(1) = 0", at_one == 0.0,
                             at_one == 0.0 ? "" : "phi(1) = " + std::to_string(at_one)});

    bool nonneg = true;
    for (double x = 0.5; x <= 1.5 + 1e-12; x += 1e-3)
        if (phi(x) < ExtendedReal(0.0)) {
            nonneg = false;
            break;
        }
    report.checks.push_back({"0 in subgradient of phi at 1", nonneg,
                             nonneg ? "" : "phi dips below 0 near 1"});

    bool convex = true;
    for (double x = lo; x + 2.0 * step <= hi + 1e-12 && convex; x += step) {
        const ExtendedReal f0 = phi(x), f1 = phi(x + step), f2 = phi(x + 2.0 * step);
        if (!f0.is_finite() || !f2.is_finite()) continue;
        if (!f1.is_finite() || f1.value() > 0.5 * (f0.value() + f2.value()) + 1e-12) convex = false;
    }
    report.checks.push_back({"midpoint convexity on probe grid", convex, ""});

    const bool interior = phi(1.0 - 1e-3).is_finite() && phi(1.0 + 1e-3).is_finite();
    report.checks.push_back({"1 interior to the finiteness set", interior, ""});

    if (extended) {
        bool some_negative_finite = false;
        double witness = 0.0;
        for (double x = -5.0; x < 0.0; x += step)
            if (phi(x).is_finite()) {
                some_negative_finite = true;
                witness = x;
                break;
            }
        char note[64];
        std::snprintf(note, sizeof note, "extended: true, phi(%g) finite", witness);
        report.checks.push_back({"finite for some x < 0", some_negative_finite,
                                 some_negative_finite ? note : "no finite negative probe"});
    } else {
        bool inf_below_zero = true;
        for (double x = -5.0; x < -1e-9; x += step)
            if (phi(x).is_finite()) {
                inf_below_zero = false;
                break;
            }
        report.checks.push_back({"phi = +inf for x < 0", inf_below_zero, ""});
    }
    return report;
}

inline ValidationReport validate_spec(const DivergenceSpec& spec) {
    const auto [lo, hi] = spec.phi_probe_range();
    return validate_divergence([&](double x) { return spec.phi(x); }, spec.is_extended(),
                               spec.is_extended() ? -5.0 : lo, hi);
}

} // namespace phiquad
