#pragma once

#include <cassert>
#include <cmath>
#include <limits>

namespace phiquad {

// Value in R ∪ {+inf} with total arithmetic. Divergence functions and their
// conjugates evaluate to +inf outside their effective domains; -inf never
// arises because every catalog function is bounded below where finite.
class ExtendedReal {
  public:
    constexpr ExtendedReal() = default;
    constexpr ExtendedReal(double v) : v_(v) { assert(!(v_ < -kInf)); } // NOLINT(google-explicit-constructor)

    static constexpr ExtendedReal infinity() { return ExtendedReal(kInf); }

    constexpr bool is_finite() const { return v_ < kInf; }

    // +inf is reported as the IEEE infinity so callers can feed solvers directly.
    constexpr double value() const { return v_; }

    friend constexpr ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
        return ExtendedReal(a.v_ + b.v_);
    }
    friend constexpr ExtendedReal operator-(ExtendedReal a, double b) {
        return ExtendedReal(a.v_ - b);
    }

    // Positive scaling only: t * (+inf) = +inf requires t > 0.
    constexpr ExtendedReal scaled_by(double t) const {
        assert(t > 0.0);
        return is_finite() ? ExtendedReal(t * v_) : infinity();
    }

    friend constexpr bool operator==(ExtendedReal a, ExtendedReal b) { return a.v_ == b.v_; }
    friend constexpr bool operator<(ExtendedReal a, ExtendedReal b) { return a.v_ < b.v_; }
    friend constexpr bool operator<=(ExtendedReal a, ExtendedReal b) { return a.v_ <= b.v_; }
    friend constexpr bool operator>(ExtendedReal a, ExtendedReal b) { return a.v_ > b.v_; }
    friend constexpr bool operator>=(ExtendedReal a, ExtendedReal b) { return a.v_ >= b.v_; }

  private:
    static constexpr double kInf = std::numeric_limits<double>::infinity();
    double v_ = 0.0;
};

} // namespace phiquad
