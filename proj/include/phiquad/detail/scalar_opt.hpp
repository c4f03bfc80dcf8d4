#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

// Derivative-free scalar and bivariate minimizers. Objectives may return
// +inf for infeasible arguments; every routine treats +inf as "move away".

namespace phiquad::detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct ScalarMin {
    double x = 0.0;
    double value = kInf;
};

// Golden-section search preceded by a coarse grid scan. The scan locates a
// finite seed so that the bracketing step never has to disambiguate between
// two infinite interior points, which can happen when the feasible set is a
// small sub-interval of [lo, hi].
template <typename F>
ScalarMin golden_min(F&& f, double lo, double hi, double xtol, int scan_points = 33) {
    if (hi < lo) std::swap(lo, hi);
    ScalarMin best;
    int best_idx = -1;
    const int n = std::max(scan_points, 5);
    for (int i = 0; i < n; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
        const double v = f(x);
        if (v < best.value) {
            best = {x, v};
            best_idx = i;
        }
    }
    if (best_idx < 0) return {0.5 * (lo + hi), kInf};

    double a = lo + (hi - lo) * static_cast<double>(std::max(best_idx - 1, 0)) / (n - 1);
    double b = lo + (hi - lo) * static_cast<double>(std::min(best_idx + 1, n - 1)) / (n - 1);

    constexpr double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 200 && (b - a) > xtol; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    const double xm = 0.5 * (a + b);
    const double fm = f(xm);
    ScalarMin out = best;
    if (f1 < out.value) out = {x1, f1};
    if (f2 < out.value) out = {x2, f2};
    if (fm < out.value) out = {xm, fm};
    return out;
}

// Sign-change bisection. Assumes g is monotone; if g never crosses zero the
// result collapses to the bracket end nearest the crossing.
template <typename G>
double bisect_root(G&& g, double lo, double hi, double xtol, int max_iter = 200) {
    double glo = g(lo);
    double ghi = g(hi);
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    if (glo * ghi > 0.0) return std::abs(glo) < std::abs(ghi) ? lo : hi;
    for (int it = 0; it < max_iter && (hi - lo) > xtol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (gm == 0.0) return mid;
        if (gm * glo < 0.0) {
            hi = mid;
            ghi = gm;
        } else {
            lo = mid;
            glo = gm;
        }
    }
    return 0.5 * (lo + hi);
}

// Largest x in [lo, hi] with pred(x) true, given pred(lo) true. Used to trace
// the edge of feasible or flat regions.
template <typename P>
double bisect_predicate(P&& pred, double lo, double hi, double xtol, int max_iter = 200) {
    if (pred(hi)) return hi;
    for (int it = 0; it < max_iter && (hi - lo) > xtol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (pred(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

// Minimize over a positive scale variable, growing the upper bracket while
// the minimizer keeps landing on it.
template <typename F>
ScalarMin minimize_over_scale(F&& obj, double t_lo, double t_hi, int max_expansions = 6,
                              int scan_points = 65) {
    ScalarMin best;
    for (int expansion = 0; expansion <= max_expansions; ++expansion) {
        best = golden_min(obj, t_lo, t_hi, 1e-12 * (1.0 + t_hi), scan_points);
        if (t_hi - best.x >= 1e-3 * t_hi) break;
        t_hi *= 10.0;
    }
    return best;
}

struct Point2 {
    double x = 0.0, y = 0.0;
};

struct Min2 {
    Point2 p;
    double value = kInf;
};

// Nelder-Mead on two variables. Finishes off coordinate descent when the
// objective has a nonsmooth valley not aligned with the axes.
template <typename F>
Min2 nelder_mead_2d(F&& f, Point2 start, double step_x, double step_y, int max_iter = 400,
                    double ftol = 1e-13) {
    std::array<Point2, 3> p{start, {start.x + step_x, start.y}, {start.x, start.y + step_y}};
    std::array<double, 3> v{f(p[0]), f(p[1]), f(p[2])};

    auto order = [&] {
        if (v[0] > v[1]) { std::swap(v[0], v[1]); std::swap(p[0], p[1]); }
        if (v[1] > v[2]) { std::swap(v[1], v[2]); std::swap(p[1], p[2]); }
        if (v[0] > v[1]) { std::swap(v[0], v[1]); std::swap(p[0], p[1]); }
    };
    order();

    for (int it = 0; it < max_iter; ++it) {
        const double span = std::abs(v[2] - v[0]);
        if (span <= ftol * (1.0 + std::abs(v[0])) &&
            std::abs(p[2].x - p[0].x) + std::abs(p[2].y - p[0].y) <=
                1e-12 * (1.0 + std::abs(p[0].x) + std::abs(p[0].y)))
            break;
        const Point2 centroid{0.5 * (p[0].x + p[1].x), 0.5 * (p[0].y + p[1].y)};
        const Point2 refl{centroid.x + (centroid.x - p[2].x), centroid.y + (centroid.y - p[2].y)};
        const double fr = f(refl);
        if (fr < v[0]) {
            const Point2 exp_{centroid.x + 2.0 * (centroid.x - p[2].x),
                              centroid.y + 2.0 * (centroid.y - p[2].y)};
            const double fe = f(exp_);
            if (fe < fr) { p[2] = exp_; v[2] = fe; } else { p[2] = refl; v[2] = fr; }
        } else if (fr < v[1]) {
            p[2] = refl;
            v[2] = fr;
        } else {
            const Point2 con{centroid.x + 0.5 * (p[2].x - centroid.x),
                             centroid.y + 0.5 * (p[2].y - centroid.y)};
            const double fc = f(con);
            if (fc < v[2]) {
                p[2] = con;
                v[2] = fc;
            } else {
                for (int i = 1; i < 3; ++i) {
                    p[i] = {p[0].x + 0.5 * (p[i].x - p[0].x), p[0].y + 0.5 * (p[i].y - p[0].y)};
                    v[i] = f(p[i]);
                }
            }
        }
        order();
    }
    return {p[0], v[0]};
}

// Gaussian elimination with partial pivoting; A is row-major n x n.
// Small systems only (normal equations, KKT blocks).
inline std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
            std::swap(b[col], b[piv]);
        }
        const double d = a[col * n + col];
        if (std::abs(d) < 1e-300) continue; // singular direction; leave coordinate at zero
        for (std::size_t r = col + 1; r < n; ++r) {
            const double m = a[r * n + col] / d;
            if (m == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= m * a[col * n + c];
            b[r] -= m * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri * n + c] * x[c];
        const double d = a[ri * n + ri];
        x[ri] = std::abs(d) < 1e-300 ? 0.0 : s / d;
    }
    return x;
}

} // namespace phiquad::detail
