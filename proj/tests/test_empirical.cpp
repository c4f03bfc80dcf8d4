#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "phiquad/empirical.hpp"

using namespace phiquad;

TEST_CASE("elementary statistics") {
    const auto x = EmpiricalDistribution::uniform({0.0, 2.0});
    CHECK(x.mean() == 1.0);
    CHECK(x.stdev() == 1.0);

    const auto c = EmpiricalDistribution({7.5}, {1.0});
    CHECK(c.mean() == 7.5);
    CHECK(c.is_constant());

    const auto y = EmpiricalDistribution::uniform({1.0, 2.0, 3.0, 4.0});
    CHECK(y.mean() == 2.5);

    const auto z = EmpiricalDistribution::uniform({-1.0, 3.0});
    CHECK(z.ess_sup() == 3.0);
    CHECK(z.ess_inf() == -1.0);

    const auto w = EmpiricalDistribution::uniform({3.0, 4.0});
    CHECK(w.l2_norm() == Catch::Approx(std::sqrt(12.5)));
}

TEST_CASE("construction contract") {
    CHECK_THROWS_AS(EmpiricalDistribution({1.0, 2.0}, {0.5, 0.6}), DegenerateInput);
    CHECK_THROWS_AS(EmpiricalDistribution({1.0, 2.0}, {1.1, -0.1}), DegenerateInput);
    CHECK_THROWS_AS(EmpiricalDistribution({1.0}, {0.5, 0.5}), DegenerateInput);
    CHECK_THROWS_AS(EmpiricalDistribution({}, {}), DegenerateInput);
}

TEST_CASE("lower quantile and its interval") {
    const auto y = EmpiricalDistribution::uniform({1.0, 2.0, 3.0, 4.0});
    CHECK(value_at_risk(y, 0.75) == 3.0);
    CHECK(value_at_risk(y, 0.5) == 2.0);
    const auto c = EmpiricalDistribution({3.3}, {1.0});
    CHECK(value_at_risk(c, 0.6) == 3.3);

    const auto iv = value_at_risk_interval(y, 0.5); // boundary: spans two atoms
    CHECK(iv.first == 2.0);
    CHECK(iv.second == 3.0);
    const auto iv2 = value_at_risk_interval(y, 0.6); // interior: single atom
    CHECK(iv2.first == 3.0);
    CHECK(iv2.second == 3.0);
}

TEST_CASE("cvar by sorted atoms") {
    const auto y = EmpiricalDistribution::uniform({1.0, 2.0, 3.0, 4.0});
    CHECK(cvar(y, 0.75) == Catch::Approx(4.0));
    CHECK(cvar(y, 0.0) == Catch::Approx(2.5));
    CHECK(cvar(y, 0.5) == Catch::Approx(3.5));
    CHECK(cvar(y, 0.6) == Catch::Approx((0.25 * 4.0 + 0.15 * 3.0) / 0.4)); // fractional split
}

TEST_CASE("cvar equals the minimization oracle") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> alpha_draw(0.0, 0.95);
    for (int inst = 0; inst < 50; ++inst) {
        const auto x = oracles::random_distribution(rng);
        const double alpha = alpha_draw(rng);
        INFO("instance " << inst << " alpha " << alpha);
        CHECK(std::abs(cvar(x, alpha) - oracles::cvar_minimization(x, alpha)) <= 1e-9);
    }
}

TEST_CASE("cvar ordering and limits") {
    std::mt19937_64 rng(12);
    for (int inst = 0; inst < 20; ++inst) {
        const auto x = oracles::random_distribution(rng);
        double prev = cvar(x, 0.0);
        CHECK(prev == Catch::Approx(x.mean()));
        for (double alpha : {0.2, 0.4, 0.6, 0.8, 0.95}) {
            const double v = cvar(x, alpha);
            CHECK(v >= prev - 1e-12);
            CHECK(v >= value_at_risk(x, alpha) - 1e-12);
            CHECK(value_at_risk(x, alpha) >= x.ess_inf());
            prev = v;
        }
        CHECK(cvar(x, 1.0 - 1.0 / (2.0 * x.size())) == Catch::Approx(x.ess_sup()));
    }
}

TEST_CASE("second-order quantile solves its characterizing equation") {
    // forward check: at q = 1 on {0,2} the ratio is sqrt(1/2)
    const auto x = EmpiricalDistribution::uniform({0.0, 2.0});
    const double alpha = 1.0 - std::sqrt(0.5);
    const double q = second_order_quantile(x, alpha);
    double l1 = 0.0, l2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = std::max(x.value(i) - q, 0.0);
        l1 += x.prob(i) * d;
        l2 += x.prob(i) * d * d;
    }
    CHECK(std::abs(l1 / std::sqrt(l2) - (1.0 - alpha)) <= 1e-10);

    const auto y = EmpiricalDistribution::uniform({1.0, 2.0, 3.0, 4.0});
    const double r = second_order_quantile(y, 0.3);
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = std::max(y.value(i) - r, 0.0);
        m1 += y.prob(i) * d;
        m2 += y.prob(i) * d * d;
    }
    CHECK(std::abs(m1 / std::sqrt(m2) - 0.7) <= 1e-10);

    CHECK_THROWS_AS(second_order_quantile(EmpiricalDistribution({2.0}, {1.0}), 0.5),
                    DegenerateInput);
}

TEST_CASE("expectile properties") {
    std::mt19937_64 rng(13);
    for (int inst = 0; inst < 20; ++inst) {
        const auto x = oracles::random_distribution(rng);
        CHECK(expectile(x, 0.5) == Catch::Approx(x.mean()).margin(1e-10));

        const double c = expectile(x, 0.75);
        double pos = 0.0, neg = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            pos += x.prob(i) * std::max(x.value(i) - c, 0.0);
            neg += x.prob(i) * std::max(c - x.value(i), 0.0);
        }
        CHECK(std::abs(0.75 * pos - 0.25 * neg) <= 1e-10);

        double prev = -1e300;
        for (double q : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const double e = expectile(x, q);
            CHECK(e >= prev - 1e-10);
            prev = e;
        }
        // translation equivariance
        const auto shifted = x.shifted(-2.5);
        CHECK(expectile(shifted, 0.7) == Catch::Approx(expectile(x, 0.7) + 2.5).margin(1e-9));
    }
    CHECK(expectile(EmpiricalDistribution({4.2}, {1.0}), 0.3) == 4.2);
}
