#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "phiquad/recovery.hpp"

using namespace phiquad;

namespace {

constexpr RecoveryRoute kRoutes[] = {RecoveryRoute::Risk, RecoveryRoute::Deviation,
                                     RecoveryRoute::Regret, RecoveryRoute::Error};

double direct_divergence(const DivergenceSpec& spec, const std::vector<double>& q,
                         const std::vector<double>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += p[i] * spec.phi(q[i]).value();
    return s;
}

} // namespace

TEST_CASE("all-ones weights recover a vanishing divergence") {
    const std::vector<double> q = {1.0, 1.0}, p = {0.5, 0.5};
    const auto r = recover_divergence(DivergenceSpec::kl(), q, p, RecoveryRoute::Risk);
    CHECK(r.value <= 1e-9);
    CHECK(r.value >= -1e-3); // grid supremum proves a nearby lower bound
}

TEST_CASE("KL recovery within tolerance on a two-atom weight vector") {
    const std::vector<double> q = {0.5, 1.5}, p = {0.5, 0.5};
    const auto spec = DivergenceSpec::kl();
    const double truth = direct_divergence(spec, q, p);
    double lo = 1e300, hi = -1e300;
    for (auto route : kRoutes) {
        const auto r = recover_divergence(spec, q, p, route);
        INFO("route " << static_cast<int>(route));
        CHECK(std::abs(r.value - truth) <= 0.05 * truth);
        CHECK(r.value <= truth + 1e-9);
        lo = std::min(lo, r.value);
        hi = std::max(hi, r.value);
    }
    CHECK(hi - lo <= 0.02 * truth); // routes agree with each other
}

TEST_CASE("chi-square recovery within tolerance on a two-atom weight vector") {
    const std::vector<double> q = {0.0, 2.0}, p = {0.5, 0.5};
    const auto spec = DivergenceSpec::pearson_chi2();
    const double truth = direct_divergence(spec, q, p); // = 1
    double lo = 1e300, hi = -1e300;
    for (auto route : kRoutes) {
        const auto r = recover_divergence(spec, q, p, route);
        INFO("route " << static_cast<int>(route));
        CHECK(std::abs(r.value - truth) <= 0.05 * truth);
        CHECK(r.value <= truth + 1e-9);
        lo = std::min(lo, r.value);
        hi = std::max(hi, r.value);
    }
    CHECK(hi - lo <= 0.02 * truth);
}

TEST_CASE("recovery preconditions") {
    const std::vector<double> p2 = {0.5, 0.5};
    CHECK_THROWS_AS(
        recover_divergence(DivergenceSpec::pearson_chi2_extended(), {0.5, 1.5}, p2,
                           RecoveryRoute::Risk),
        DomainError);
    CHECK_THROWS_AS(
        recover_divergence(DivergenceSpec::kl(), {0.4, 1.4}, p2, RecoveryRoute::Risk),
        DomainError); // mean is not one
    const std::vector<double> q5(5, 1.0), p5(5, 0.2);
    CHECK_THROWS_AS(recover_divergence(DivergenceSpec::kl(), q5, p5, RecoveryRoute::Risk),
                    DomainError);
}
