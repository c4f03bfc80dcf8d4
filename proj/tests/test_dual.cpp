#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "phiquad/closed_form.hpp"
#include "phiquad/dual.hpp"

using namespace phiquad;

TEST_CASE("dual risk oracle at worked points") {
    const auto c = EmpiricalDistribution({4.4, 4.4}, {0.3, 0.7});
    for (const auto& spec : default_catalog())
        CHECK(dual_risk_oracle(spec, 0.5, c).value == Catch::Approx(4.4).margin(1e-8));

    const auto x02 = EmpiricalDistribution::uniform({0.0, 2.0});
    const auto s = dual_risk_oracle(DivergenceSpec::pearson_chi2_extended(), 1.0, x02);
    CHECK(s.value == Catch::Approx(2.0).margin(1e-6));
    CHECK(s.identifier.weights[0] == Catch::Approx(0.0).margin(1e-6));
    CHECK(s.identifier.weights[1] == Catch::Approx(2.0).margin(1e-6));
    CHECK(s.identifier.mean_weight == Catch::Approx(1.0).margin(1e-9));
    CHECK(s.identifier.divergence_value <= 1.0 + 1e-9);

    const auto y = EmpiricalDistribution::uniform({1.0, 2.0, 3.0, 4.0});
    const auto t = dual_risk_oracle(DivergenceSpec::indicator_cvar(0.5), 1.0, y);
    CHECK(t.value == Catch::Approx(3.5).margin(1e-6));
    CHECK(t.identifier.weights[0] == Catch::Approx(0.0).margin(1e-6));
    CHECK(t.identifier.weights[3] == Catch::Approx(2.0).margin(1e-6));
}

TEST_CASE("dual regret oracle at worked points") {
    const auto zero = EmpiricalDistribution::uniform({0.0, 0.0});
    for (const auto& spec : default_catalog())
        CHECK(std::abs(dual_regret_oracle(spec, 0.5, zero).value) <= 1e-8);

    const auto x02 = EmpiricalDistribution::uniform({0.0, 2.0});
    CHECK(dual_regret_oracle(DivergenceSpec::pearson_chi2_extended(), 1.0, x02).value ==
          Catch::Approx(1.0 + std::sqrt(2.0)).margin(1e-6));

    const auto z = EmpiricalDistribution::uniform({-1.0, 3.0});
    CHECK(dual_regret_oracle(DivergenceSpec::tvd_extended(), 1.0, z).value ==
          Catch::Approx(4.0).margin(1e-6));
}

TEST_CASE("dual deviation equals the worst-case covariance") {
    const auto x02 = EmpiricalDistribution::uniform({0.0, 2.0});
    const auto s = dual_deviation_oracle(DivergenceSpec::pearson_chi2_extended(), 1.0, x02);
    CHECK(s.value == Catch::Approx(1.0).margin(1e-6));
    // cov(X, Q*) with E[Q*] = 1
    double cov = 0.0;
    for (std::size_t i = 0; i < x02.size(); ++i)
        cov += x02.prob(i) * (x02.value(i) - x02.mean()) * (s.identifier.weights[i] - 1.0);
    CHECK(cov == Catch::Approx(s.value).margin(1e-7));

    const auto c = EmpiricalDistribution({1.0}, {1.0});
    CHECK(std::abs(dual_deviation_oracle(DivergenceSpec::kl(), 0.5, c).value) <= 1e-8);
}

TEST_CASE("strong duality across the catalog") {
    std::mt19937_64 rng(41);
    const auto specs = default_catalog();
    for (int inst = 0; inst < 12; ++inst) {
        const auto x = oracles::random_distribution(rng, 2, 5);
        for (double beta : {0.05, 0.5, 1.0}) {
            for (const auto& spec : specs) {
                INFO(spec.name() << " beta=" << beta);
                CHECK(std::abs(primal_risk(spec, beta, x).value -
                               dual_risk_oracle(spec, beta, x).value) <= 1e-4);
                CHECK(std::abs(primal_regret(spec, beta, x).value -
                               dual_regret_oracle(spec, beta, x).value) <= 1e-4);
            }
        }
    }
}

TEST_CASE("risk identifier from the primal optimizers") {
    const auto x02 = EmpiricalDistribution::uniform({0.0, 2.0});
    const auto spec = DivergenceSpec::pearson_chi2_extended();
    const auto sol = primal_risk(spec, 1.0, x02);
    const auto id = risk_identifier_from_primal(spec, 1.0, x02, sol.c_over_t(), sol.t);
    CHECK(id.weights[0] == Catch::Approx(0.0).margin(1e-6));
    CHECK(id.weights[1] == Catch::Approx(2.0).margin(1e-6));
    CHECK(id.mean_weight == Catch::Approx(1.0).margin(1e-7));
    CHECK(id.attained_objective == Catch::Approx(sol.value).margin(1e-6));

    // KL weights are exponentials, hence positive
    std::mt19937_64 rng(42);
    for (int inst = 0; inst < 5; ++inst) {
        const auto x = oracles::random_distribution(rng);
        const auto kl = DivergenceSpec::kl();
        const auto ks = primal_risk(kl, 0.5, x);
        const auto kid = risk_identifier_from_primal(kl, 0.5, x, ks.c_over_t(), ks.t);
        for (double w : kid.weights) CHECK(w > 0.0);
        CHECK(kid.mean_weight == Catch::Approx(1.0).margin(1e-6));
    }

    // constant input maps every atom to the unit weight
    const auto c = EmpiricalDistribution({2.0, 2.0, 2.0}, {0.2, 0.5, 0.3});
    const auto cs = primal_risk(spec, 1.0, c);
    const auto cid = risk_identifier_from_primal(spec, 1.0, c, cs.c_over_t(), cs.t);
    for (double w : cid.weights) CHECK(w == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("identifier feasibility and optimality over the pool") {
    std::mt19937_64 rng(43);
    const auto specs = default_catalog();
    for (int inst = 0; inst < 10; ++inst) {
        const auto x = oracles::random_distribution(rng, 2, 6);
        for (double beta : {0.5, 1.0}) {
            for (const auto& spec : specs) {
                const auto sol = primal_risk(spec, beta, x);
                const auto id = risk_identifier_from_primal(spec, beta, x, sol.c_over_t(), sol.t);
                INFO(spec.name() << " beta=" << beta);
                CHECK(std::abs(id.mean_weight - 1.0) <= 1e-7);
                CHECK(id.divergence_value <= beta + 1e-7);
                CHECK(std::abs(id.attained_objective - sol.value) <= 1e-6);
                if (!spec.is_extended())
                    for (double w : id.weights) CHECK(w >= -1e-9);
            }
        }
    }
}

TEST_CASE("negative weights appear only in the extended family") {
    // spread outcomes and a large radius push the worst-case weight negative
    const auto x = EmpiricalDistribution::uniform({-2.0, -1.0, 3.0});
    const auto spec = DivergenceSpec::pearson_chi2_extended();
    const auto sol = primal_risk(spec, 4.0, x);
    const auto id = risk_identifier_from_primal(spec, 4.0, x, sol.c_over_t(), sol.t);
    double min_w = 1e300;
    for (double w : id.weights) min_w = std::min(min_w, w);
    CHECK(min_w < 0.0);
}

TEST_CASE("small radius collapses the extension") {
    std::mt19937_64 rng(44);
    for (int inst = 0; inst < 6; ++inst) {
        const auto x = oracles::random_distribution(rng);
        const double a = primal_risk(DivergenceSpec::pearson_chi2(), 0.01, x).value;
        const double b = primal_risk(DivergenceSpec::pearson_chi2_extended(), 0.01, x).value;
        CHECK(std::abs(a - b) <= 1e-5);
    }
}

TEST_CASE("error identifier from the primal optimizers") {
    const auto spec = DivergenceSpec::pearson_chi2_extended();
    const auto zero = EmpiricalDistribution::uniform({0.0, 0.0});
    const auto zs = primal_error(spec, 1.0, zero);
    const auto zid = error_identifier_from_primal(spec, 1.0, zero, zs.t);
    CHECK(zid.divergence_value <= 1.0 + 1e-7);
    CHECK(std::abs(zid.attained_objective) <= 1e-8);

    // at the statistic shift the mean constraint emerges automatically
    const auto x02 = EmpiricalDistribution::uniform({0.0, 2.0});
    const auto shifted = x02.shifted(1.0);
    const auto es = primal_error(spec, 1.0, shifted);
    const auto eid = error_identifier_from_primal(spec, 1.0, shifted, es.t);
    CHECK(eid.mean_weight == Catch::Approx(1.0).margin(1e-6));
    CHECK(eid.weights[0] == Catch::Approx(0.0).margin(1e-5));
    CHECK(eid.weights[1] == Catch::Approx(2.0).margin(1e-5));

    const auto ind = DivergenceSpec::indicator_cvar(0.75);
    const auto pm = EmpiricalDistribution::uniform({-1.0, 1.0});
    const auto stat = primal_statistic(ind, 1.0, pm);
    const auto shifted2 = pm.shifted(0.5 * (stat.first + stat.second));
    const auto is = primal_error(ind, 1.0, shifted2);
    const auto iid = error_identifier_from_primal(ind, 1.0, shifted2, is.t);
    CHECK(iid.mean_weight == Catch::Approx(1.0).margin(1e-6));
    for (double w : iid.weights) {
        CHECK(w >= -1e-9);
        CHECK(w <= 4.0 + 1e-9);
    }
}

TEST_CASE("oracle atom limit is enforced") {
    std::vector<double> many(9, 0.0);
    for (std::size_t i = 0; i < many.size(); ++i) many[i] = static_cast<double>(i);
    const auto x = EmpiricalDistribution::uniform(many);
    CHECK_THROWS_AS(dual_risk_oracle(DivergenceSpec::kl(), 0.5, x), DomainError);
    CHECK_THROWS_AS(dual_regret_oracle(DivergenceSpec::kl(), 0.5, x), DomainError);
}
