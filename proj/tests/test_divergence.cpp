#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "phiquad/divergence.hpp"

using namespace phiquad;

TEST_CASE("divergence values at catalog points") {
    CHECK(DivergenceSpec::kl().phi(1.0).value() == 0.0);
    CHECK(DivergenceSpec::pearson_chi2_extended().phi(-1.0).value() == 4.0);
    CHECK_FALSE(DivergenceSpec::tvd().phi(-0.5).is_finite());
    CHECK(DivergenceSpec::indicator_cvar(0.75).phi(3.0).value() == 0.0);
    CHECK_FALSE(DivergenceSpec::indicator_cvar(0.75).phi(4.5).is_finite());
    CHECK(DivergenceSpec::kl().phi(0.0).value() == 1.0); // 0 ln 0 = 0
}

TEST_CASE("conjugate values at catalog points") {
    CHECK(DivergenceSpec::kl().conjugate(0.0).value() == 0.0);
    CHECK_FALSE(DivergenceSpec::tvd_extended().conjugate(2.0).is_finite());
    CHECK(DivergenceSpec::pearson_chi2_extended().conjugate(2.0).value() == 3.0);
    CHECK(DivergenceSpec::interval_indicator(0.5, 2.0).conjugate(-1.0).value() == -0.5);
    CHECK(DivergenceSpec::pearson_chi2().conjugate(-3.0).value() == -1.0);
}

TEST_CASE("conjugate subgradients") {
    const auto g1 = DivergenceSpec::pearson_chi2_extended().conjugate_subgradient(2.0);
    CHECK(g1.lower == 2.0);
    CHECK(g1.upper == 2.0);

    const auto g2 = DivergenceSpec::interval_indicator(0.5, 2.0).conjugate_subgradient(0.0);
    CHECK(g2.lower == 0.5);
    CHECK(g2.upper == 2.0);

    const auto g3 = DivergenceSpec::kl().conjugate_subgradient(0.0);
    CHECK(g3.lower == Catch::Approx(1.0));
    CHECK(g3.upper == Catch::Approx(1.0));

    CHECK_THROWS_AS(DivergenceSpec::tvd().conjugate_subgradient(1.5), DomainError);
    CHECK_THROWS_AS(DivergenceSpec::tvd_extended().conjugate_subgradient(-1.5), DomainError);
}

TEST_CASE("brute-force conjugate oracle agrees with the closed forms") {
    for (const auto& spec : default_catalog()) {
        const auto [zlo, zhi] = spec.conjugate_probe_range();
        const auto [xlo, xhi] = spec.phi_probe_range();
        for (int k = 0; k < 20; ++k) {
            const double z = zlo + (zhi - zlo) * k / 19.0;
            const auto v = spec.conjugate(z);
            if (!v.is_finite()) continue;
            // oracle grid must cover where the sup is attained
            const double oracle =
                oracles::conjugate_grid(spec, z, xlo - 5.0, xhi + 15.0, 1e-3);
            INFO(spec.name() << " z=" << z);
            CHECK(std::abs(oracle - v.value()) <= 2e-3);
        }
    }
}

TEST_CASE("specific conjugate oracle probes from the contract") {
    const double a = oracles::conjugate_grid(DivergenceSpec::pearson_chi2_extended(), 2.0, -10.0,
                                             10.0, 1e-3);
    CHECK(std::abs(a - 3.0) <= 1e-3);
    const double b = oracles::conjugate_grid(DivergenceSpec::kl(), 0.0, 1e-4, 10.0, 1e-4);
    CHECK(std::abs(b - 0.0) <= 1e-4);
    const double c = oracles::conjugate_grid(DivergenceSpec::tvd(), 0.5, 0.0, 10.0, 1e-3);
    CHECK(std::abs(c - 0.5) <= 1e-3);
}

TEST_CASE("Fenchel-Young inequality with equality on subgradient pairs") {
    for (const auto& spec : default_catalog()) {
        const auto [xlo, xhi] = spec.phi_probe_range();
        const auto [zlo, zhi] = spec.conjugate_probe_range();
        for (int i = 0; i < 15; ++i) {
            const double x = xlo + (xhi - xlo) * i / 14.0;
            const auto fx = spec.phi(x);
            if (!fx.is_finite()) continue;
            for (int j = 0; j < 15; ++j) {
                const double z = zlo + (zhi - zlo) * j / 14.0;
                const auto fz = spec.conjugate(z);
                if (!fz.is_finite()) continue;
                INFO(spec.name() << " x=" << x << " z=" << z);
                CHECK(fx.value() + fz.value() >= x * z - 1e-9);
            }
        }
        // equality when x is the conjugate subgradient at z
        for (int j = 1; j < 14; ++j) {
            const double z = zlo + (zhi - zlo) * j / 13.5;
            const auto fz = spec.conjugate(z);
            if (!fz.is_finite()) continue;
            const auto g = spec.conjugate_subgradient(z);
            for (double x : {g.lower, g.upper}) {
                if (!std::isfinite(x)) continue;
                const auto fx = spec.phi(x);
                if (!fx.is_finite()) continue;
                INFO(spec.name() << " z=" << z << " x=" << x);
                CHECK(std::abs(fx.value() + fz.value() - x * z) <= 1e-9);
            }
        }
    }
}

TEST_CASE("conjugate subgradient is monotone in z") {
    for (const auto& spec : default_catalog()) {
        const auto [zlo, zhi] = spec.conjugate_probe_range();
        double prev_upper = -1e300;
        for (int j = 0; j <= 60; ++j) {
            const double z = zlo + (zhi - zlo) * j / 60.0;
            if (!spec.conjugate(z).is_finite()) continue;
            const auto g = spec.conjugate_subgradient(z);
            INFO(spec.name() << " z=" << z);
            CHECK(std::max(g.lower, -1e300) >= prev_upper - 1e-12);
            prev_upper = std::max(prev_upper, std::min(g.upper, 1e300));
        }
    }
}

TEST_CASE("non-extended conjugates are nondecreasing") {
    for (const auto& spec : default_catalog()) {
        if (spec.is_extended()) continue;
        const auto [zlo, zhi] = spec.conjugate_probe_range();
        double prev = -1e300;
        for (int j = 0; j <= 80; ++j) {
            const double z = zlo + (zhi - zlo) * j / 80.0;
            const auto v = spec.conjugate(z);
            if (!v.is_finite()) break;
            INFO(spec.name() << " z=" << z);
            CHECK(v.value() >= prev - 1e-12);
            prev = v.value();
        }
    }
}

TEST_CASE("axiom validation passes for every catalog entry") {
    for (const auto& spec : default_catalog()) {
        const auto report = validate_spec(spec);
        INFO(spec.name());
        CHECK(report.all_passed());
    }
}

TEST_CASE("extended entries report a finite negative probe") {
    const auto report = validate_spec(DivergenceSpec::pearson_chi2_extended());
    bool found = false;
    for (const auto& c : report.checks)
        if (c.axiom == "finite for some x < 0") {
            found = true;
            CHECK(c.passed);
            CHECK(c.note.find("extended: true") != std::string::npos);
        }
    CHECK(found);
}

TEST_CASE("perturbed normalization fails the first axiom") {
    const auto spec = DivergenceSpec::kl();
    const auto report = validate_divergence(
        [&](double x) { return spec.phi(x) + ExtendedReal(0.1); }, false, 0.0, 5.0);
    CHECK_FALSE(report.all_passed());
    CHECK(report.checks.front().axiom == "phi(1) = 0");
    CHECK_FALSE(report.checks.front().passed);
}

TEST_CASE("spec strings parse and carry the radius") {
    const auto a = parse_spec_string("indicator_cvar:alpha=0.75");
    CHECK(a.spec.kind() == DivergenceKind::IndicatorCvar);
    CHECK(a.spec.alpha() == 0.75);
    CHECK_FALSE(a.beta.has_value());

    const auto b = parse_spec_string("pearson_chi2_extended:beta=1");
    CHECK(b.spec.kind() == DivergenceKind::PearsonChi2Extended);
    REQUIRE(b.beta.has_value());
    CHECK(*b.beta == 1.0);

    const auto c = parse_spec_string("interval_indicator:a=0.5,b=2.0");
    CHECK(c.spec.a() == 0.5);
    CHECK(c.spec.b() == 2.0);
    CHECK(c.spec.name() == "interval_indicator:a=0.5,b=2");

    CHECK_THROWS_AS(parse_spec_string("unknown_thing"), DomainError);
    CHECK_THROWS_AS(parse_spec_string("kl:zeta=1"), DomainError);
    CHECK_THROWS_AS(parse_spec_string("indicator_cvar"), DomainError);
    CHECK_THROWS_AS(parse_spec_string("indicator_cvar:alpha=1.5"), DomainError);
}

TEST_CASE("extended-real arithmetic is total") {
    const ExtendedReal inf = ExtendedReal::infinity();
    CHECK((ExtendedReal(1.0) + ExtendedReal(2.0)).value() == 3.0);
    CHECK_FALSE((ExtendedReal(1.0) + inf).is_finite());
    CHECK_FALSE(inf.scaled_by(0.5).is_finite());
    CHECK(ExtendedReal(3.0).scaled_by(2.0).value() == 6.0);
    CHECK(inf > ExtendedReal(1e300));
}
