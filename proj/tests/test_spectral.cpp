#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stburgers/noise.hpp"  // rng_detail for random fields
#include "stburgers/spectral.hpp"

using namespace stburgers;

namespace {

SpectralField rand_field(std::uint64_t tag, std::size_t dim, double scale = 1.0) {
    SpectralField v(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        const std::uint64_t u = rng_detail::mix64(tag * 0x9e3779b97f4a7c15ull + k + 1);
        v[k] = scale * (2.0 * rng_detail::to_unit_open(u) - 1.0);
    }
    return v;
}

} // namespace

TEST_CASE("eigenvalue closed form", "[spectral]") {
    const OperatorSpec s1{1.0, 0.0};
    CHECK(eigenvalue(1, s1) == Catch::Approx(kPi * kPi).epsilon(1e-15));
    CHECK(eigenvalue(2, s1) == Catch::Approx(4.0 * kPi * kPi).epsilon(1e-15));
    const OperatorSpec s2{2.0, 0.0};
    CHECK(eigenvalue(3, s2) == Catch::Approx(18.0 * kPi * kPi).epsilon(1e-15));
    CHECK(eigenvalue(5, s1) > eigenvalue(4, s1));
    CHECK_THROWS_AS(eigenvalue(0, s1), std::invalid_argument);
    CHECK_THROWS_AS(eigenvalue(1, OperatorSpec{-1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("semigroup action", "[spectral]") {
    const OperatorSpec op{1.0, 0.0};
    const SpectralField v = rand_field(1, 12);

    SECTION("t = 0 is the identity") {
        const auto w = apply_semigroup(v, 0.0, op);
        for (std::size_t k = 0; k < v.dim(); ++k) CHECK(w[k] == v[k]);
    }
    SECTION("single mode matches the scalar exponential") {
        const auto w = apply_semigroup(SpectralField::basis(1, 1), 1.0, op);
        CHECK(w[0] == Catch::Approx(std::exp(-kPi * kPi)).epsilon(1e-13));
    }
    SECTION("two modes componentwise") {
        SpectralField u(2);
        u[0] = 1.0;
        u[1] = 1.0;
        const auto w = apply_semigroup(u, 0.1, op);
        CHECK(w[0] == Catch::Approx(std::exp(-0.1 * kPi * kPi)).epsilon(1e-14));
        CHECK(w[1] == Catch::Approx(std::exp(-0.4 * kPi * kPi)).epsilon(1e-14));
    }
    SECTION("semigroup composition within 1e-12 relative") {
        const auto two = apply_semigroup(apply_semigroup(v, 0.07, op), 0.13, op);
        const auto one = apply_semigroup(v, 0.2, op);
        for (std::size_t k = 0; k < v.dim(); ++k)
            CHECK(two[k] == Catch::Approx(one[k]).epsilon(1e-12).margin(1e-300));
    }
    SECTION("contraction") {
        for (double t : {0.0, 1e-6, 0.01, 1.0, 10.0})
            CHECK(h_norm(apply_semigroup(v, t, op)) <= h_norm(v));
    }
    CHECK_THROWS_AS(apply_semigroup(v, -0.1, op), std::invalid_argument);
}

TEST_CASE("fractional powers", "[spectral]") {
    const OperatorSpec op0{1.0, 0.0};
    const OperatorSpec op1{1.0, 1.0};
    const SpectralField e1 = SpectralField::basis(1, 1);

    SECTION("r = 0 identity") {
        const SpectralField v = rand_field(2, 9);
        const auto w = apply_fractional_power(v, 0.0, op0);
        for (std::size_t k = 0; k < v.dim(); ++k) CHECK(w[k] == v[k]);
    }
    SECTION("half power of e1 gives pi") {
        CHECK(apply_fractional_power(e1, 0.5, op0)[0] == Catch::Approx(kPi).epsilon(1e-14));
    }
    SECTION("negative power with shift") {
        CHECK(apply_fractional_power(e1, -1.0, op1)[0] ==
              Catch::Approx(1.0 / (1.0 + kPi * kPi)).epsilon(1e-14));
    }
    SECTION("composition within 1e-12 relative") {
        const SpectralField v = rand_field(3, 16);
        const auto two = apply_fractional_power(apply_fractional_power(v, 0.3, op1), -0.7, op1);
        const auto one = apply_fractional_power(v, -0.4, op1);
        for (std::size_t k = 0; k < v.dim(); ++k)
            CHECK(two[k] == Catch::Approx(one[k]).epsilon(1e-12).margin(1e-300));
    }
}

TEST_CASE("interpolation norms", "[spectral]") {
    const OperatorSpec op{1.0, 0.0};
    const SpectralField e1 = SpectralField::basis(1, 1);
    CHECK(hr_norm(e1, 0.0, op) == 1.0);
    CHECK(hr_norm(e1, 0.5, op) == Catch::Approx(kPi).epsilon(1e-14));
    CHECK(hr_norm(SpectralField(5), 0.37, op) == 0.0);

    const SpectralField v = rand_field(4, 20);
    CHECK(hr_norm(v, 0.0, op) == Catch::Approx(h_norm(v)).epsilon(1e-15));
}

TEST_CASE("projection", "[spectral]") {
    const SpectralField v = rand_field(5, 8);
    SECTION("identity at own dimension") {
        const auto w = project(v, 8);
        for (std::size_t k = 0; k < 8; ++k) CHECK(w[k] == v[k]);
    }
    SECTION("truncation") {
        SpectralField u(3);
        u[0] = u[1] = u[2] = 1.0;
        const auto w = project(u, 2);
        REQUIRE(w.dim() == 2);
        CHECK(w[0] == 1.0);
        CHECK(w[1] == 1.0);
    }
    SECTION("zero padding") {
        const auto w = project(SpectralField::basis(1, 1), 4);
        REQUIRE(w.dim() == 4);
        CHECK(w[0] == 1.0);
        CHECK(w[1] == 0.0);
        CHECK(w[3] == 0.0);
    }
    SECTION("idempotent") {
        const auto w = project(project(v, 5), 5);
        const auto w1 = project(v, 5);
        for (std::size_t k = 0; k < 5; ++k) CHECK(w[k] == w1[k]);
    }
    CHECK_THROWS_AS(project(v, 0), std::invalid_argument);
}

TEST_CASE("point evaluation and sup norm", "[spectral]") {
    const OperatorSpec op{1.0, 0.0};
    (void)op;
    CHECK(point_eval(SpectralField::basis(1, 1), 0.5) == Catch::Approx(kSqrt2).epsilon(1e-14));
    CHECK(point_eval(SpectralField(3), 0.25) == 0.0);
    CHECK(point_eval(SpectralField::basis(2, 2), 0.5) == Catch::Approx(0.0).margin(1e-14));
    CHECK_THROWS_AS(point_eval(SpectralField::basis(1, 1), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(point_eval(SpectralField::basis(1, 1), 1.0), std::invalid_argument);

    SECTION("sup norm agrees with dense point evaluation") {
        const SpectralField v = rand_field(6, 7);
        const std::size_t g = 4096;
        const double s = sup_norm(v, g);
        double ref = 0.0;
        for (std::size_t j = 1; j <= g; ++j)
            ref = std::max(ref, std::abs(point_eval(v, static_cast<double>(j) / (g + 1))));
        CHECK(s == Catch::Approx(ref).epsilon(1e-11));
        CHECK(sup_norm(SpectralField::basis(1, 1)) == Catch::Approx(kSqrt2).epsilon(1e-4));
    }
}

TEST_CASE("Parseval spot check via trapezoid", "[spectral]") {
    const SpectralField v = rand_field(7, 64);
    const std::size_t n = 100'000;
    double integral = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        const double x = static_cast<double>(j) / n;
        const double f = point_eval(v, x);
        integral += f * f;
    }
    integral /= n;  // endpoints vanish for sine polynomials
    const double nv = h_norm(v);
    CHECK(integral == Catch::Approx(nv * nv).epsilon(1e-6));
}

TEST_CASE("smoothing estimate", "[spectral]") {
    const OperatorSpec op{1.0, 0.5};
    const SpectralField v = rand_field(8, 32);
    for (double r : {0.25, 0.5, 1.0})
        for (double t : {0.001, 0.01, 0.1, 1.0}) {
            const double lhs = hr_norm(apply_semigroup(v, t, op), r, op);
            const double rhs = std::exp(t * op.kappa) * std::pow(t, -r) * hr_norm(v, 0.0, op);
            CHECK(lhs <= rhs * (1.0 + 1e-12));
        }
}

TEST_CASE("drift weight", "[spectral]") {
    const OperatorSpec op{1.0, 0.0};
    SECTION("small-h Taylor limit") {
        const double h = 1e-8;
        CHECK(drift_weight(1, h, op) == Catch::Approx(h).epsilon(1e-7));
        // relative error of w against h is ~ lambda h / 2 ~ 5e-8; against the
        // true value the expm1 formulation is accurate to ~1e-15
        const double exact = -std::expm1(-eigenvalue(1, op) * h) / eigenvalue(1, op);
        CHECK(drift_weight(1, h, op) == Catch::Approx(exact).epsilon(1e-12));
    }
    SECTION("moderate h closed form") {
        const double lam = kPi * kPi;
        CHECK(drift_weight(1, 0.01, op) ==
              Catch::Approx((1.0 - std::exp(-0.01 * lam)) / lam).epsilon(1e-13));
        CHECK(drift_weight(1, 0.01, op) == Catch::Approx(9.519e-3).epsilon(1e-3));
    }
    SECTION("saturated regime") {
        CHECK(drift_weight(10, 1.0, op) ==
              Catch::Approx(1.0 / (100.0 * kPi * kPi)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(drift_weight(1, 0.0, op), std::invalid_argument);
}
