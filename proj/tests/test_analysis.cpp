#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "stburgers/analysis.hpp"

using namespace stburgers;

namespace {

ModelParams default_params() {
    ModelParams p;
    p.xi = SpectralField::basis(1, 1);
    return p;
}

std::vector<std::uint64_t> seeds_from(std::uint64_t base, std::size_t n) {
    std::vector<std::uint64_t> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = base + i;
    return s;
}

} // namespace

TEST_CASE("pairwise sum is order-stable and correct", "[analysis]") {
    std::vector<double> v;
    for (int i = 0; i < 1000; ++i) v.push_back(std::sin(i * 0.37) * std::pow(10.0, i % 7));
    const double s1 = pairwise_sum(v);
    const double s2 = pairwise_sum(v);
    CHECK(s1 == s2);
    double plain = 0.0;
    for (double x : v) plain += x;
    CHECK(s1 == Catch::Approx(plain).epsilon(1e-12));
}

TEST_CASE("rate_fit recovers planted power laws", "[analysis]") {
    auto planted = [](double c, double r) {
        ErrorReport rep;
        for (int l = 3; l <= 8; ++l) {
            LevelError le;
            le.level = l;
            le.N = std::size_t{1} << l;
            le.h = std::pow(2.0, -l);
            le.strong_error = c * std::pow(le.h, r);
            rep.levels.push_back(le);
        }
        return rep;
    };
    SECTION("rate 1.0") {
        const RateFit f = rate_fit(planted(0.8, 1.0));
        CHECK(f.rate == Catch::Approx(1.0).margin(1e-9));
        CHECK(f.intercept == Catch::Approx(std::log(0.8)).margin(1e-9));
        CHECK(f.r_squared == Catch::Approx(1.0).margin(1e-12));
    }
    SECTION("rate 0.5") {
        CHECK(rate_fit(planted(2.0, 0.5)).rate == Catch::Approx(0.5).margin(1e-9));
    }
    SECTION("degenerate inputs refused") {
        ErrorReport rep = planted(1.0, 1.0);
        rep.levels[2].strong_error = 0.0;
        CHECK_THROWS_AS(rate_fit(rep), std::domain_error);
        ErrorReport small;
        small.levels.resize(2);
        CHECK_THROWS_AS(rate_fit(small), std::invalid_argument);
    }
}

TEST_CASE("self-comparison error is exactly zero", "[analysis]") {
    const ModelParams p = default_params();
    const ErrorReport rep = convergence_study(p, seeds_from(1, 4), {5}, 5, 2.0, 1, /*headroom=*/0);
    CHECK(rep.levels[0].strong_error == 0.0);
    CHECK(rep.levels[0].pathwise_max == 0.0);
}

TEST_CASE("convergence study contracts", "[analysis]") {
    const ModelParams p = default_params();
    CHECK_THROWS_AS(convergence_study(p, {}, {3}, 6, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(convergence_study(p, seeds_from(1, 4), {5}, 6, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(convergence_study(p, seeds_from(1, 4), {3}, 6, 0.5), std::invalid_argument);
}

TEST_CASE("determinism across thread counts", "[analysis]") {
    const ModelParams p = default_params();
    const auto seeds = seeds_from(100, 10);
    const ErrorReport a = convergence_study(p, seeds, {3, 4, 5}, 7, 2.0, 1);
    const ErrorReport b = convergence_study(p, seeds, {3, 4, 5}, 7, 2.0, 4);
    REQUIRE(a.levels.size() == b.levels.size());
    for (std::size_t i = 0; i < a.levels.size(); ++i) {
        CHECK(a.levels[i].strong_error == b.levels[i].strong_error);
        CHECK(a.levels[i].std_err == b.levels[i].std_err);
        CHECK(a.levels[i].pathwise_p90 == b.levels[i].pathwise_p90);
    }
}

TEST_CASE("linear case matches the analytic truncation error", "[analysis]") {
    // with c1 = 0 and xi = e1, the coupled error at time t has only the modes
    // above 2^l, each an independent OU value:
    //   E||X_ref - X_l||^2 = sum_{k=2^l+1}^{2^ref} (1 - e^{-2 lambda_k t}) / (2 lambda_k)
    ModelParams p = default_params();
    p.c1 = 0.0;
    const int ref = 8;
    const std::vector<int> levels{3, 4, 5};
    const auto seeds = seeds_from(4242, 48);
    const ErrorReport rep = convergence_study(p, seeds, levels, ref, 2.0, 1);
    const OperatorSpec op = p.op();
    for (const auto& le : rep.levels) {
        double analytic = 0.0;
        for (std::size_t k = le.N + 1; k <= (std::size_t{1} << ref); ++k)
            analytic += -std::expm1(-2.0 * eigenvalue(k, op) * p.T) / (2.0 * eigenvalue(k, op));
        INFO("level " << le.level << " got " << le.strong_error << " analytic " << analytic
                      << " se " << le.std_err);
        CHECK(std::abs(le.strong_error - analytic) <= 3.0 * le.std_err);
        CHECK(le.strong_error > 0.0);
    }
    // strictly decreasing truncation error
    CHECK(rep.levels[0].strong_error > rep.levels[1].strong_error);
    CHECK(rep.levels[1].strong_error > rep.levels[2].strong_error);
}

TEST_CASE("pathwise H_varrho error dominates H error", "[analysis]") {
    const ModelParams p = default_params();
    NoiseHierarchy noise{77, 7, 1.0};
    const TrajectoryRecord ref = simulate_path(p, noise, 7);
    const TrajectoryRecord tr = simulate_path(p, noise, 4);
    const OperatorSpec op = p.op();
    for (std::size_t m = 0; m < tr.X.size(); ++m) {
        const auto diff = sub(ref.X[m * 8], project(tr.X[m], ref.X[0].dim()));
        CHECK(hr_norm(diff, p.varrho, op) >= h_norm(diff) * (1.0 - 1e-12));
    }
}

TEST_CASE("a priori bound checker", "[analysis]") {
    const ModelParams p = default_params();

    SECTION("zero trajectory holds trivially") {
        const int level = 3;
        const std::size_t steps = 8;
        TrajectoryRecord tr;
        tr.level = level;
        tr.times.resize(steps + 1);
        for (std::size_t m = 0; m <= steps; ++m)
            tr.times[m] = static_cast<double>(m) / static_cast<double>(steps);
        tr.X.assign(steps + 1, SpectralField(8));
        tr.procs.level = level;
        tr.procs.T = 1.0;
        tr.procs.times = tr.times;
        tr.procs.O.assign(steps + 1, SpectralField(8));
        tr.procs.Psi.assign(steps + 1, SpectralField(8));
        tr.procs.BbO.assign(steps + 1, SpectralField(8));
        const AprioriResult r = apriori_check(tr, default_bound_constants(p), p);
        CHECK(r.lhs_max == 0.0);
        CHECK(r.rhs > 0.0);
        CHECK(r.holds);
        CHECK(std::isinf(r.margin));
    }
    SECTION("holds on simulated paths at level 5") {
        const BoundConstants bc = default_bound_constants(p);
        for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
            NoiseHierarchy noise{seed, 7, 1.0};
            const TrajectoryRecord tr = simulate_path(p, noise, 5);
            const AprioriResult r = apriori_check(tr, bc, p);
            INFO("seed " << seed << " lhs " << r.lhs_max << " rhs " << r.rhs);
            CHECK(r.holds);
            CHECK_FALSE(r.overflow);
        }
    }
    SECTION("rhs is monotone in theta") {
        NoiseHierarchy noise{5, 7, 1.0};
        const TrajectoryRecord tr = simulate_path(p, noise, 4);
        BoundConstants bc = default_bound_constants(p);
        const double r1 = apriori_check(tr, bc, p).rhs;
        bc.theta *= 2.0;
        const double r2 = apriori_check(tr, bc, p).rhs;
        CHECK(r2 > r1);
    }
    SECTION("eta > 0 path stays finite and holds") {
        NoiseHierarchy noise{6, 7, 1.0};
        const TrajectoryRecord tr = simulate_path(p, noise, 4);
        BoundConstants bc = default_bound_constants(p, 0.5);
        const AprioriResult r = apriori_check(tr, bc, p);
        CHECK(std::isfinite(r.rhs));
        CHECK(r.holds);
    }
    SECTION("mapping note names the conventions") {
        CHECK(apriori_mapping_note().find("Psi") != std::string::npos);
    }
}
