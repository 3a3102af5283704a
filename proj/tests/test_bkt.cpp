#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "entrosim/bkt.hpp"

using namespace entrosim;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS((BktParams{0.0, 1.0, 1.0, 1}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((BktParams{1.0, -1.0, 1.0, 1}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((BktParams{1.0, 1.0, 1.0, 0}.validate()), std::invalid_argument);
    const BktParams p{0.5, 1.2, 3.0, 10};
    CHECK(p.K0() == doctest::Approx(0.6));
    CHECK(p.y0() == doctest::Approx(std::exp(-1.5)));
    CHECK(p.y_eff() == doctest::Approx(std::exp(-1.5) / 10.0));
}

TEST_CASE("zero fugacity is a fixed line") {
    const BktParams p{0.8, 1.0, std::numeric_limits<double>::infinity(), 1};
    const auto traj = integrate_flow(p, 10.0);
    CHECK(traj.termination == FlowTermination::ReachedLMax);
    CHECK_FALSE(traj.l_star.has_value());
    for (const auto& pt : traj.points) CHECK(pt.K == doctest::Approx(p.K0()).epsilon(1e-14));
}

TEST_CASE("ordered side: y initially decreases for K0 > 2/pi") {
    const BktParams p{1.0, 1.0, 6.0, 1};  // K0 = 1 > 2/pi
    const auto traj = integrate_flow(p, 5.0);
    REQUIRE(traj.points.size() >= 2);
    CHECK(traj.points[1].y < traj.points[0].y);
}

TEST_CASE("disordered side matches the frozen-K linearized flow while it applies") {
    const BktParams p{0.3, 1.0, 0.0001, 1};  // K0 = 0.3, y0 ~ 1
    BktParams small = p;
    small.E_c = 18.0;  // y0 ~ 1.5e-8, long linear window
    const auto traj = integrate_flow(small, 40.0);
    REQUIRE(traj.l_star.has_value());
    const double a = 2.0 - kPi * small.K0();
    for (const auto& pt : traj.points) {
        if (pt.y > 0.1 * small.y_star) break;
        if (std::abs(pt.K - small.K0()) / small.K0() > 0.01) break;
        const double linear = small.y_eff() * std::exp(a * pt.l);
        CHECK(pt.y == doctest::Approx(linear).epsilon(0.01));
    }
}

TEST_CASE("K never increases and ln y is convex along the flow") {
    const BktParams p{0.45, 1.0, 8.0, 1};
    const auto traj = integrate_flow(p, 60.0);
    REQUIRE(traj.points.size() >= 3);
    double prev_slope = -1e300;
    for (std::size_t i = 1; i < traj.points.size(); ++i) {
        const auto& a = traj.points[i - 1];
        const auto& b = traj.points[i];
        CHECK(b.K <= a.K * (1.0 + 1e-12));
        if (b.y > 0.0 && a.y > 0.0 && b.l > a.l) {
            const double slope = (std::log(b.y) - std::log(a.y)) / (b.l - a.l);
            CHECK(slope >= prev_slope - 1e-7);
            prev_slope = slope;
        }
    }
}

TEST_CASE("proliferation scale shifts by ln M / (2 - pi K0)") {
    const BktParams base{0.45, 1.0, 11.0, 1};
    const auto t1 = integrate_flow(base, 80.0);
    BktParams entropic = base;
    entropic.M = 100;
    const auto tM = integrate_flow(entropic, 80.0);
    REQUIRE(t1.l_star.has_value());
    REQUIRE(tM.l_star.has_value());
    const double shift = *tM.l_star - *t1.l_star;
    const double expected = std::log(100.0) / (2.0 - kPi * base.K0());
    CHECK(shift == doctest::Approx(expected).epsilon(0.10));
}

TEST_CASE("halving the tolerance moves l_star by less than 1e-6") {
    const BktParams p{0.5, 1.0, 7.0, 10};
    const auto a = integrate_flow(p, 80.0, 1e-10);
    const auto b = integrate_flow(p, 80.0, 5e-11);
    REQUIRE(a.l_star.has_value());
    REQUIRE(b.l_star.has_value());
    CHECK(std::abs(*a.l_star - *b.l_star) < 1e-6);
}

TEST_CASE("correlation length is monotone in M and infinite deep in the ordered side") {
    const BktParams base{0.5, 1.0, 5.0, 1};
    double prev = 0.0;
    for (const long M : {1L, 10L, 100L}) {
        BktParams p = base;
        p.M = M;
        const auto xi = bkt_correlation_length(p);
        REQUIRE(xi.has_value());
        CHECK(*xi > prev);
        prev = *xi;
    }
    const BktParams ordered{5.0, 1.0, 5.0, 1};  // K0 = 5 >> 2/pi
    CHECK_FALSE(bkt_correlation_length(ordered).has_value());
}

TEST_CASE("nu_eff") {
    CHECK(nu_eff(1.0 / kPi) == doctest::Approx(1.0));
    CHECK(nu_eff(0.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(nu_eff(2.0 / kPi), std::domain_error);
    CHECK_THROWS_AS(nu_eff(1.0), std::domain_error);
}

TEST_CASE("vortex kinetics") {
    const BktParams p1{0.5, 1.0, 3.0, 1};
    const auto v1 = vortex_kinetics(p1, 2.0);
    CHECK(v1.D_eff == doctest::Approx(2.0));
    CHECK(v1.gamma_slip_scale == doctest::Approx(p1.y0() * 2.0));

    BktParams p2 = p1;
    p2.M = 2;
    const auto v2 = vortex_kinetics(p2, 2.0);
    CHECK(v2.gamma_slip_scale == doctest::Approx(v1.gamma_slip_scale / 4.0).epsilon(1e-12));
    CHECK_THROWS_AS(vortex_kinetics(p1, 0.0), std::invalid_argument);
}

TEST_CASE("crossover scale decreases with M and sits below the bare transition") {
    const BktParams tmpl{0.3, 1.0, 10.0, 1};
    double prev = 1e300;
    double beta_bkt = 0.0;
    for (const long M : {1L, 4L, 16L}) {
        BktParams p = tmpl;
        p.M = M;
        const auto res = crossover_beta(p, 100.0);
        beta_bkt = res.beta_bkt;
        CHECK(res.beta_c < beta_bkt);
        CHECK(res.beta_c < prev);
        prev = res.beta_c;
    }
    CHECK(beta_bkt > 2.0 / kPi);  // bare K at the transition exceeds the fixed point
}
