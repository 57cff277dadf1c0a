#include <cmath>
#include <random>

#include "doctest.h"
#include "plds/linear_flow.hpp"
#include "plds/model.hpp"

using namespace plds;

namespace {

PwlCurve ref_k1() { return build_curve({{1, 2}, {2, 0}}, 1, 2); }

// Fixed-step classic Runge-Kutta integration of the affine field, used as an
// independent oracle for the closed-form flow.
Vec2 rk4_flow(const RegionFlow& rf, Vec2 p, double t, int steps) {
    double h = t / steps;
    for (int i = 0; i < steps; ++i) {
        Vec2 k1 = rf.field(p);
        Vec2 k2 = rf.field(p + 0.5 * h * k1);
        Vec2 k3 = rf.field(p + 0.5 * h * k2);
        Vec2 k4 = rf.field(p + h * k3);
        p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return p;
}

RegionFlow random_strip_system(std::mt19937& rng) {
    std::uniform_real_distribution<double> uk(0.3, 3.0), ua(0.2, 4.0), ub(0.5, 6.0);
    std::uniform_int_distribution<int> uregion(1, 3);
    PwlCurve c = build_curve({{1, 2}, {2, 0}}, 1, 2);
    // Vary the dynamics, not the geometry: the flow formula only sees the
    // piece's slope and the parameters.
    SystemParams p{ua(rng), ub(rng)};
    RegionFlow rf = region_system(c, p, c.region(uregion(rng)));
    (void)uk;
    return rf;
}

}  // namespace

TEST_CASE("region systems carry the expected eigen data") {
    PwlCurve c = ref_k1();

    RegionFlow r1 = region_system(c, {3.0, 5.0}, c.region(1));
    REQUIRE(r1.eigen.type == EigenData::Type::ComplexPair);
    CHECK(r1.eigen.sigma == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(r1.eigen.omega == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));

    RegionFlow r2 = region_system(c, {3.0, 5.0}, c.region(2));
    REQUIRE(r2.eigen.type == EigenData::Type::ComplexPair);
    CHECK(r2.J.trace() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r2.eigen.sigma == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(r2.eigen.omega == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-14));

    RegionFlow s2 = region_system(c, {1.0, 2.5}, c.region(2));
    REQUIRE(s2.eigen.type == EigenData::Type::RealDistinct);
    CHECK(s2.eigen.l1 * s2.eigen.l2 == doctest::Approx(-1.0).epsilon(1e-12));  // saddle
}

TEST_CASE("equilibrium solves the affine system") {
    PwlCurve c = ref_k1();
    for (int r = 1; r <= 3; ++r) {
        RegionFlow rf = region_system(c, {1.3, 2.7}, c.region(r));
        REQUIRE(rf.equilibrium.has_value());
        Vec2 residual = rf.field(*rf.equilibrium);
        CHECK(norm(residual) < 1e-12);
    }
}

TEST_CASE("flow_state identity at t = 0 and semigroup property") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> up(-3.0, 5.0), ut(0.0, 2.0);
    for (int i = 0; i < 1000; ++i) {
        RegionFlow rf = random_strip_system(rng);
        Vec2 p{up(rng), up(rng)};
        double s = ut(rng), t = ut(rng);
        Vec2 p0 = rf.flow(p, 0.0);
        CHECK(norm(p0 - p) < 1e-13);
        Vec2 two_step = rf.flow(rf.flow(p, s), t);
        Vec2 one_step = rf.flow(p, s + t);
        CHECK(norm(two_step - one_step) <= 1e-12 * (1.0 + norm(one_step)));
    }
}

TEST_CASE("flow_state matches Runge-Kutta integration on random strip systems") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> up(-2.0, 4.0), ut(0.1, 5.0);
    for (int i = 0; i < 200; ++i) {
        RegionFlow rf = random_strip_system(rng);
        Vec2 p{up(rng), up(rng)};
        double t = ut(rng);
        Vec2 exact = rf.flow(p, t);
        Vec2 numeric = rk4_flow(rf, p, t, 50000);
        CHECK(norm(exact - numeric) <= 1e-8 * (1.0 + norm(exact)));
    }
}

TEST_CASE("spiral distance to the equilibrium contracts like exp(sigma t)") {
    PwlCurve c = ref_k1();
    RegionFlow rf = region_system(c, {3.0, 5.0}, c.region(1));  // sigma=-1, omega=sqrt(3)
    Vec2 eq = *rf.equilibrium;
    Vec2 p = eq + Vec2{0.4, -0.3};
    double period = 2.0 * M_PI / rf.eigen.omega;
    double r0 = norm(p - eq);
    double r1 = norm(rf.flow(p, period) - eq);
    CHECK(r1 / r0 == doctest::Approx(std::exp(rf.eigen.sigma * period)).epsilon(1e-10));
}

TEST_CASE("boundary crossing: half-turn from the sewing line") {
    PwlCurve c = ref_k1();
    RegionFlow rf = region_system(c, {3.0, 5.0}, c.region(1));
    // Equilibrium sits exactly on the x=1 sewing line here.
    REQUIRE(rf.equilibrium->x == doctest::Approx(1.0).epsilon(1e-14));
    double pi_over_w = M_PI / rf.eigen.omega;
    for (double s0 : {0.5, 0.1, 1e-3, 1e-6}) {
        CrossEvent ev = boundary_crossing(rf, {1.0, 2.0 - s0}, -INFINITY, 1.0);
        REQUIRE(ev.terminal == CrossEvent::Terminal::Crossed);
        CHECK(ev.tau == doctest::Approx(pi_over_w).epsilon(1e-9));
        // Half-turn contraction of the section coordinate.
        double s1 = ev.exit_point.y - 2.0;
        CHECK(s1 == doctest::Approx(s0 * std::exp(rf.eigen.sigma * pi_over_w)).epsilon(1e-10));
    }
}

TEST_CASE("boundary crossing: equilibrium start converges immediately") {
    PwlCurve c = ref_k1();
    RegionFlow rf = region_system(c, {1.3, 2.6}, c.region(1));
    CrossEvent ev = boundary_crossing(rf, *rf.equilibrium, -INFINITY, 1.0);
    CHECK(ev.terminal == CrossEvent::Terminal::ConvergedToEquilibrium);
    CHECK(ev.tau == 0.0);
}

TEST_CASE("boundary crossing: stable separatrix converges to the saddle") {
    PwlCurve c = ref_k1();
    RegionFlow rf = region_system(c, {1.0, 2.5}, c.region(2));
    REQUIRE(rf.eigen.type == EigenData::Type::RealDistinct);
    double ls = rf.eigen.l2;  // negative eigenvalue
    REQUIRE(ls < 0.0);
    // Eigenvector of [[k2,1],[-alpha,-1]] for eigenvalue ls: (1, ls - k2).
    Vec2 dir{1.0, ls - 2.0};
    Vec2 p = *rf.equilibrium + (0.2 / norm(dir)) * dir;
    CrossEvent ev = boundary_crossing(rf, p, 1.0, 2.0);
    CHECK(ev.terminal == CrossEvent::Terminal::ConvergedToEquilibrium);
}

TEST_CASE("boundary crossing lands on the bound to tolerance") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> uy(-1.0, 3.0);
    PwlCurve c = ref_k1();
    RegionFlow rf = region_system(c, {2.5, 4.5}, c.region(2));
    for (int i = 0; i < 50; ++i) {
        Vec2 p{1.0, uy(rng)};
        CrossEvent ev = boundary_crossing(rf, p, 1.0, 2.0);
        if (ev.terminal != CrossEvent::Terminal::Crossed) continue;
        CHECK((std::fabs(ev.exit_point.x - 1.0) <= 1e-12 ||
               std::fabs(ev.exit_point.x - 2.0) <= 1e-12));
        CHECK(ev.tau >= 0.0);
    }
}
