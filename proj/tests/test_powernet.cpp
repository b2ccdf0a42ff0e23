#include <svlq/analysis.hpp>
#include <svlq/powernet.hpp>

#include <catch2/catch_amalgamated.hpp>

using namespace svlq;

TEST_CASE("equilibrium") {
    // zero injections: the origin
    auto [z1, z2] = equilibrium(0.4, 0.5, 0.5, 0.0, 0.0);
    REQUIRE(z1 == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(z2 == Catch::Approx(0.0).margin(1e-12));

    // symmetric network and injections: equal angles
    auto [s1, s2] = equilibrium(0.4, 0.5, 0.5, 1.3, 1.3);
    REQUIRE(s1 == Catch::Approx(s2).margin(1e-12));

    // nominal operating point sits on the principal branch
    auto [d1, d2] = equilibrium(0.4, 0.5, 0.5, 1.6, 1.2);
    REQUIRE(std::abs(d1) < M_PI / 2);
    REQUIRE(std::abs(d2) < M_PI / 2);
    // residual check
    double a12 = 2.5, a1 = 2.0, a2 = 2.0;
    REQUIRE(a12 * std::sin(d1 - d2) + a1 * std::sin(d1) == Catch::Approx(1.6).margin(1e-11));
    REQUIRE(a12 * std::sin(d2 - d1) + a2 * std::sin(d2) == Catch::Approx(1.2).margin(1e-11));
}

TEST_CASE("swing linearization against finite differences") {
    SwingParams p;
    auto [e1, e2] = equilibrium(p.c12, p.c1, p.c2, p.p1, p.p2);
    Vector x(4);
    x << e1, 0.0, e2, 0.0;
    Matrix j = swing_jacobian(p, x);
    const double h = 1e-6;
    for (int c = 0; c < 4; ++c) {
        Vector xp = x, xm = x;
        xp(c) += h;
        xm(c) -= h;
        Vector col = (swing_field(p, xp) - swing_field(p, xm)) / (2 * h);
        for (int r = 0; r < 4; ++r)
            REQUIRE(j(r, c) == Catch::Approx(col(r)).margin(1e-6 * (1.0 + std::abs(col(r)))));
    }
    // the field itself vanishes at the equilibrium
    REQUIRE(swing_field(p, x).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("droop linearization against finite differences") {
    DroopParams p;
    auto [e1, e2] = equilibrium(p.c12, p.c1, p.c2, p.p1, p.p2);
    Vector x(2);
    x << e1, e2;
    Matrix j = droop_jacobian(p, x);
    const double h = 1e-6;
    for (int c = 0; c < 2; ++c) {
        Vector xp = x, xm = x;
        xp(c) += h;
        xm(c) -= h;
        Vector col = (droop_field(p, xp) - droop_field(p, xm)) / (2 * h);
        for (int r = 0; r < 2; ++r)
            REQUIRE(j(r, c) == Catch::Approx(col(r)).margin(1e-6 * (1.0 + std::abs(col(r)))));
    }
}

TEST_CASE("build_swing_system structure") {
    SwingParams p;
    StochasticSystem sys = build_swing_system(p);
    REQUIRE(sys.n() == 4);
    REQUIRE(sys.m() == 2);
    REQUIRE(sys.a_bar(0, 1) == Catch::Approx(p.dt));
    REQUIRE(sys.a_bar(0, 0) == Catch::Approx(1.0));
    REQUIRE(sys.a_bar(3, 3) == Catch::Approx(1.0 - p.dt * p.d2 / p.m2));
    REQUIRE(validate(sys, CostSpec::identity(sys.structure)).empty());

    // dt -> 0: A -> I
    SwingParams tiny = p;
    tiny.dt = 1e-9;
    StochasticSystem small = build_swing_system(tiny);
    REQUIRE((small.a_bar - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-6);

    // the stochastic bases sit at the local frequency rows
    REQUIRE(sys.terms[0].basis(1, 0) ==
            Catch::Approx(-p.dt * std::cos(equilibrium(p.c12, p.c1, p.c2, p.p1, p.p2).first) /
                          p.m1));
    REQUIRE(sys.terms[1].basis.cwiseAbs().maxCoeff() ==
            Catch::Approx(std::abs(sys.terms[1].basis(3, 2))));
}

TEST_CASE("build_droop_system matches the reference model") {
    DroopParams p;
    StochasticSystem sys = build_droop_system(p);
    Matrix printed(2, 2);
    printed << -0.1635, 0.7486, 0.7486, -0.1897;
    REQUIRE((sys.a_bar - printed).cwiseAbs().maxCoeff() <= 1e-3);
    REQUIRE(sys.terms[0].basis(0, 0) == Catch::Approx(-0.2075).margin(1e-3));
    // the bus-2 sensitivity is anchored when the override is supplied
    DroopParams anchored = p;
    anchored.load_coeff2 = -0.0877;
    StochasticSystem a = build_droop_system(anchored);
    REQUIRE(a.terms[1].basis(1, 1) == Catch::Approx(-0.0877));
    REQUIRE(validate(a, CostSpec::identity(a.structure)).empty());
}

TEST_CASE("builtin scenarios") {
    for (const char* name : {"example1", "example2", "example2-highvar", "scalar-unit"}) {
        Scenario sc = builtin(name);
        REQUIRE(validate(sc.sys, sc.cost).empty());
        REQUIRE(sc.x0.size() == sc.sys.n());
    }
    REQUIRE_THROWS_AS(builtin("nope"), std::invalid_argument);

    Scenario su = builtin("scalar-unit");
    REQUIRE(su.sys.a_bar(0, 0) == 1.0);
    REQUIRE(su.sys.terms[0].variance == 0.5);

    auto eb = epsilon_bound(builtin("example2").sys);
    REQUIRE(eb.has_value());
    REQUIRE(eb->first == Catch::Approx(1.0));

    Scenario hv = builtin("example2-highvar");
    REQUIRE(hv.sys.terms[0].variance == Catch::Approx(1e6));
    REQUIRE(hv.sys.terms[1].variance == Catch::Approx(9e6));
    REQUIRE(hv.sys.a_bar.isApprox(builtin("example2").sys.a_bar));
}
