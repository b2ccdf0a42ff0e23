#include <svlq/analysis.hpp>
#include <svlq/powernet.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace svlq;

TEST_CASE("second_moment_map basics") {
    // deterministic constant gain: U = (A+BL)' (x) (A+BL)', rho = rho(A+BL)^2
    Scenario ex2 = builtin("example2");
    StochasticSystem det = ex2.sys;
    det.terms.clear();
    AffinePolicy l{Matrix::Identity(2, 2) * -0.1, {}};
    auto sm = second_moment_map(det, l);
    Matrix acl = det.a_bar + det.b_full() * l.k_bar;
    REQUIRE(sm.u_bar.isApprox(kron(acl.transpose(), acl.transpose()), 1e-12));
    double r = spectral_radius(acl);
    REQUIRE(sm.rho == Catch::Approx(r * r).epsilon(1e-10));

    // deadbeat: closed loop identically zero
    auto smdb = second_moment_map(ex2.sys, deadbeat(ex2.sys));
    REQUIRE(smdb.rho == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(is_ms_stable(ex2.sys, deadbeat(ex2.sys)));

    // scalar a=1, sigma^2=0.5, L=-2/3: U = E{(1/3+alpha)^2} = 1/9 + 0.5
    Scenario su = builtin("scalar-unit");
    AffinePolicy smi{Matrix::Constant(1, 1, -2.0 / 3.0), {Matrix::Zero(1, 1)}};
    auto smu = second_moment_map(su.sys, smi);
    REQUIRE(smu.u_bar(0, 0) == Catch::Approx(1.0 / 9.0 + 0.5).epsilon(1e-12));
    double rho = 0.0;
    REQUIRE(is_ms_stable(su.sys, smi, &rho));
    REQUIRE(rho == Catch::Approx(0.61111111).epsilon(1e-6));

    // open loop, zero gain on example 2: report rho of the Kronecker form
    AffinePolicy zero{Matrix::Zero(2, 2), {Matrix::Zero(2, 2), Matrix::Zero(2, 2)}};
    auto smo = second_moment_map(ex2.sys, zero);
    Matrix manual = kron(ex2.sys.a_bar.transpose(), ex2.sys.a_bar.transpose()) +
                    0.01 * kron(ex2.sys.terms[0].basis.transpose(),
                                ex2.sys.terms[0].basis.transpose()) +
                    0.09 * kron(ex2.sys.terms[1].basis.transpose(),
                                ex2.sys.terms[1].basis.transpose());
    REQUIRE(smo.rho == Catch::Approx(spectral_radius(manual)).epsilon(1e-12));
}

TEST_CASE("policy_value_infinite: optimal and suboptimal scalar policies") {
    Scenario su = builtin("scalar-unit");
    auto [cert, gain] = infinite_lmi(su.sys, su.cost);

    // evaluating the optimal LMI policy (gain plus correction) returns P = 2
    Matrix p = policy_value_infinite(su.sys, su.cost, gain.policy(su.sys));
    REQUIRE(p(0, 0) == Catch::Approx(2.0).margin(1e-9));

    // the constant gain L = -2/3 without the correction costs more:
    // p = (1 + 4/9) / (1 - 0.6111...) = 3.7142857...
    AffinePolicy constant{Matrix::Constant(1, 1, -2.0 / 3.0), {Matrix::Zero(1, 1)}};
    Matrix pc = policy_value_infinite(su.sys, su.cost, constant);
    REQUIRE(pc(0, 0) == Catch::Approx(26.0 / 7.0).epsilon(1e-10));
}

TEST_CASE("policy value agrees with the optimal certificates") {
    for (const char* name : {"example1", "example2"}) {
        Scenario sc = builtin(name);
        SolveOptions opt{1e-10, 400000};
        auto [cert, gain] = infinite_lmi(sc.sys, sc.cost, opt);
        Matrix p = policy_value_infinite(sc.sys, sc.cost, gain.policy(sc.sys));
        REQUIRE((p - cert.p).cwiseAbs().maxCoeff() <=
                1e-8 * (1.0 + cert.p.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("truncated W-sum matches evaluate_finite") {
    Scenario ex2 = builtin("example2");
    auto [cert, gain] = infinite_lmi(ex2.sys, ex2.cost);
    AffinePolicy pol = gain.policy(ex2.sys);
    auto sm = second_moment_map(ex2.sys, pol);
    Matrix r = ex2.cost.r_full(ex2.sys.structure);
    Matrix w0 = ex2.cost.q + pol.k_bar.transpose() * r * pol.k_bar;
    for (size_t s = 0; s < ex2.sys.terms.size(); ++s)
        w0 += ex2.sys.terms[s].variance * pol.corrections[s].transpose() * r *
              pol.corrections[s];
    const int T = 40;
    Matrix sum = Matrix::Zero(2, 2), w = w0;
    for (int k = 0; k < T; ++k) {
        sum += w;
        w = vec_inv(sm.u_bar * vec(w), 2, 2);
    }
    CostSpec cost = ex2.cost;
    cost.q_terminal = Matrix::Zero(2, 2);
    auto p0 = evaluate_finite(ex2.sys, cost, std::vector<AffinePolicy>(T, pol), T);
    REQUIRE((sum - p0[0]).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("degradation_ratio") {
    Matrix p = Matrix::Identity(3, 3) * 2.0;
    REQUIRE(degradation_ratio(p, p).r == Catch::Approx(1.0));

    Scenario ex2 = builtin("example2");
    auto [pl, gl] = infinite_lmi(ex2.sys, ex2.cost);
    auto [pf, gf] = infinite_fmi(ex2.sys, ex2.cost);
    RatioReport rep = degradation_ratio(pl.p, pf.p);
    REQUIRE(rep.r - 1.0 == Catch::Approx(1.2660e-6).epsilon(0.2));

    // congruence invariance
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> d(-1, 1);
    Matrix t(2, 2);
    do {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) t(i, j) = d(rng);
    } while (std::abs(t.determinant()) < 0.2);
    double rt = degradation_ratio(t.transpose() * pl.p * t, t.transpose() * pf.p * t).r;
    REQUIRE(rt == Catch::Approx(rep.r).epsilon(1e-10));

    // less information in the numerator cannot shrink the ratio
    auto [ps, gs] = infinite_smi(ex2.sys, ex2.cost);
    REQUIRE(degradation_ratio(ps.p, pf.p).r >= rep.r - 1e-10);
}

TEST_CASE("epsilon_bound") {
    Scenario ex2 = builtin("example2");
    auto eb = epsilon_bound(ex2.sys);
    REQUIRE(eb.has_value());
    REQUIRE(eb->first == Catch::Approx(1.0));
    REQUIRE(eb->second == Catch::Approx(2.0));

    Scenario ex1 = builtin("example1");
    REQUIRE_FALSE(epsilon_bound(ex1.sys).has_value());

    StochasticSystem scaled = ex2.sys;
    scaled.b_blocks = {2.0 * Matrix::Identity(1, 1), 2.0 * Matrix::Identity(1, 1)};
    auto eb2 = epsilon_bound(scaled);
    REQUIRE(eb2->first == Catch::Approx(2.0));
    REQUIRE(eb2->second == Catch::Approx(1.25));
}

TEST_CASE("geometric-sum convergence matches the resolvent") {
    Scenario ex2 = builtin("example2");
    auto [cert, gain] = infinite_lmi(ex2.sys, ex2.cost);
    AffinePolicy pol = gain.policy(ex2.sys);
    auto sm = second_moment_map(ex2.sys, pol);
    REQUIRE(sm.rho < 1.0);
    Matrix p = policy_value_infinite(ex2.sys, ex2.cost, pol);
    // truncate far enough that the geometric tail is negligible
    int T = static_cast<int>(std::ceil(std::log(1e-13) / std::log(sm.rho))) + 1;
    CostSpec cost = ex2.cost;
    cost.q_terminal = Matrix::Zero(2, 2);
    auto trunc = evaluate_finite(ex2.sys, cost, std::vector<AffinePolicy>(T, pol), T);
    REQUIRE((trunc[0] - p).cwiseAbs().maxCoeff() <= 1e-8);
}
