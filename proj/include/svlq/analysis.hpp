// Mean-square stability certification through the second-moment transition
// operator, exact infinite-horizon policy evaluation, and the performance
// degradation ratio with its full-actuation upper bound.
#pragma once

#include "synthesis.hpp"

#include <optional>

namespace svlq {

// U_bar = E{(A + B Gamma)' (x) (A + B Gamma)'} for an affine policy; its
// spectral radius below one certifies mean-square stability of the closed
// loop. Only first and second moments of the alphas enter.
struct SecondMomentMap {
    Matrix u_bar;  // n^2 x n^2
    double rho = 0.0;
};

inline SecondMomentMap second_moment_map(const StochasticSystem& sys,
                                         const AffinePolicy& policy) {
    if (!policy.corrections.empty() && policy.corrections.size() != sys.terms.size())
        throw std::invalid_argument("second_moment_map: corrections/terms mismatch");
    Matrix b = sys.b_full();
    Matrix mbar = (sys.a_bar + b * policy.k_bar).transpose();
    SecondMomentMap sm;
    sm.u_bar = kron(mbar, mbar);
    for (size_t s = 0; s < sys.terms.size(); ++s) {
        Matrix c = policy.corrections.empty() ? Matrix::Zero(sys.m(), sys.n())
                                              : policy.corrections[s];
        Matrix d = (sys.terms[s].basis + b * c).transpose();
        sm.u_bar += sys.terms[s].variance * kron(d, d);
    }
    sm.rho = spectral_radius(sm.u_bar);
    return sm;
}

inline bool is_ms_stable(const StochasticSystem& sys, const AffinePolicy& policy,
                         double* rho_out = nullptr) {
    double rho = second_moment_map(sys, policy).rho;
    if (rho_out) *rho_out = rho;
    return rho < 1.0 - 1e-10;
}

// Exact infinite-horizon value of a mean-square stabilizing policy:
// P = vec_inv((I - U_bar)^{-1} vec(Q + E{Gamma' R Gamma})). Dense LU with a
// conditioning warning threshold of 1e12 by contract; at the target scale
// n^2 stays small.
inline Matrix policy_value_infinite(const StochasticSystem& sys, const CostSpec& cost,
                                    const AffinePolicy& policy) {
    SecondMomentMap sm = second_moment_map(sys, policy);
    if (sm.rho >= 1.0 - 1e-10)
        throw std::domain_error("policy_value_infinite: policy is not mean-square stabilizing");
    Matrix r = cost.r_full(sys.structure);
    Matrix w0 = cost.q + policy.k_bar.transpose() * r * policy.k_bar;
    for (size_t s = 0; s < sys.terms.size(); ++s) {
        if (policy.corrections.empty()) break;
        const Matrix& c = policy.corrections[s];
        w0 += sys.terms[s].variance * c.transpose() * r * c;
    }
    int n = sys.n();
    Matrix lhs = Matrix::Identity(n * n, n * n) - sm.u_bar;
    Eigen::PartialPivLU<Matrix> lu(lhs);
    // The geometric series sums as W = w0 + vec_inv(U_bar (I-U_bar)^{-1} vec w0),
    // i.e. solve (I - U_bar) vec(P) = vec(w0).
    Vector vp = lu.solve(vec(w0));
    return symmetrize(vec_inv(vp, n, n));
}

struct RatioReport {
    double r = 1.0;
    Matrix p_num, p_den;
    std::optional<double> epsilon;  // min_i sigma_min(B_ii) when fully actuated
    std::optional<double> bound;    // 1 + 1/epsilon^2
};

inline RatioReport degradation_ratio(const Matrix& p_num, const Matrix& p_den) {
    RatioReport rep;
    rep.p_num = p_num;
    rep.p_den = p_den;
    rep.r = max_gen_eig(p_num, p_den);
    return rep;
}

// epsilon = min_i sigma_min(B_ii) when every B_ii is square with positive
// smallest singular value; the degradation ratio is then bounded by
// 1 + 1/epsilon^2 (after the Q = R = I normalization).
inline std::optional<std::pair<double, double>> epsilon_bound(const StochasticSystem& sys) {
    double eps = std::numeric_limits<double>::infinity();
    for (int i = 0; i < sys.structure.subsystems(); ++i) {
        if (sys.structure.input_dims[i] != sys.structure.state_dims[i]) return std::nullopt;
        Eigen::JacobiSVD<Matrix> svd(sys.b_blocks[i]);
        double smin = svd.singularValues().minCoeff();
        if (smin <= 0.0) return std::nullopt;
        eps = std::min(eps, smin);
    }
    return std::make_pair(eps, 1.0 + 1.0 / (eps * eps));
}

}  // namespace svlq
