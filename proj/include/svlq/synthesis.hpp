// Optimal gain synthesis for the three information regimes (limited / full /
// statistical model information) plus the deadbeat law, finite and infinite
// horizon. The infinite-horizon solver is the monotone fixed-point iteration
// X_{i+1} = f(X_i), X_0 = 0, on the modified discrete algebraic Riccati
// equation of the requested regime.
#pragma once

#include "model.hpp"

#include <functional>
#include <limits>

namespace svlq {

// Realization-affine state feedback: u(k) = (k_bar + sum_s alpha_s(k) C_s) x(k).
// Covers all four policy classes; constant gains carry zero corrections.
// For limited-information policies, C_s is nonzero only in the input
// block-rows of the term's own subsystem, so the information pattern is
// honored structurally.
struct AffinePolicy {
    Matrix k_bar;                    // m x n
    std::vector<Matrix> corrections; // one m x n per system term (may be empty)

    Matrix realized(const std::vector<double>& alphas) const {
        Matrix k = k_bar;
        for (size_t s = 0; s < corrections.size(); ++s) k += alphas[s] * corrections[s];
        return k;
    }
};

struct LmiGain {
    Matrix k_bar;                    // m x n mean-part gain
    std::vector<Matrix> corrections; // per term, m_i x n (block of the full correction)

    AffinePolicy policy(const StochasticSystem& sys) const {
        AffinePolicy p{k_bar, {}};
        for (size_t s = 0; s < sys.terms.size(); ++s) {
            Matrix c = Matrix::Zero(sys.m(), sys.n());
            int i = sys.terms[s].subsystem;
            c.block(sys.structure.input_offset(i), 0, sys.structure.input_dims[i], sys.n()) =
                corrections[s];
            p.corrections.push_back(c);
        }
        return p;
    }
};

struct FmiGain {
    Matrix h;  // u(k) = h * A(k) * x(k)

    AffinePolicy policy(const StochasticSystem& sys) const {
        AffinePolicy p{h * sys.a_bar, {}};
        for (const auto& t : sys.terms) p.corrections.push_back(h * t.basis);
        return p;
    }
};

struct SmiGain {
    Matrix l;  // constant

    AffinePolicy policy(const StochasticSystem& sys) const {
        AffinePolicy p{l, {}};
        for (size_t s = 0; s < sys.terms.size(); ++s)
            p.corrections.push_back(Matrix::Zero(sys.m(), sys.n()));
        return p;
    }
};

struct ValueCertificate {
    Matrix p;
    int iterations = 0;
    double residual = 0.0;        // ||f(P) - P||_max at the returned P
    double min_step_eig = 0.0;    // min over iterates of lambda_min(X_{i+1}-X_i), if tracked
    std::string regime;
};

struct SolveOptions {
    double tol = 1e-12;
    int max_iter = 100000;
    double cap = 1e12;            // magnitude cap for divergence detection
    bool track_monotone = false;  // record min eigenvalue of iterate steps
};

// Non-convergence of the fixed point is evidence (not proof) that the system
// is not mean-square stabilizable in the requested regime.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Limited-information Riccati map: f(X) = Q + R(Abar,X,B,R)
//                                        + sum_i E{R(A~_i, X, B_i, R_ii)}.
// The expectation reduces to sigma^2 D' M_i D with the middle factor M_i
// independent of the realization.
inline Matrix lmi_map(const StochasticSystem& sys, const Matrix& q, const Matrix& b,
                      const Matrix& r, const CostSpec& cost, const Matrix& x) {
    Matrix out = q + riccati_op(sys.a_bar, x, b, r);
    for (int i = 0; i < sys.structure.subsystems(); ++i) {
        auto ti = atilde_terms(sys, i);
        if (ti.empty()) continue;
        Matrix mid = riccati_middle(x, embed_b(sys, i), cost.r_blocks[i]);
        out += expected_quad(ti, mid);
    }
    return symmetrize(out);
}

// Full-information map: every expectation term uses the full B and R.
inline Matrix fmi_map(const StochasticSystem& sys, const Matrix& q, const Matrix& b,
                      const Matrix& r, const Matrix& x) {
    Matrix mid = riccati_middle(x, b, r);
    Matrix out = q + symmetrize(sys.a_bar.transpose() * mid * sys.a_bar);
    out += expected_quad(all_terms(sys), mid);
    return symmetrize(out);
}

// Statistical-information (constant gain) map: f(X) = Q + R(Abar,X,B,R) + E{A~'XA~}.
inline Matrix smi_map(const StochasticSystem& sys, const Matrix& q, const Matrix& b,
                      const Matrix& r, const Matrix& x) {
    Matrix out = q + riccati_op(sys.a_bar, x, b, r);
    out += expected_quad(all_terms(sys), x);
    return symmetrize(out);
}

inline Matrix mean_gain(const StochasticSystem& sys, const Matrix& p, const Matrix& b,
                        const Matrix& r) {
    Matrix g = r + b.transpose() * p * b;
    return -Eigen::LDLT<Matrix>(symmetrize(g)).solve(b.transpose() * p * sys.a_bar);
}

inline LmiGain lmi_gain_from(const StochasticSystem& sys, const CostSpec& cost,
                             const Matrix& p, const Matrix& b, const Matrix& r) {
    LmiGain g;
    g.k_bar = mean_gain(sys, p, b, r);
    for (const auto& t : sys.terms) {
        int i = t.subsystem;
        Matrix bi = embed_b(sys, i);
        Matrix gi = cost.r_blocks[i] + bi.transpose() * p * bi;
        Matrix mi = -Eigen::LDLT<Matrix>(symmetrize(gi)).solve(bi.transpose() * p);
        g.corrections.push_back(mi * t.basis);
    }
    return g;
}

inline FmiGain fmi_gain_from(const Matrix& p, const Matrix& b, const Matrix& r) {
    Matrix g = r + b.transpose() * p * b;
    return {-Eigen::LDLT<Matrix>(symmetrize(g)).solve(Matrix(b.transpose() * p))};
}

// Monotone value iteration from X_0 = 0 with divergence cap. The default
// 1e-12 absolute stopping tolerance can sit below the double-precision floor
// when ||P|| is large (the expectation terms amplify the cancellation error
// of the middle factor by sigma^2 ||D||^2); an iterate that has stalled at a
// small relative difference is accepted and the true residual reported.
inline ValueCertificate fixed_point(const std::function<Matrix(const Matrix&)>& f, int n,
                                    const SolveOptions& opt, const std::string& regime,
                                    const std::string& diverge_msg) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    Matrix x = Matrix::Zero(n, n);
    ValueCertificate cert;
    cert.regime = regime;
    cert.min_step_eig = std::numeric_limits<double>::infinity();
    double best_diff = std::numeric_limits<double>::infinity();
    int last_improve = 0;
    for (int i = 0; i < opt.max_iter; ++i) {
        Matrix xn = f(x);
        double diff = (xn - x).cwiseAbs().maxCoeff();
        if (opt.track_monotone) cert.min_step_eig = std::min(cert.min_step_eig, min_eig_sym(xn - x));
        double mag = xn.cwiseAbs().maxCoeff();
        if (!std::isfinite(mag) || mag > opt.cap) throw DivergenceError(diverge_msg);
        x = xn;
        if (diff < best_diff - 0.25 * eps * (1.0 + mag)) {
            best_diff = diff;
            last_improve = i;
        }
        bool at_floor = diff <= 1e-8 * (1.0 + mag) && i - last_improve >= 64;
        if (diff <= opt.tol || at_floor) {
            cert.p = x;
            cert.iterations = i + 1;
            cert.residual = (f(x) - x).cwiseAbs().maxCoeff();
            if (!is_pd(cert.p)) throw DivergenceError(regime + ": fixed point is not PD");
            return cert;
        }
    }
    throw DivergenceError(diverge_msg);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Finite horizon

struct FiniteLmi {
    std::vector<Matrix> p_schedule;   // P(0..T)
    std::vector<LmiGain> gains;       // K(0..T-1)
};

inline FiniteLmi finite_lmi(const StochasticSystem& sys, const CostSpec& cost, int horizon) {
    if (horizon < 1) throw std::invalid_argument("finite_lmi: horizon must be >= 1");
    Matrix b = sys.b_full(), r = cost.r_full(sys.structure);
    FiniteLmi out;
    out.p_schedule.assign(horizon + 1, Matrix());
    out.gains.assign(horizon, LmiGain{});
    out.p_schedule[horizon] = cost.q_at(horizon, horizon);
    for (int k = horizon - 1; k >= 0; --k) {
        const Matrix& pn = out.p_schedule[k + 1];
        out.gains[k] = detail::lmi_gain_from(sys, cost, pn, b, r);
        out.p_schedule[k] = detail::lmi_map(sys, cost.q_at(k, horizon), b, r, cost, pn);
    }
    return out;
}

struct FiniteFmi {
    std::vector<Matrix> p_schedule;
    std::vector<FmiGain> gains;
};

inline FiniteFmi finite_fmi(const StochasticSystem& sys, const CostSpec& cost, int horizon) {
    if (horizon < 1) throw std::invalid_argument("finite_fmi: horizon must be >= 1");
    Matrix b = sys.b_full(), r = cost.r_full(sys.structure);
    FiniteFmi out;
    out.p_schedule.assign(horizon + 1, Matrix());
    out.gains.assign(horizon, FmiGain{});
    out.p_schedule[horizon] = cost.q_at(horizon, horizon);
    for (int k = horizon - 1; k >= 0; --k) {
        const Matrix& pn = out.p_schedule[k + 1];
        out.gains[k] = detail::fmi_gain_from(pn, b, r);
        out.p_schedule[k] = detail::fmi_map(sys, cost.q_at(k, horizon), b, r, pn);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Infinite horizon

inline std::pair<ValueCertificate, LmiGain> infinite_lmi(const StochasticSystem& sys,
                                                         const CostSpec& cost,
                                                         const SolveOptions& opt = {}) {
    Matrix b = sys.b_full(), r = cost.r_full(sys.structure);
    auto cert = detail::fixed_point(
        [&](const Matrix& x) { return detail::lmi_map(sys, cost.q, b, r, cost, x); }, sys.n(),
        opt, "lmi", "not mean square stabilizable under limited model information (numerically)");
    return {cert, detail::lmi_gain_from(sys, cost, cert.p, b, r)};
}

inline std::pair<ValueCertificate, FmiGain> infinite_fmi(const StochasticSystem& sys,
                                                         const CostSpec& cost,
                                                         const SolveOptions& opt = {}) {
    Matrix b = sys.b_full(), r = cost.r_full(sys.structure);
    auto cert = detail::fixed_point(
        [&](const Matrix& x) { return detail::fmi_map(sys, cost.q, b, r, x); }, sys.n(), opt,
        "fmi", "not mean square stabilizable under full model information (numerically)");
    return {cert, detail::fmi_gain_from(cert.p, b, r)};
}

inline std::pair<ValueCertificate, SmiGain> infinite_smi(const StochasticSystem& sys,
                                                         const CostSpec& cost,
                                                         const SolveOptions& opt = {}) {
    Matrix b = sys.b_full(), r = cost.r_full(sys.structure);
    auto cert = detail::fixed_point(
        [&](const Matrix& x) { return detail::smi_map(sys, cost.q, b, r, x); }, sys.n(), opt,
        "smi", "not mean square stabilizable (constant gain)");
    return {cert, SmiGain{detail::mean_gain(sys, cert.p, b, r)}};
}

// ---------------------------------------------------------------------------
// Deadbeat: block-row i of the gain is -B_ii^{-1} [A_i1(k) ... A_iN(k)];
// requires every B_ii square and invertible (full actuation). Drives the
// state to zero in one step for any realization.
inline AffinePolicy deadbeat(const StochasticSystem& sys) {
    const auto& st = sys.structure;
    Matrix binv = Matrix::Zero(st.m(), st.n());
    for (int i = 0; i < st.subsystems(); ++i) {
        if (st.input_dims[i] != st.state_dims[i])
            throw std::invalid_argument("deadbeat: subsystem not fully-actuated (B_ii not square)");
        Eigen::FullPivLU<Matrix> lu(sys.b_blocks[i]);
        if (!lu.isInvertible())
            throw std::invalid_argument("deadbeat: B_ii singular");
        binv.block(st.input_offset(i), st.state_offset(i), st.input_dims[i], st.state_dims[i]) =
            lu.inverse();
    }
    AffinePolicy p{-binv * sys.a_bar, {}};
    for (const auto& t : sys.terms) p.corrections.push_back(-binv * t.basis);
    return p;
}

// ---------------------------------------------------------------------------
// Exact closed-loop cost matrices of an arbitrary affine policy schedule:
// P(k) = Q(k) + E{K'RK} + E{(A+BK)' P(k+1) (A+BK)}, expectations expanded
// per term (alphas are zero-mean, unit-lag independent).
inline std::vector<Matrix> evaluate_finite(const StochasticSystem& sys, const CostSpec& cost,
                                           const std::vector<AffinePolicy>& schedule,
                                           int horizon) {
    if (static_cast<int>(schedule.size()) != horizon)
        throw std::invalid_argument("evaluate_finite: schedule length must equal horizon");
    Matrix b = sys.b_full(), r = cost.r_full(sys.structure);
    std::vector<Matrix> p(horizon + 1);
    p[horizon] = cost.q_at(horizon, horizon);
    for (int k = horizon - 1; k >= 0; --k) {
        const AffinePolicy& g = schedule[k];
        if (!g.corrections.empty() && g.corrections.size() != sys.terms.size())
            throw std::invalid_argument("evaluate_finite: corrections/terms mismatch");
        Matrix acl = sys.a_bar + b * g.k_bar;
        Matrix x = cost.q_at(k, horizon) + g.k_bar.transpose() * r * g.k_bar +
                   acl.transpose() * p[k + 1] * acl;
        for (size_t s = 0; s < sys.terms.size(); ++s) {
            Matrix c = g.corrections.empty() ? Matrix::Zero(sys.m(), sys.n())
                                             : g.corrections[s];
            Matrix dcl = sys.terms[s].basis + b * c;
            x += sys.terms[s].variance *
                 (c.transpose() * r * c + dcl.transpose() * p[k + 1] * dcl);
        }
        p[k] = symmetrize(x);
    }
    return p;
}

}  // namespace svlq
