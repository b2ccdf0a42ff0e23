// Interconnected stochastic system model: block structure, mean dynamics,
// per-subsystem input blocks, and the zero-mean fluctuation terms confined to
// subsystem block-rows. Also cost weights and validation of the standing
// assumptions (i.i.d. in time, block-row confinement, block-diagonal R).
#pragma once

#include "matstat.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace svlq {

struct BlockStructure {
    std::vector<int> state_dims;   // n_i
    std::vector<int> input_dims;   // m_i

    int subsystems() const { return static_cast<int>(state_dims.size()); }
    int n() const {
        int s = 0;
        for (int d : state_dims) s += d;
        return s;
    }
    int m() const {
        int s = 0;
        for (int d : input_dims) s += d;
        return s;
    }
    int state_offset(int i) const {
        int s = 0;
        for (int j = 0; j < i; ++j) s += state_dims[j];
        return s;
    }
    int input_offset(int i) const {
        int s = 0;
        for (int j = 0; j < i; ++j) s += input_dims[j];
        return s;
    }
};

enum class Law { gaussian, uniform, two_point };

inline std::string law_name(Law l) {
    switch (l) {
        case Law::gaussian: return "gaussian";
        case Law::uniform: return "uniform";
        case Law::two_point: return "two_point";
    }
    return "gaussian";
}

inline std::optional<Law> law_from_name(const std::string& s) {
    if (s == "gaussian") return Law::gaussian;
    if (s == "uniform") return Law::uniform;
    if (s == "two_point") return Law::two_point;
    return std::nullopt;
}

// One scalar fluctuation alpha_s(k): zero mean, given variance, i.i.d. in
// time, independent across terms, entering as alpha_s(k) * basis. The basis
// must vanish outside the block-row of its subsystem.
struct StochasticTerm {
    int subsystem = 0;        // 0-based
    Matrix basis;             // n x n direction
    double variance = 0.0;
    Law law = Law::gaussian;
};

struct StochasticSystem {
    BlockStructure structure;
    Matrix a_bar;                  // n x n mean dynamics
    std::vector<Matrix> b_blocks;  // B_ii, n_i x m_i
    std::vector<StochasticTerm> terms;

    int n() const { return structure.n(); }
    int m() const { return structure.m(); }

    // Full input matrix: block-diagonal embedding of the B_ii.
    Matrix b_full() const {
        Matrix b = Matrix::Zero(n(), m());
        for (int i = 0; i < structure.subsystems(); ++i)
            b.block(structure.state_offset(i), structure.input_offset(i),
                    structure.state_dims[i], structure.input_dims[i]) = b_blocks[i];
        return b;
    }
};

// B_i: zero rows except block-row i, which carries B_ii.
inline Matrix embed_b(const StochasticSystem& sys, int i) {
    if (i < 0 || i >= sys.structure.subsystems())
        throw std::out_of_range("embed_b: subsystem index");
    Matrix b = Matrix::Zero(sys.n(), sys.structure.input_dims[i]);
    b.block(sys.structure.state_offset(i), 0, sys.structure.state_dims[i],
            sys.structure.input_dims[i]) = sys.b_blocks[i];
    return b;
}

// Moment pairs (variance, basis) for the terms of subsystem i; their
// basis-route quadratic sum realizes E{A~_i' Z A~_i}.
inline std::vector<TermMoment> atilde_terms(const StochasticSystem& sys, int i) {
    std::vector<TermMoment> out;
    for (const auto& t : sys.terms)
        if (t.subsystem == i) out.push_back({t.variance, t.basis});
    return out;
}

inline std::vector<TermMoment> all_terms(const StochasticSystem& sys) {
    std::vector<TermMoment> out;
    for (const auto& t : sys.terms) out.push_back({t.variance, t.basis});
    return out;
}

// Deterministic single-draw sampler for the alphas (one value per term).
inline std::vector<double> sample_alphas(const StochasticSystem& sys, std::mt19937_64& rng) {
    std::vector<double> a(sys.terms.size(), 0.0);
    for (size_t s = 0; s < sys.terms.size(); ++s) {
        const auto& t = sys.terms[s];
        double sd = std::sqrt(t.variance);
        switch (t.law) {
            case Law::gaussian: {
                std::normal_distribution<double> d(0.0, 1.0);
                a[s] = sd * d(rng);
                break;
            }
            case Law::uniform: {
                // zero-mean uniform on [-h, h] with h = sqrt(3) * sd
                std::uniform_real_distribution<double> d(-1.0, 1.0);
                a[s] = std::sqrt(3.0) * sd * d(rng);
                break;
            }
            case Law::two_point: {
                std::bernoulli_distribution d(0.5);
                a[s] = d(rng) ? sd : -sd;
                break;
            }
        }
    }
    return a;
}

inline Matrix realize_a(const StochasticSystem& sys, const std::vector<double>& alphas) {
    Matrix a = sys.a_bar;
    for (size_t s = 0; s < sys.terms.size(); ++s) a += alphas[s] * sys.terms[s].basis;
    return a;
}

inline Matrix sample_a(const StochasticSystem& sys, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return realize_a(sys, sample_alphas(sys, rng));
}

// E{A~ (x) A~} = sum_s sigma_s^2 kron(D_s, D_s); cross-subsystem terms vanish
// by independence. Also returned split per subsystem.
struct SecondMoment {
    Matrix total;
    std::vector<Matrix> per_subsystem;
};

inline SecondMoment second_moment(const StochasticSystem& sys) {
    int n = sys.n();
    SecondMoment sm;
    sm.total = Matrix::Zero(n * n, n * n);
    sm.per_subsystem.assign(sys.structure.subsystems(), Matrix::Zero(n * n, n * n));
    for (const auto& t : sys.terms) {
        Matrix k = t.variance * kron(t.basis, t.basis);
        sm.total += k;
        sm.per_subsystem[t.subsystem] += k;
    }
    return sm;
}

struct CostSpec {
    Matrix q;                       // constant state weight (PD for infinite horizon)
    Matrix q_terminal;              // Q(T) for finite horizon
    std::vector<Matrix> q_steps;    // optional schedule Q(0..T); overrides q/q_terminal
    std::vector<Matrix> r_blocks;   // R_ii, PD

    static CostSpec identity(const BlockStructure& st) {
        CostSpec c;
        c.q = Matrix::Identity(st.n(), st.n());
        c.q_terminal = c.q;
        for (int i = 0; i < st.subsystems(); ++i)
            c.r_blocks.push_back(Matrix::Identity(st.input_dims[i], st.input_dims[i]));
        return c;
    }

    Matrix r_full(const BlockStructure& st) const {
        Matrix r = Matrix::Zero(st.m(), st.m());
        for (int i = 0; i < st.subsystems(); ++i)
            r.block(st.input_offset(i), st.input_offset(i), st.input_dims[i],
                    st.input_dims[i]) = r_blocks[i];
        return r;
    }

    const Matrix& q_at(int k, int horizon) const {
        if (!q_steps.empty()) return q_steps[static_cast<size_t>(k)];
        return k == horizon ? q_terminal : q;
    }
};

// Assumption checks; violations are returned as data, not thrown.
inline std::vector<std::string> validate(const StochasticSystem& sys, const CostSpec& cost,
                                         bool infinite_horizon = true) {
    std::vector<std::string> v;
    const auto& st = sys.structure;
    int n = st.n();
    if (st.state_dims.empty()) v.push_back("structure: no subsystems");
    for (int d : st.state_dims)
        if (d < 1) v.push_back("structure: state dim < 1");
    for (int d : st.input_dims)
        if (d < 1) v.push_back("structure: input dim < 1");
    if (sys.a_bar.rows() != n || sys.a_bar.cols() != n)
        v.push_back("a_bar: wrong dimensions");
    if (static_cast<int>(sys.b_blocks.size()) != st.subsystems())
        v.push_back("b_blocks: count mismatch");
    else
        for (int i = 0; i < st.subsystems(); ++i)
            if (sys.b_blocks[i].rows() != st.state_dims[i] ||
                sys.b_blocks[i].cols() != st.input_dims[i])
                v.push_back("b_blocks[" + std::to_string(i) + "]: wrong dimensions");
    for (size_t s = 0; s < sys.terms.size(); ++s) {
        const auto& t = sys.terms[s];
        if (t.subsystem < 0 || t.subsystem >= st.subsystems()) {
            v.push_back("term " + std::to_string(s) + ": subsystem index out of range");
            continue;
        }
        if (t.basis.rows() != n || t.basis.cols() != n) {
            v.push_back("term " + std::to_string(s) + ": basis wrong dimensions");
            continue;
        }
        if (t.variance < 0) v.push_back("term " + std::to_string(s) + ": negative variance");
        int r0 = st.state_offset(t.subsystem), ni = st.state_dims[t.subsystem];
        for (int r = 0; r < n; ++r) {
            if (r >= r0 && r < r0 + ni) continue;
            if (t.basis.row(r).cwiseAbs().maxCoeff() != 0.0) {
                v.push_back("term " + std::to_string(s) +
                            ": basis leaves the subsystem block-row (Assumption 2)");
                break;
            }
        }
    }
    if (cost.q.rows() != n || cost.q.cols() != n) v.push_back("q: wrong dimensions");
    else if (!is_symmetric(cost.q, 1e-10) || !is_psd(cost.q))
        v.push_back("q: not symmetric PSD");
    else if (infinite_horizon && !is_pd(cost.q))
        v.push_back("q: infinite horizon requires Q positive definite");
    if (static_cast<int>(cost.r_blocks.size()) != st.subsystems())
        v.push_back("r_blocks: count mismatch (R block-diagonal)");
    else
        for (int i = 0; i < st.subsystems(); ++i) {
            const Matrix& r = cost.r_blocks[i];
            if (r.rows() != st.input_dims[i] || r.cols() != st.input_dims[i])
                v.push_back("r_blocks[" + std::to_string(i) + "]: wrong dimensions");
            else if (!is_symmetric(r, 1e-10) || !is_pd(r))
                v.push_back("r_blocks[" + std::to_string(i) + "]: not symmetric PD");
        }
    return v;
}

// Change of variables mapping (sys, Q, R) to an equivalent problem with
// Q = R = I: A' = Q^{1/2} A Q^{-1/2}, B' = Q^{1/2} B R^{-1/2}. Requires Q
// block-diagonal conformal to the structure (else the transformed system has
// no valid block structure) and R block-diagonal by contract.
inline StochasticSystem normalize_cost(const StochasticSystem& sys, const CostSpec& cost) {
    const auto& st = sys.structure;
    int n = st.n();
    if (!is_pd(cost.q)) throw std::invalid_argument("normalize_cost: Q must be PD");
    for (int i = 0; i < st.subsystems(); ++i)
        for (int j = 0; j < st.subsystems(); ++j) {
            if (i == j) continue;
            if (cost.q.block(st.state_offset(i), st.state_offset(j), st.state_dims[i],
                             st.state_dims[j]).cwiseAbs().maxCoeff() > 1e-12)
                throw std::invalid_argument(
                    "normalize_cost: Q must be block-diagonal conformal to the structure");
        }

    Eigen::SelfAdjointEigenSolver<Matrix> esq(symmetrize(cost.q));
    Matrix q_half = esq.operatorSqrt();
    Matrix q_half_inv = esq.operatorInverseSqrt();

    StochasticSystem out = sys;
    out.a_bar = q_half * sys.a_bar * q_half_inv;
    for (auto& t : out.terms) t.basis = q_half * t.basis * q_half_inv;
    for (int i = 0; i < st.subsystems(); ++i) {
        Eigen::SelfAdjointEigenSolver<Matrix> esr(symmetrize(cost.r_blocks[i]));
        Matrix qi = q_half.block(st.state_offset(i), st.state_offset(i), st.state_dims[i],
                                 st.state_dims[i]);
        out.b_blocks[i] = qi * sys.b_blocks[i] * esr.operatorInverseSqrt();
    }
    return out;
}

}  // namespace svlq
