// Dense-matrix utilities and the second-moment calculus used throughout:
// Kronecker products, vec/vec_inv, the discrete Riccati operator, expected
// quadratic forms over zero-mean parameter fluctuations, and the two
// eigen-analyses (generalized symmetric max eigenvalue, spectral radius).
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <stdexcept>
#include <vector>

namespace svlq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline bool is_symmetric(const Matrix& m, double tol = 1e-12) {
    if (m.rows() != m.cols()) return false;
    double scale = 1.0 + m.cwiseAbs().maxCoeff();
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

// Smallest eigenvalue of a (nearly) symmetric matrix; symmetrizes first to
// damp asymmetry accumulated by repeated Riccati iterations.
inline double min_eig_sym(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
    return es.eigenvalues().minCoeff();
}

inline bool is_psd(const Matrix& m, double tol = 1e-10) { return min_eig_sym(m) >= -tol; }
inline bool is_pd(const Matrix& m) { return min_eig_sym(m) > 0.0; }

inline Matrix kron(const Matrix& a, const Matrix& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

// vec stacks columns; vec_inv is its (linear) inverse for given dimensions.
inline Vector vec(const Matrix& a) {
    return Eigen::Map<const Vector>(a.data(), a.size());
}

inline Matrix vec_inv(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
    if (v.size() != rows * cols)
        throw std::invalid_argument("vec_inv: length does not match rows*cols");
    return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

// Discrete Riccati operator R(A,P,B,R) = A'(P - PB(R+B'PB)^{-1}B'P)A.
// The middle factor is exposed separately because the synthesis recursions
// reuse it across every stochastic basis direction of a subsystem.
inline Matrix riccati_middle(const Matrix& p, const Matrix& b, const Matrix& r) {
    Matrix g = r + b.transpose() * p * b;
    Eigen::LDLT<Matrix> ldlt(symmetrize(g));
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14)
        throw std::domain_error("riccati_op: R + B'PB is numerically singular");
    Matrix pb = p * b;
    return symmetrize(p - pb * ldlt.solve(pb.transpose()));
}

inline Matrix riccati_op(const Matrix& a, const Matrix& p, const Matrix& b, const Matrix& r) {
    Matrix mid = riccati_middle(p, b, r);
    return symmetrize(a.transpose() * mid * a);
}

// One zero-mean fluctuation direction: A(k) picks up alpha*basis with
// E{alpha}=0, E{alpha^2}=variance.
struct TermMoment {
    double variance = 0.0;
    Matrix basis;
};

// E{A~' Z A~} = sum_s sigma_s^2 B_s' Z B_s (cross terms vanish: the alphas
// are independent and zero-mean). Default route.
inline Matrix expected_quad(const std::vector<TermMoment>& terms, const Matrix& z) {
    if (terms.empty()) return Matrix::Zero(z.rows(), z.cols());
    Matrix out = Matrix::Zero(terms.front().basis.cols(), terms.front().basis.cols());
    for (const auto& t : terms) {
        if (t.basis.rows() != z.rows())
            throw std::invalid_argument("expected_quad: basis/z dimension mismatch");
        out.noalias() += t.variance * t.basis.transpose() * z * t.basis;
    }
    return symmetrize(out);
}

// Same expectation through vec_inv(E{A~ (x) A~}' vec Z); kept as an
// independent cross-check route.
inline Matrix expected_quad_kron(const std::vector<TermMoment>& terms, const Matrix& z) {
    if (terms.empty()) return Matrix::Zero(z.rows(), z.cols());
    Eigen::Index n = terms.front().basis.rows();
    Matrix sigma = Matrix::Zero(n * n, n * n);
    for (const auto& t : terms) sigma += t.variance * kron(t.basis, t.basis);
    return vec_inv(sigma.transpose() * vec(z), n, n);
}

// Largest lambda with p1 v = lambda p2 v for PD p1, p2; equals the supremum
// of the Rayleigh quotient x'p1x / x'p2x. Cholesky-whitens p2 and solves a
// symmetric eigenproblem.
inline double max_gen_eig(const Matrix& p1, const Matrix& p2) {
    if (!is_pd(p1) || !is_pd(p2))
        throw std::domain_error("max_gen_eig: inputs must be positive definite");
    Eigen::LLT<Matrix> llt(symmetrize(p2));
    if (llt.info() != Eigen::Success)
        throw std::domain_error("max_gen_eig: Cholesky of p2 failed");
    Matrix l = llt.matrixL();
    Matrix w = l.triangularView<Eigen::Lower>().solve(symmetrize(p1));
    Matrix m = l.triangularView<Eigen::Lower>().solve(Matrix(w.transpose()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
    return es.eigenvalues().maxCoeff();
}

inline double spectral_radius(const Matrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("spectral_radius: not square");
    return m.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace svlq
