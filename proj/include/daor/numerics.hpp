#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace daor {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonSquare : NumericsError {
    using NumericsError::NumericsError;
};
struct NotHermitian : NumericsError {
    using NumericsError::NumericsError;
};
struct NonFinite : NumericsError {
    using NumericsError::NumericsError;
};
struct NotPositiveDefinite : NumericsError {
    using NumericsError::NumericsError;
};
struct DimensionMismatch : NumericsError {
    using NumericsError::NumericsError;
};

/// Eigenpairs of a Hermitian matrix, eigenvalues sorted descending.
struct HermitianEigenResult {
    RealVector eigenvalues;
    ComplexMatrix eigenvectors;  // column k pairs with eigenvalues[k]
};

/// Eigenpairs of the pencil (A, B) with B Hermitian positive definite.
struct GeneralizedEigenResult {
    RealVector eigenvalues;
    ComplexMatrix eigenvectors;  // unit-norm columns t_k with A t_k = lambda_k B t_k
};

namespace detail {

inline void require_square(const ComplexMatrix& a, const char* who) {
    if (a.rows() == 0 || a.cols() == 0)
        throw DimensionMismatch(std::string(who) + ": empty matrix");
    if (a.rows() != a.cols())
        throw NonSquare(std::string(who) + ": matrix is " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()));
}

inline void require_finite(const ComplexMatrix& a, const char* who) {
    if (!a.allFinite()) throw NonFinite(std::string(who) + ": non-finite entry");
}

// Asymmetry tolerance 1e-10 * ||A||_F; callers symmetrize after passing the check.
inline void require_hermitian(const ComplexMatrix& a, const char* who) {
    const double scale = a.norm();
    const double asym = (a - a.adjoint()).norm();
    if (asym > 1e-10 * std::max(scale, 1e-300))
        throw NotHermitian(std::string(who) + ": asymmetry " + std::to_string(asym) +
                           " exceeds 1e-10 * ||A||_F");
}

// Stable descending reorder of (values, vectors) pairs; ties keep the
// factorization's own order.
inline void sort_pairs_descending(RealVector& values, ComplexMatrix& vectors) {
    const Eigen::Index n = values.size();
    std::vector<Eigen::Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return values[i] > values[j]; });
    RealVector sv(n);
    ComplexMatrix sm(vectors.rows(), n);
    for (Eigen::Index k = 0; k < n; ++k) {
        sv[k] = values[order[static_cast<size_t>(k)]];
        sm.col(k) = vectors.col(order[static_cast<size_t>(k)]);
    }
    values.swap(sv);
    vectors.swap(sm);
}

}  // namespace detail

/// Cholesky factor L (lower triangular, real positive diagonal) with A = L L^H.
inline ComplexMatrix cholesky(const ComplexMatrix& a) {
    detail::require_square(a, "cholesky");
    detail::require_finite(a, "cholesky");
    detail::require_hermitian(a, "cholesky");
    const ComplexMatrix sym = 0.5 * (a + a.adjoint());
    Eigen::LLT<ComplexMatrix> llt(sym);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("cholesky: pivot <= 0, matrix is not positive definite");
    ComplexMatrix l = llt.matrixL();
    if (!l.allFinite() || (l.diagonal().real().array() <= 0.0).any())
        throw NotPositiveDefinite("cholesky: factorization produced a non-positive pivot");
    return l;
}

/// ln det(A) for Hermitian positive definite A, via the Cholesky diagonal.
inline double logdet_hpd(const ComplexMatrix& a) {
    const ComplexMatrix l = cholesky(a);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i).real());
    return 2.0 * acc;
}

/// Full eigendecomposition of a Hermitian matrix (symmetrized as (A+A^H)/2).
inline HermitianEigenResult hermitian_eig(const ComplexMatrix& a) {
    detail::require_square(a, "hermitian_eig");
    detail::require_finite(a, "hermitian_eig");
    detail::require_hermitian(a, "hermitian_eig");
    const ComplexMatrix sym = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym);
    if (es.info() != Eigen::Success) throw NumericsError("hermitian_eig: iteration failed");
    HermitianEigenResult out;
    out.eigenvalues = es.eigenvalues();
    out.eigenvectors = es.eigenvectors();
    detail::sort_pairs_descending(out.eigenvalues, out.eigenvectors);
    return out;
}

/// Generalized Hermitian eigenproblem A t = lambda B t, B positive definite.
/// Reduced to an ordinary Hermitian problem through the Cholesky factor of B;
/// returned eigenvectors are back-transformed and normalized to unit 2-norm.
inline GeneralizedEigenResult generalized_eig(const ComplexMatrix& a, const ComplexMatrix& b) {
    detail::require_square(a, "generalized_eig");
    detail::require_square(b, "generalized_eig");
    if (a.rows() != b.rows())
        throw DimensionMismatch("generalized_eig: A is " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + ", B is " + std::to_string(b.rows()) +
                                "x" + std::to_string(b.cols()));
    detail::require_finite(a, "generalized_eig");
    detail::require_finite(b, "generalized_eig");
    detail::require_hermitian(a, "generalized_eig");
    detail::require_hermitian(b, "generalized_eig");

    const ComplexMatrix sym_a = 0.5 * (a + a.adjoint());
    const ComplexMatrix l = cholesky(b);

    // C = L^{-1} A L^{-H}, Hermitian up to round-off.
    const ComplexMatrix y = l.triangularView<Eigen::Lower>().solve(sym_a);
    ComplexMatrix c = l.triangularView<Eigen::Lower>().solve(y.adjoint()).adjoint();
    c = 0.5 * (c + c.adjoint());

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(c);
    if (es.info() != Eigen::Success) throw NumericsError("generalized_eig: iteration failed");

    GeneralizedEigenResult out;
    out.eigenvalues = es.eigenvalues();
    out.eigenvectors = l.adjoint().triangularView<Eigen::Upper>().solve(es.eigenvectors());
    for (Eigen::Index k = 0; k < out.eigenvectors.cols(); ++k)
        out.eigenvectors.col(k).normalize();
    detail::sort_pairs_descending(out.eigenvalues, out.eigenvectors);
    return out;
}

}  // namespace daor
