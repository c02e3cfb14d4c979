#pragma once

// Small dense linear-algebra helpers shared across the library.
//
// Conventions used throughout:
//   * Site 0 is the leftmost site of the chain and maps to the most
//     significant bit of a basis index: basis state n has bit
//     (n >> (L-1-l)) & 1 for site l, with bit value 0 meaning spin up.
//   * Tensor products are ordered site 0 (x) site 1 (x) ... (x) site L-1,
//     consistent with kron(A, B) acting as A on the left factor.

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

namespace spinobs {

using complexd = std::complex<double>;

// Kronecker product, expression-friendly in both arguments.
template <typename DerivedA, typename DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    using ScalarA = typename DerivedA::Scalar;
    using ScalarB = typename DerivedB::Scalar;
    using Scalar = typename Eigen::ScalarBinaryOpTraits<ScalarA, ScalarB>::ReturnType;
    using Result = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Result out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Embed a (2^k x 2^k) operator acting on the listed sites (in the given order)
// into the full 2^L-dimensional chain Hilbert space.
Eigen::MatrixXcd embed_operator(const Eigen::MatrixXcd& op, std::span<const int> sites, int L);

// Reduced density matrix of the first `keep` sites of an L-site density matrix.
Eigen::MatrixXcd partial_trace_front(const Eigen::MatrixXcd& rho, int keep, int L);

// Reduced density matrix of a contiguous window [first, first+size) of a pure
// state on L sites (window wraps cyclically if first+size > L).
Eigen::MatrixXcd window_rdm(const Eigen::VectorXcd& psi, int first, int size, int L);

// Permutation matrix of the one-site cyclic translation (site l -> l+1 mod L).
Eigen::MatrixXcd cyclic_shift(int L);

// Full eigendecomposition of a real symmetric matrix (ascending eigenvalues),
// backed by LAPACK dsyevd which is noticeably faster than the generic Eigen
// solver for the dense spectra this library produces.
struct SymmetricEigen {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;  // empty when compute_vectors == false
};

SymmetricEigen symmetric_eigendecomposition(const Eigen::MatrixXd& m, bool compute_vectors = true);

inline bool is_hermitian(const Eigen::MatrixXcd& m, double tol = 1e-12) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

}  // namespace spinobs
