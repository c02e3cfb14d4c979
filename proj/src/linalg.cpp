#include "spinobs/linalg.hpp"

#include <lapacke.h>

namespace spinobs {

namespace {

void check_sites(std::span<const int> sites, int L) {
    if (L < 1 || L > 24) throw std::invalid_argument("chain length out of range");
    std::vector<bool> seen(static_cast<std::size_t>(L), false);
    for (int s : sites) {
        if (s < 0 || s >= L) throw std::invalid_argument("site index out of range");
        if (seen[static_cast<std::size_t>(s)]) throw std::invalid_argument("repeated site index");
        seen[static_cast<std::size_t>(s)] = true;
    }
}

}  // namespace

Eigen::MatrixXcd embed_operator(const Eigen::MatrixXcd& op, std::span<const int> sites, int L) {
    check_sites(sites, L);
    const int k = static_cast<int>(sites.size());
    const long subdim = 1L << k;
    if (op.rows() != subdim || op.cols() != subdim)
        throw std::invalid_argument("operator dimension does not match site count");
    const long dim = 1L << L;

    // Bit position (from the least significant end) of each listed site.
    std::vector<int> pos(sites.size());
    for (int i = 0; i < k; ++i) pos[static_cast<std::size_t>(i)] = L - 1 - sites[static_cast<std::size_t>(i)];

    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    for (long n = 0; n < dim; ++n) {
        long nsub = 0;
        long base = n;
        for (int i = 0; i < k; ++i) {
            nsub = (nsub << 1) | ((n >> pos[static_cast<std::size_t>(i)]) & 1);
            base &= ~(1L << pos[static_cast<std::size_t>(i)]);
        }
        for (long msub = 0; msub < subdim; ++msub) {
            const complexd v = op(msub, nsub);
            if (v == complexd(0.0, 0.0)) continue;
            long m = base;
            for (int i = 0; i < k; ++i)
                m |= ((msub >> (k - 1 - i)) & 1) << pos[static_cast<std::size_t>(i)];
            out(m, n) += v;
        }
    }
    return out;
}

Eigen::MatrixXcd partial_trace_front(const Eigen::MatrixXcd& rho, int keep, int L) {
    const long dim = 1L << L;
    if (rho.rows() != dim || rho.cols() != dim)
        throw std::invalid_argument("density matrix dimension does not match chain length");
    if (keep < 1 || keep > L) throw std::invalid_argument("window size out of range");
    const long sub = 1L << keep;
    const long env = dim / sub;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(sub, sub);
    for (long a = 0; a < sub; ++a)
        for (long b = 0; b < sub; ++b) {
            complexd acc = 0.0;
            for (long c = 0; c < env; ++c) acc += rho(a * env + c, b * env + c);
            out(a, b) = acc;
        }
    return out;
}

Eigen::MatrixXcd window_rdm(const Eigen::VectorXcd& psi, int first, int size, int L) {
    const long dim = 1L << L;
    if (psi.size() != dim) throw std::invalid_argument("state dimension does not match chain length");
    if (size < 1 || size > L) throw std::invalid_argument("window size out of range");
    if (first < 0 || first >= L) throw std::invalid_argument("window start out of range");

    const long sub = 1L << size;
    const long env = dim / sub;
    std::vector<int> wpos(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) wpos[static_cast<std::size_t>(i)] = L - 1 - ((first + i) % L);
    long wmask = 0;
    for (int p : wpos) wmask |= 1L << p;

    // Reshape psi into a (window) x (environment) matrix, then contract.
    Eigen::MatrixXcd block(sub, env);
    for (long n = 0; n < dim; ++n) {
        long a = 0;
        for (int i = 0; i < size; ++i) a = (a << 1) | ((n >> wpos[static_cast<std::size_t>(i)]) & 1);
        long e = 0;
        for (int p = L - 1; p >= 0; --p)
            if (!((wmask >> p) & 1)) e = (e << 1) | ((n >> p) & 1);
        block(a, e) = psi(n);
    }
    return block * block.adjoint();
}

Eigen::MatrixXcd cyclic_shift(int L) {
    const long dim = 1L << L;
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(dim, dim);
    for (long n = 0; n < dim; ++n) {
        const long m = (n >> 1) | ((n & 1) << (L - 1));
        t(m, n) = 1.0;
    }
    return t;
}

SymmetricEigen symmetric_eigendecomposition(const Eigen::MatrixXd& m, bool compute_vectors) {
    if (m.rows() != m.cols()) throw std::invalid_argument("symmetric eigendecomposition needs a square matrix");
    const lapack_int n = static_cast<lapack_int>(m.rows());
    SymmetricEigen out;
    out.eigenvalues.resize(n);
    if (n == 0) return out;

    // dsyevd overwrites its input with the eigenvectors (column-major, which
    // matches Eigen's default storage).
    Eigen::MatrixXd work = m;
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, compute_vectors ? 'V' : 'N', 'L', n,
                                           work.data(), n, out.eigenvalues.data());
    if (info != 0) throw std::runtime_error("LAPACK dsyevd failed to converge");
    if (compute_vectors) out.eigenvectors = std::move(work);
    return out;
}

}  // namespace spinobs
