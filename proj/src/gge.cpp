#include "spinobs/gge.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "spinobs/errors.hpp"

namespace spinobs {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

void check_ensemble_args(std::size_t n_charges, int L) {
    if (n_charges < 1 || n_charges > 4)
        throw std::invalid_argument("expected between 1 and 4 charges");
    if (L < 2 || L > 12) throw std::invalid_argument("dense ensembles limited to 2 <= L <= 12");
}

VectorXd boltzmann_weights(const VectorXd& exponents) {
    const VectorXd w = (exponents.array() - exponents.maxCoeff()).exp();
    return w / w.sum();
}

// True when every term's dense realization is a real matrix (even number of
// 'y' symbols per label).
bool dense_is_real(const OperatorSpec& spec) {
    for (const auto& [c, l] : spec.terms) {
        int ys = 0;
        for (int i = 0; i < l.size(); ++i) ys += l.at(i) == 'y';
        if (ys % 2) return false;
    }
    return true;
}

// Apply the single-window string P_alpha to every column of V.  P_alpha has a
// single non-zero entry per column, so this is a phased row permutation.
void apply_string_rows(const PauliLabel& label, const MatrixXcd& v, int L, MatrixXcd& out) {
    const long dim = v.rows();
    long flip = 0;
    std::vector<std::pair<int, char>> active;
    for (int i = 0; i < label.size(); ++i) {
        const char c = label.at(i);
        if (c == '0') continue;
        const int p = L - 1 - i;
        if (c == 'x' || c == 'y') flip |= 1L << p;
        if (c == 'y' || c == 'z') active.emplace_back(p, c);
    }
    const complexd i_unit(0.0, 1.0);
    for (long n = 0; n < dim; ++n) {
        complexd phase = 1.0;
        for (auto [p, c] : active) {
            const bool down = (n >> p) & 1;
            phase *= (c == 'y') ? (down ? -i_unit : i_unit) : complexd(down ? -1.0 : 1.0);
        }
        out.row(n ^ flip) = phase * v.row(n);
    }
}

// tr(rho P_alpha) for a real symmetric rho.  Odd-y strings have purely
// imaginary matrix elements, so their trace against a real symmetric matrix
// vanishes identically; even-y strings are real phased permutations whose
// trace touches one entry of rho per basis state.
double real_string_trace(const PauliLabel& label, const MatrixXd& rho, int L) {
    long flip = 0;
    long sign_mask = 0;
    int ys = 0;
    for (int i = 0; i < label.size(); ++i) {
        const char c = label.at(i);
        if (c == '0') continue;
        const int p = L - 1 - i;
        if (c == 'x' || c == 'y') flip |= 1L << p;
        if (c == 'y' || c == 'z') sign_mask |= 1L << p;
        ys += c == 'y';
    }
    if (ys % 2) return 0.0;
    const double global = (ys % 4 == 2) ? -1.0 : 1.0;  // i^ys for even ys
    const long dim = rho.rows();
    double acc = 0.0;
    for (long n = 0; n < dim; ++n) {
        const bool neg = std::popcount(static_cast<unsigned long long>(n & sign_mask)) & 1;
        acc += neg ? -rho(n ^ flip, n) : rho(n ^ flip, n);
    }
    return global * acc;
}

}  // namespace

GGEState gge_state(const std::vector<OperatorSpec>& charges, const VectorXd& lambda, int L) {
    check_ensemble_args(charges.size(), L);
    if (lambda.size() != static_cast<Eigen::Index>(charges.size()))
        throw std::invalid_argument("lambda length must match the number of charges");

    const long dim = 1L << L;
    MatrixXcd m = MatrixXcd::Zero(dim, dim);
    for (std::size_t i = 0; i < charges.size(); ++i)
        m += lambda(static_cast<Eigen::Index>(i)) * build_dense(charges[i], L, true).matrix;

    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m);
    if (es.info() != Eigen::Success) throw numerical_error("ensemble eigensolve failed");
    const VectorXd w = boltzmann_weights(es.eigenvalues());
    GGEState state;
    state.rho = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
    state.lambda = lambda;
    state.charges = charges;
    state.sites = L;
    return state;
}

Eigen::VectorXd observe_rdm(const MatrixXcd& rho, int L, int support) {
    if (support < 1 || support > 4) throw std::invalid_argument("observation support must be 1..4");
    if (support > L) throw std::invalid_argument("observation support exceeds chain length");
    const MatrixXcd rdm = (support == L) ? rho : partial_trace_front(rho, support, L);
    const auto labels = enumerate_support_strings(support);
    VectorXd values(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t a = 0; a < labels.size(); ++a) {
        const MatrixXcd p = pauli_string_matrix(labels[a], 0, support);
        values(static_cast<Eigen::Index>(a)) = (rdm * p).trace().real();
    }
    return values;
}

ObservationVector observe(const GGEState& state, int support) {
    ObservationVector obs;
    obs.values = observe_rdm(state.rho, state.sites, support);
    obs.support = support;
    std::ostringstream p;
    p << "gge L=" << state.sites << " n_charges=" << state.charges.size() << " lambda=[";
    for (Eigen::Index i = 0; i < state.lambda.size(); ++i)
        p << (i ? "," : "") << state.lambda(i);
    p << "]";
    obs.provenance = p.str();
    return obs;
}

double expectation(const MatrixXcd& rho, const OperatorSpec& spec, int L) {
    return (rho * build_dense(spec, L, true).matrix).trace().real();
}

JointBasis joint_diagonalize(const std::vector<OperatorSpec>& charges, int L) {
    check_ensemble_args(charges.size(), L);
    const long dim = 1L << L;
    const int nc = static_cast<int>(charges.size());

    std::vector<MatrixXcd> dense;
    dense.reserve(charges.size());
    for (const auto& c : charges) dense.push_back(build_dense(c, L, true).matrix);

    JointBasis jb;
    jb.sites = L;
    jb.evals.resize(nc, dim);

    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(dense[0]);
    if (es.info() != Eigen::Success) throw numerical_error("charge eigensolve failed");
    jb.V = es.eigenvectors();
    jb.evals.row(0) = es.eigenvalues().transpose();

    // Refine degenerate blocks charge by charge so that every later charge is
    // diagonal on the clusters left by the earlier ones.
    std::vector<std::pair<long, long>> clusters{{0, dim}};  // [begin, end)
    auto split_clusters = [&](int row) {
        const double scale = std::max(1.0, jb.evals.row(row).cwiseAbs().maxCoeff());
        const double tol = 1e-8 * scale;
        std::vector<std::pair<long, long>> next;
        for (auto [b, e] : clusters) {
            long start = b;
            for (long k = b + 1; k < e; ++k) {
                if (std::abs(jb.evals(row, k) - jb.evals(row, k - 1)) > tol) {
                    next.emplace_back(start, k);
                    start = k;
                }
            }
            next.emplace_back(start, e);
        }
        clusters = std::move(next);
    };
    split_clusters(0);

    for (int i = 1; i < nc; ++i) {
        for (auto [b, e] : clusters) {
            const long w = e - b;
            if (w == 1) {
                jb.evals(i, b) = (jb.V.col(b).adjoint() * dense[i] * jb.V.col(b))(0).real();
                continue;
            }
            const MatrixXcd block = jb.V.middleCols(b, w).adjoint() * dense[i] * jb.V.middleCols(b, w);
            Eigen::SelfAdjointEigenSolver<MatrixXcd> bes(block);
            if (bes.info() != Eigen::Success) throw numerical_error("charge block eigensolve failed");
            jb.V.middleCols(b, w) = (jb.V.middleCols(b, w) * bes.eigenvectors()).eval();
            jb.evals.row(i).segment(b, w) = bes.eigenvalues().transpose();
        }
        split_clusters(i);
    }

    for (int i = 0; i < nc; ++i) {
        const double scale = std::max(1.0, jb.evals.row(i).cwiseAbs().maxCoeff());
        const double resid =
            (dense[i] * jb.V - jb.V * jb.evals.row(i).asDiagonal()).cwiseAbs().maxCoeff();
        if (resid > 1e-7 * scale)
            throw numerical_error("charges do not commute to working precision");
    }
    return jb;
}

Eigen::MatrixXd observation_matrix(const MatrixXcd& V, int L, int support) {
    if (support < 1 || support > 4) throw std::invalid_argument("observation support must be 1..4");
    const long dim = V.rows();
    if (dim != (1L << L)) throw std::invalid_argument("basis dimension does not match chain length");
    const auto labels = enumerate_support_strings(support);
    MatrixXd m(dim, static_cast<Eigen::Index>(labels.size()));
    MatrixXcd pv(dim, V.cols());
    for (std::size_t a = 0; a < labels.size(); ++a) {
        apply_string_rows(labels[a].padded(support), V, L, pv);
        m.col(static_cast<Eigen::Index>(a)) =
            V.conjugate().cwiseProduct(pv).colwise().sum().real().transpose();
    }
    return m;
}

Eigen::VectorXd observe_in_basis(const MatrixXcd& V, const VectorXd& weights, int L, int support) {
    return observation_matrix(V, L, support).transpose() * weights;
}

Eigen::VectorXd thermal_observation(const OperatorSpec& coeffs, int L, int support) {
    if (support < 1 || support > 4) throw std::invalid_argument("observation support must be 1..4");
    const DenseOperator op = build_dense(coeffs, L, true);
    if (dense_is_real(coeffs)) {
        // Real Hamiltonian: the Gibbs state is real symmetric, so the whole
        // computation stays in real arithmetic (this path dominates the
        // coupling-reconstruction runtime).
        const SymmetricEigen es = symmetric_eigendecomposition(op.matrix.real());
        const VectorXd w = boltzmann_weights(es.eigenvalues);
        const long dim = op.matrix.rows();
        const MatrixXd scaled = es.eigenvectors * w.cwiseSqrt().asDiagonal();
        MatrixXd rho = MatrixXd::Zero(dim, dim);
        rho.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
        rho.triangularView<Eigen::StrictlyUpper>() = rho.transpose();
        const auto labels = enumerate_support_strings(support);
        VectorXd values(static_cast<Eigen::Index>(labels.size()));
        for (std::size_t a = 0; a < labels.size(); ++a)
            values(static_cast<Eigen::Index>(a)) = real_string_trace(labels[a].padded(support), rho, L);
        return values;
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(op.matrix);
    if (es.info() != Eigen::Success) throw numerical_error("thermal eigensolve failed");
    return observe_in_basis(es.eigenvectors(), boltzmann_weights(es.eigenvalues()), L, support);
}

double lambda_for_energy(const OperatorSpec& hamiltonian, double energy_density, int L) {
    const DenseOperator op = build_dense(hamiltonian, L, true);
    VectorXd d;
    if (dense_is_real(hamiltonian)) {
        d = symmetric_eigendecomposition(op.matrix.real(), false).eigenvalues;
    } else {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(op.matrix);
        d = es.eigenvalues();
    }
    const double target = energy_density * L;
    const double lo_e = d.minCoeff(), hi_e = d.maxCoeff();
    if (target <= lo_e || target >= hi_e)
        throw std::invalid_argument("requested energy density outside the spectrum");

    const auto mean_energy = [&](double s) {
        const VectorXd w = boltzmann_weights(s * d);
        return w.dot(d);
    };
    double lo = -60.0, hi = 60.0;  // mean energy is increasing in s
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double e = mean_energy(mid);
        if (std::abs(e - target) <= 1e-12 * std::max(1.0, std::abs(target))) return mid;
        (e < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace spinobs
