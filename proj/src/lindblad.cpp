#include "spinobs/lindblad.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <random>

#include <Eigen/SparseLU>

#include "spinobs/errors.hpp"

namespace spinobs {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using SparseCd = Eigen::SparseMatrix<complexd>;
using Triplet = Eigen::Triplet<complexd>;

SparseCd embed_sparse(const MatrixXcd& op, int first, int width, int N) {
    const long dim = 1L << N;
    const long subdim = 1L << width;
    std::vector<int> pos(static_cast<std::size_t>(width));
    for (int i = 0; i < width; ++i) pos[static_cast<std::size_t>(i)] = N - 1 - ((first + i) % N);

    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(dim * subdim / 2));
    for (long n = 0; n < dim; ++n) {
        long nsub = 0;
        long base = n;
        for (int i = 0; i < width; ++i) {
            nsub = (nsub << 1) | ((n >> pos[static_cast<std::size_t>(i)]) & 1);
            base &= ~(1L << pos[static_cast<std::size_t>(i)]);
        }
        for (long msub = 0; msub < subdim; ++msub) {
            const complexd v = op(msub, nsub);
            if (v == complexd(0.0, 0.0)) continue;
            long m = base;
            for (int i = 0; i < width; ++i)
                m |= ((msub >> (width - 1 - i)) & 1) << pos[static_cast<std::size_t>(i)];
            trips.emplace_back(static_cast<int>(m), static_cast<int>(n), v);
        }
    }
    SparseCd s(dim, dim);
    s.setFromTriplets(trips.begin(), trips.end());
    return s;
}

void append_kron(std::vector<Triplet>& out, const SparseCd& a, const SparseCd& b, complexd scale) {
    const long db = b.rows();
    for (int ka = 0; ka < a.outerSize(); ++ka)
        for (SparseCd::InnerIterator ia(a, ka); ia; ++ia)
            for (int kb = 0; kb < b.outerSize(); ++kb)
                for (SparseCd::InnerIterator ib(b, kb); ib; ++ib)
                    out.emplace_back(static_cast<int>(ia.row() * db + ib.row()),
                                     static_cast<int>(ia.col() * db + ib.col()),
                                     scale * ia.value() * ib.value());
}

MatrixXcd reshape_to_density(const VectorXcd& v, long dim) {
    MatrixXcd rho(dim, dim);
    for (long r = 0; r < dim; ++r) rho.row(r) = v.segment(r * dim, dim).transpose();
    return rho;
}

VectorXcd vectorize(const MatrixXcd& rho) {
    const long dim = rho.rows();
    VectorXcd v(dim * dim);
    for (long r = 0; r < dim; ++r) v.segment(r * dim, dim) = rho.row(r).transpose();
    return v;
}

Eigen::Matrix2cd rot_y(double phi) {
    Eigen::Matrix2cd r;
    r << std::cos(phi / 2), -std::sin(phi / 2), std::sin(phi / 2), std::cos(phi / 2);
    return r;
}

Eigen::Matrix2cd rot_z(double zeta) {
    const complexd i(0.0, 1.0);
    Eigen::Matrix2cd r = Eigen::Matrix2cd::Zero();
    r(0, 0) = std::exp(-i * (zeta / 2));
    r(1, 1) = std::exp(i * (zeta / 2));
    return r;
}

}  // namespace

LindbladSpec random_rotated_dissipators(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    const double zeta1 = angle(rng), phi1 = angle(rng);
    const double zeta2 = angle(rng), phi2 = angle(rng);

    const Eigen::Matrix2cd up = (sigma(0) + sigma('z')) / 2.0;    // |0><0|
    const Eigen::Matrix2cd down = (sigma(0) - sigma('z')) / 2.0;  // |1><1|
    Eigen::Matrix2cd lower = Eigen::Matrix2cd::Zero();
    lower(1, 0) = 1.0;  // sigma^- in the site basis (0 = up)

    const Eigen::Matrix2cd r1 = rot_z(zeta1) * rot_y(phi1);
    const Eigen::Matrix2cd r2 = rot_z(zeta2) * rot_y(phi2);

    JumpFamily pump;
    pump.op = r1 * up * r1.inverse();
    pump.width = 1;
    pump.rate = 1.0;

    JumpFamily hop;
    hop.op = kron(Eigen::MatrixXcd(r2 * lower * r2.inverse()), Eigen::MatrixXcd(down));
    hop.width = 2;
    hop.rate = 1.0;

    LindbladSpec spec;
    spec.jumps = {pump, hop};
    return spec;
}

LindbladSpec structured_dissipators(double gamma1, double gamma2, double gamma3, double gamma4,
                                    std::uint64_t) {
    for (double g : {gamma1, gamma2, gamma3, gamma4})
        if (g < 0.0 || g > 1.0) throw std::invalid_argument("dissipation rates must lie in [0, 1]");
    const complexd i(0.0, 1.0);
    const Eigen::Matrix2cd s_plus = 0.5 * (-sigma('z') + i * sigma('y'));   // raises in the x basis
    const Eigen::Matrix2cd s_minus = 0.5 * (-sigma('z') - i * sigma('y'));  // lowers in the x basis
    const Eigen::Matrix2cd p_up = 0.5 * (sigma(0) + sigma('x'));
    const Eigen::Matrix2cd p_down = 0.5 * (sigma(0) - sigma('x'));

    std::vector<JumpFamily> jumps;
    const auto add2 = [&](const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b, double rate) {
        JumpFamily f;
        f.op = kron(Eigen::MatrixXcd(a), Eigen::MatrixXcd(b));
        f.width = 2;
        f.rate = rate;
        jumps.push_back(std::move(f));
    };
    add2(s_plus, p_down, gamma1);
    add2(p_down, s_plus, gamma2);
    add2(s_minus, p_up, gamma3);
    add2(p_up, s_minus, gamma4);

    JumpFamily dephase;
    dephase.op = sigma('z');
    dephase.width = 1;
    dephase.rate = 1.0;
    jumps.push_back(std::move(dephase));

    LindbladSpec spec;
    spec.jumps = std::move(jumps);
    return spec;
}

Liouvillian build_liouvillian(const OperatorSpec& hamiltonian, const LindbladSpec& dissipators,
                              int sites) {
    const int N = sites;
    if (N < 1 || N > 7) throw std::invalid_argument("liouvillian assembly limited to 1 <= N <= 7");
    if (dissipators.epsilon < 0.0)
        throw std::invalid_argument("dissipation strength must be non-negative");
    const long dim = 1L << N;
    const long superdim = dim * dim;

    const SparseCd h = build_dense(hamiltonian, N, true).matrix.sparseView(1.0, 1e-15);
    SparseCd id(dim, dim);
    id.setIdentity();

    std::vector<Triplet> trips;
    const complexd i_unit(0.0, 1.0);
    append_kron(trips, h, id, -i_unit);
    append_kron(trips, id, SparseCd(h.transpose()), i_unit);

    for (const auto& family : dissipators.jumps) {
        if (family.width < 1 || family.width > 2)
            throw std::invalid_argument("jump operators must act on one or two sites");
        if (family.width > N)
            throw std::invalid_argument("jump operator width exceeds chain length");
        if (family.rate < 0.0) throw std::invalid_argument("jump rates must be non-negative");
        if (family.op.rows() != (1L << family.width) || family.op.cols() != (1L << family.width))
            throw std::invalid_argument("jump operator dimension does not match its width");
        if (family.rate == 0.0) continue;
        const double pref = dissipators.epsilon * family.rate;
        for (int j = 0; j < N; ++j) {
            const SparseCd l = embed_sparse(family.op, j, family.width, N);
            const SparseCd ldl = (SparseCd(l.adjoint()) * l).pruned();
            append_kron(trips, l, SparseCd(l.conjugate()), pref);
            append_kron(trips, ldl, id, -0.5 * pref);
            append_kron(trips, id, SparseCd(ldl.transpose()), -0.5 * pref);
        }
    }

    Liouvillian liou;
    liou.sites = N;
    liou.matrix.resize(superdim, superdim);
    liou.matrix.setFromTriplets(trips.begin(), trips.end());
    liou.matrix.prune(1.0, 1e-18);
    return liou;
}

double trace_defect(const Liouvillian& liou) {
    const long dim = 1L << liou.sites;
    VectorXcd trace_vec = VectorXcd::Zero(dim * dim);
    for (long r = 0; r < dim; ++r) trace_vec(r * dim + r) = 1.0;
    const VectorXcd row = liou.matrix.transpose() * trace_vec;
    return row.cwiseAbs().maxCoeff();
}

SteadyState steady_state(const Liouvillian& liou, const SteadyStateOptions& opt) {
    const long dim = 1L << liou.sites;
    const long superdim = dim * dim;
    if (liou.matrix.rows() != superdim) throw std::invalid_argument("liouvillian dimension mismatch");

    const auto finalize = [&](VectorXcd v) {
        MatrixXcd rho = reshape_to_density(v, dim);
        const complexd tr = rho.trace();
        if (std::abs(tr) < 1e-10 * v.norm())
            throw degeneracy_error("steady-state candidate is traceless; null space is not unique");
        rho /= tr;
        rho = ((rho + rho.adjoint()) / 2.0).eval();
        SteadyState s;
        s.residual = (liou.matrix * vectorize(rho)).norm();
        s.rho = std::move(rho);
        return s;
    };

    if (superdim <= 1024 && !opt.force_iterative) {
        Eigen::BDCSVD<MatrixXcd> svd(MatrixXcd(liou.matrix), Eigen::ComputeThinV);
        const Eigen::VectorXd& sv = svd.singularValues();
        const double second = sv(superdim - 2);
        if (second < opt.degeneracy_cutoff)
            throw degeneracy_error("steady state is not unique: second singular value " +
                                   std::to_string(second));
        SteadyState s = finalize(svd.matrixV().col(superdim - 1));
        s.second_singular = second;
        return s;
    }

    // Shifted inverse iteration on an LU factorization; the tiny shift only
    // guards the factorization against an exactly zero pivot.
    double scale = 0.0;
    for (int k = 0; k < liou.matrix.outerSize(); ++k)
        for (SparseCd::InnerIterator it(liou.matrix, k); it; ++it)
            scale = std::max(scale, std::abs(it.value()));
    const double shift = 1e-14 * std::max(1.0, scale);

    std::function<VectorXcd(const VectorXcd&)> solve, solve_adjoint;
    Eigen::PartialPivLU<MatrixXcd> dense_lu;
    Eigen::SparseLU<SparseCd> sparse_lu;
    if (superdim <= 4096) {
        MatrixXcd shifted(liou.matrix);
        shifted.diagonal().array() -= shift;
        dense_lu.compute(shifted);
        solve = [&dense_lu](const VectorXcd& b) { return VectorXcd(dense_lu.solve(b)); };
        solve_adjoint = [&dense_lu](const VectorXcd& b) {
            return VectorXcd(dense_lu.adjoint().solve(b));
        };
    } else {
        SparseCd shifted = liou.matrix;
        SparseCd eye(superdim, superdim);
        eye.setIdentity();
        shifted -= shift * eye;
        shifted.makeCompressed();
        sparse_lu.compute(shifted);
        if (sparse_lu.info() != Eigen::Success)
            throw numerical_error("sparse LU factorization of the liouvillian failed");
        solve = [&sparse_lu](const VectorXcd& b) { return VectorXcd(sparse_lu.solve(b)); };
        solve_adjoint = [&sparse_lu](const VectorXcd& b) {
            return VectorXcd(sparse_lu.adjoint().solve(b));
        };
    }

    VectorXcd w = VectorXcd::Zero(superdim);
    for (long r = 0; r < dim; ++r) w(r * dim + r) = 1.0;
    w /= w.norm();

    bool converged = false;
    for (int it = 0; it < opt.max_iterations; ++it) {
        VectorXcd y = solve(w);
        const double ny = y.norm();
        if (!std::isfinite(ny) || ny == 0.0)
            throw convergence_error("inverse iteration produced a non-finite direction");
        w = y / ny;
        if ((liou.matrix * w).norm() <= opt.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) throw convergence_error("steady-state inverse iteration did not reach tolerance");

    // Estimate the second singular value by deflated power iteration on
    // (L^dag L)^{-1}: growth g -> 1/sigma_2^2.
    std::mt19937_64 rng(opt.probe_seed);
    std::normal_distribution<double> gauss;
    VectorXcd u(superdim);
    for (long k = 0; k < superdim; ++k) u(k) = complexd(gauss(rng), gauss(rng));
    u -= w * w.dot(u);
    u /= u.norm();
    double growth = 0.0;
    for (int it = 0; it < 8; ++it) {
        VectorXcd y = solve(solve_adjoint(u));
        y -= w * w.dot(y);
        growth = y.norm();
        if (!std::isfinite(growth) || growth == 0.0) break;
        u = y / growth;
    }
    const double second = (growth > 0.0 && std::isfinite(growth)) ? 1.0 / std::sqrt(growth) : 0.0;
    if (second < opt.degeneracy_cutoff)
        throw degeneracy_error("steady state is not unique: second singular value estimate " +
                               std::to_string(second));

    SteadyState s = finalize(w);
    s.second_singular = second;
    return s;
}

}  // namespace spinobs
