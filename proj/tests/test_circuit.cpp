#include <doctest.h>

#include <random>

#include "oracle_utils.hpp"
#include "spinobs/circuit.hpp"
#include "spinobs/errors.hpp"
#include "spinobs/pauli.hpp"

using namespace spinobs;
using Eigen::Matrix4cd;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

MatrixXcd gate_hamiltonian(const GateParams& p) {
    const complexd i(0.0, 1.0);
    const double a = (p.theta2 - p.theta1) / 2;
    const double b = (p.theta1 + p.theta2) / 2;
    MatrixXcd raise = MatrixXcd::Zero(2, 2), lower = MatrixXcd::Zero(2, 2);
    raise(0, 1) = 1.0;  // |up><down|
    lower(1, 0) = 1.0;
    const MatrixXcd z = sigma('z'), id = MatrixXcd::Identity(2, 2);
    return a * (kron(raise, lower) + kron(lower, raise)) + b * kron(z, z) +
           p.c * (kron(z, id) + kron(id, z));
}

// Total-magnetization expectation of a statevector.
double magnetization(const VectorXcd& psi, int L) {
    double m = 0.0;
    for (long n = 0; n < psi.size(); ++n)
        m += std::norm(psi(n)) * (L - 2 * __builtin_popcountl(static_cast<unsigned long>(n)));
    return m;
}

long neel_index(int L) {  // |up down up down ...>
    long n = 0;
    for (int l = 1; l < L; l += 2) n |= 1L << (L - 1 - l);
    return n;
}

// Dense matrix of one sublayer, built from independently embedded gates.
MatrixXcd dense_layer(const Matrix4cd& gate, int parity, int L) {
    const long dim = 1L << L;
    MatrixXcd layer = MatrixXcd::Identity(dim, dim);
    for (int j = parity; j < L; j += 2) {
        const std::array<int, 2> sites{j, (j + 1) % L};
        layer = embed_operator(gate, sites, L) * layer;
    }
    return layer;
}

}  // namespace

TEST_SUITE("circuit") {

TEST_CASE("zero parameters give the identity gate") {
    CHECK((gate_unitary(GateParams{}) - Matrix4cd::Identity()).norm() <= 1e-15);
}

TEST_CASE("closed-form gate matches the exponential oracle and conserves charge") {
    std::mt19937_64 rng(31);
    const MatrixXcd z = sigma('z'), id = MatrixXcd::Identity(2, 2);
    const MatrixXcd charge = kron(z, id) + kron(id, z);
    for (int k = 0; k < 100; ++k) {
        const GateParams p = sample_gate_params(rng);
        const Matrix4cd u = gate_unitary(p);
        CHECK((u.adjoint() * u - Matrix4cd::Identity()).norm() <= 1e-13);
        CHECK((u * charge - charge * u).norm() <= 1e-13);
        const complexd i(0.0, 1.0);
        const MatrixXcd oracle_u = oracle::expm(MatrixXcd(-i * p.dt * gate_hamiltonian(p)));
        CHECK((u - oracle_u).norm() <= 1e-12);
    }
}

TEST_CASE("identity gates leave the state unchanged") {
    const int L = 6;
    VectorXcd psi = product_state(1.1, -0.4, L);
    VectorXcd before = psi;
    brickwork_step(psi, Matrix4cd::Identity(), Matrix4cd::Identity(), L);
    CHECK((psi - before).norm() <= 1e-15);
}

TEST_CASE("brickwork conserves norm and magnetization from a Neel state") {
    const int L = 8;
    VectorXcd psi = VectorXcd::Zero(1L << L);
    psi(neel_index(L)) = 1.0;
    const double m0 = magnetization(psi, L);
    REQUIRE(m0 == doctest::Approx(0.0));

    std::mt19937_64 rng(7);
    for (int step = 0; step < 20; ++step) {
        const Matrix4cd even = gate_unitary(sample_gate_params(rng));
        const Matrix4cd odd = gate_unitary(sample_gate_params(rng));
        brickwork_step(psi, even, odd, L);
        CHECK(std::abs(psi.norm() - 1.0) <= 1e-12);
        CHECK(std::abs(magnetization(psi, L) - m0) <= 1e-10);
    }
}

TEST_CASE("one step matches a dense layer oracle at L = 6") {
    const int L = 6;
    std::mt19937_64 rng(11);
    const Matrix4cd even = gate_unitary(sample_gate_params(rng));
    const Matrix4cd odd = gate_unitary(sample_gate_params(rng));

    VectorXcd psi = VectorXcd::Zero(1L << L);
    psi(neel_index(L)) = 1.0;
    const VectorXcd oracle_psi = dense_layer(odd, 1, L) * (dense_layer(even, 0, L) * psi);
    brickwork_step(psi, even, odd, L);
    CHECK((psi - oracle_psi).norm() <= 1e-13);
}

TEST_CASE("averaged window of simple product states") {
    const int L = 6;
    const VectorXcd up = product_state(0.0, 0.0, L);
    MatrixXcd rdm = averaged_rdm(up, 2, L);
    MatrixXcd projector = MatrixXcd::Zero(4, 4);
    projector(0, 0) = 1.0;
    CHECK((rdm - projector).norm() <= 1e-14);

    VectorXcd neel = VectorXcd::Zero(1L << L);
    neel(neel_index(L)) = 1.0;
    rdm = averaged_rdm(neel, 2, L);
    MatrixXcd expected = MatrixXcd::Zero(4, 4);
    expected(1, 1) = 0.5;
    expected(2, 2) = 0.5;
    CHECK((rdm - expected).norm() <= 1e-14);
}

TEST_CASE("averaged window matches a density-matrix propagation oracle") {
    const int L = 8, support = 3;
    std::mt19937_64 rng(5);
    const Matrix4cd even = gate_unitary(sample_gate_params(rng));
    const Matrix4cd odd = gate_unitary(sample_gate_params(rng));

    VectorXcd psi = product_state(0.9, 0.3, L);
    MatrixXcd rho = psi * psi.adjoint();
    const MatrixXcd layer = dense_layer(odd, 1, L) * dense_layer(even, 0, L);
    rho = layer * rho * layer.adjoint();

    const MatrixXcd shift = cyclic_shift(L);
    MatrixXcd oracle_rdm = MatrixXcd::Zero(1L << support, 1L << support);
    MatrixXcd rotated = rho;
    for (int t = 0; t < L; ++t) {
        oracle_rdm += partial_trace_front(rotated, support, L);
        rotated = shift * rotated * shift.adjoint();
    }
    oracle_rdm /= static_cast<double>(L);

    brickwork_step(psi, even, odd, L);
    CHECK((averaged_rdm(psi, support, L) - oracle_rdm).norm() <= 1e-12);
}

TEST_CASE("trajectory records the product-state observation at time zero") {
    TrajectoryOptions opt;
    opt.sites = 8;
    opt.support = 3;
    opt.steps = 4;
    opt.record_steps = {0, 4};
    opt.seed = 99;
    const double theta = 1.9, phi = -2.2;
    const TrajectoryRecord rec = run_trajectory(theta, phi, opt);
    REQUIRE(rec.observations.size() == 2);
    REQUIRE(rec.steps == std::vector<int>{0, 4});
    CHECK(rec.times[1] == doctest::Approx(0.4));

    const int zi = label_index(PauliLabel("z00"), 3);
    const int xi = label_index(PauliLabel("x00"), 3);
    const int yi = label_index(PauliLabel("y00"), 3);
    CHECK(rec.observations[0].values(zi) == doctest::Approx(std::cos(theta)).epsilon(1e-12));
    CHECK(rec.observations[0].values(xi) ==
          doctest::Approx(std::sin(theta) * std::cos(phi)).epsilon(1e-12));
    CHECK(rec.observations[0].values(yi) ==
          doctest::Approx(std::sin(theta) * std::sin(phi)).epsilon(1e-12));

    // U(1): the window-averaged magnetization never moves.
    CHECK(std::abs(rec.observations[1].values(zi) - std::cos(theta)) <= 1e-9);
}

TEST_CASE("trajectories are deterministic in the seed") {
    TrajectoryOptions opt;
    opt.sites = 6;
    opt.support = 2;
    opt.steps = 12;
    opt.seed = 4242;
    const TrajectoryRecord a = run_trajectory(0.7, 0.1, opt);
    const TrajectoryRecord b = run_trajectory(0.7, 0.1, opt);
    REQUIRE(a.observations.size() == b.observations.size());
    for (std::size_t k = 0; k < a.observations.size(); ++k)
        CHECK((a.observations[k].values - b.observations[k].values).norm() == 0.0);

    opt.seed = 4243;
    const TrajectoryRecord c = run_trajectory(0.7, 0.1, opt);
    CHECK((a.observations.back().values - c.observations.back().values).norm() > 1e-8);
}

TEST_CASE("default recording grid is dense then logarithmic") {
    const std::vector<int> grid = default_record_steps(1000);
    for (int s = 0; s <= 10; ++s) CHECK(grid[static_cast<std::size_t>(s)] == s);
    CHECK(grid.back() == 1000);
    CHECK(std::is_sorted(grid.begin(), grid.end()));
    // Log spacing: strictly growing gaps in the tail.
    const std::size_t n = grid.size();
    CHECK(grid[n - 1] - grid[n - 2] > grid[12] - grid[11]);
    CHECK(grid.size() < 45);  // far sparser than 1000 dense steps

    CHECK(default_record_steps(5) == std::vector<int>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("trajectory input validation") {
    TrajectoryOptions opt;
    opt.sites = 7;  // odd
    CHECK_THROWS_AS(run_trajectory(0.3, 0.1, opt), std::invalid_argument);
    opt.sites = 6;
    opt.support = 4;  // > L/2
    CHECK_THROWS_AS(run_trajectory(0.3, 0.1, opt), std::invalid_argument);
    opt.support = 3;
    opt.record_steps = {0, 999};
    CHECK_THROWS_AS(run_trajectory(0.3, 0.1, opt), std::invalid_argument);
}

}  // TEST_SUITE
