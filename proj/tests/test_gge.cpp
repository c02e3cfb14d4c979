#include <doctest.h>

#include <random>

#include "oracle_utils.hpp"
#include "spinobs/errors.hpp"
#include "spinobs/gge.hpp"

using namespace spinobs;
using Eigen::MatrixXcd;
using Eigen::VectorXd;

namespace {

std::vector<OperatorSpec> charge_family(int n, double J = 1.0, double hx = 0.6) {
    std::vector<OperatorSpec> c;
    for (int k = 0; k < n; ++k) c.push_back(ising_charge(k, J, hx));
    return c;
}

}  // namespace

TEST_SUITE("gge") {

TEST_CASE("single-site thermal state matches the closed form") {
    // H = hx * sum_j x_j factorizes: <x> = tanh(lambda * hx) per site.
    OperatorSpec field;
    field.terms.emplace_back(0.6, PauliLabel("x"));
    const double lam = 0.8;
    const GGEState state = gge_state({field}, VectorXd::Constant(1, lam), 4);
    const ObservationVector obs = observe(state, 1);
    REQUIRE(obs.values.size() == 3);
    CHECK(obs.values(0) == doctest::Approx(std::tanh(lam * 0.6)).epsilon(1e-12));
    CHECK(std::abs(obs.values(1)) <= 1e-12);
    CHECK(std::abs(obs.values(2)) <= 1e-12);
}

TEST_CASE("ensemble matches a matrix-exponential oracle") {
    const int L = 5;
    const auto charges = charge_family(2);
    VectorXd lam(2);
    lam << 0.9, -0.4;
    const GGEState state = gge_state(charges, lam, L);

    MatrixXcd m = MatrixXcd::Zero(1 << L, 1 << L);
    for (int i = 0; i < 2; ++i) m += lam(i) * build_dense(charges[static_cast<std::size_t>(i)], L, true).matrix;
    MatrixXcd rho = oracle::expm(m);
    rho /= rho.trace();

    CHECK((state.rho - rho).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(std::abs(state.rho.trace().real() - 1.0) <= 1e-12);
    CHECK(is_hermitian(state.rho, 1e-12));
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(state.rho);
    CHECK(es.eigenvalues().minCoeff() >= -1e-13);
}

TEST_CASE("observation vectors are bounded and sized correctly") {
    const auto charges = charge_family(3);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int rep = 0; rep < 3; ++rep) {
        VectorXd lam(3);
        for (int i = 0; i < 3; ++i) lam(i) = unif(rng);
        const GGEState state = gge_state(charges, lam, 6);
        for (int s = 1; s <= 3; ++s) {
            const ObservationVector obs = observe(state, s);
            CHECK(obs.values.size() == 3L << (2 * (s - 1)));
            CHECK(obs.values.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
            CHECK(obs.support == s);
        }
    }
}

TEST_CASE("spectral shift of a charge leaves the state unchanged") {
    auto charges = charge_family(2);
    VectorXd lam(2);
    lam << 0.7, 0.3;
    const GGEState base = gge_state(charges, lam, 5);
    charges[0].terms.emplace_back(1.3, PauliLabel("0"));  // identity shift
    const GGEState shifted = gge_state(charges, lam, 5);
    CHECK((base.rho - shifted.rho).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("window observations reproduce conserved charge expectations") {
    const int L = 8;
    const auto charges = charge_family(3);
    VectorXd lam(3);
    lam << 0.5, -0.8, 0.25;
    const GGEState state = gge_state(charges, lam, L);
    const ObservationVector obs = observe(state, 3);

    for (const auto& charge : charges) {
        double from_window = 0.0;
        for (const auto& [coeff, label] : charge.terms)
            from_window += coeff * obs.values(label_index(label.padded(3), 3));
        from_window *= L;  // translation invariance: every offset contributes equally
        const double direct = expectation(state.rho, charge, L);
        CHECK(std::abs(from_window - direct) <= 1e-10 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("joint diagonalization agrees with direct ensembles") {
    const int L = 6;
    const auto charges = charge_family(3);
    const JointBasis jb = joint_diagonalize(charges, L);

    // Orthonormal basis, simultaneous eigenbasis of each charge.
    CHECK((jb.V.adjoint() * jb.V - MatrixXcd::Identity(jb.V.cols(), jb.V.cols())).cwiseAbs().maxCoeff() <=
          1e-11);

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int rep = 0; rep < 4; ++rep) {
        VectorXd lam(3);
        for (int i = 0; i < 3; ++i) lam(i) = unif(rng);
        VectorXd expo = VectorXd::Zero(jb.V.rows());
        for (int i = 0; i < 3; ++i) expo += lam(i) * jb.evals.row(i).transpose();
        const VectorXd w = ((expo.array() - expo.maxCoeff()).exp() /
                            (expo.array() - expo.maxCoeff()).exp().sum())
                               .matrix();
        const VectorXd fast = observe_in_basis(jb.V, w, L, 3);
        const VectorXd direct = observe(gge_state(charges, lam, L), 3).values;
        CHECK((fast - direct).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("thermal observation agrees with the ensemble path") {
    const OperatorSpec h = ising_hamiltonian(1.0, 0.6, 0.0);
    const VectorXd fast = thermal_observation(h, 6, 3);
    const VectorXd direct = observe(gge_state({h}, VectorXd::Constant(1, 1.0), 6), 3).values;
    CHECK((fast - direct).cwiseAbs().maxCoeff() <= 1e-12);

    // A spec with an odd-y label exercises the complex branch.
    OperatorSpec odd = ising_charge(1, 1.0, 0.6);
    odd.terms.emplace_back(0.3, PauliLabel("x"));
    const VectorXd fast2 = thermal_observation(odd, 5, 2);
    const VectorXd direct2 = observe(gge_state({odd}, VectorXd::Constant(1, 1.0), 5), 2).values;
    CHECK((fast2 - direct2).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("energy matching inverts the thermal map") {
    const OperatorSpec h = ising_hamiltonian(1.0, 0.6, 0.0);
    const int L = 6;
    const double s_true = 0.7;
    const GGEState state = gge_state({h}, VectorXd::Constant(1, s_true), L);
    const double e = expectation(state.rho, h, L) / L;
    CHECK(lambda_for_energy(h, e, L) == doctest::Approx(s_true).epsilon(1e-8));
    CHECK_THROWS_AS(lambda_for_energy(h, 100.0, L), std::invalid_argument);
}

TEST_CASE("ensemble argument validation") {
    const auto charges = charge_family(2);
    VectorXd lam(2);
    lam << 0.1, 0.2;
    CHECK_THROWS_AS(gge_state(charges, VectorXd::Constant(1, 0.1), 6), std::invalid_argument);
    CHECK_THROWS_AS(gge_state(charges, lam, 13), std::invalid_argument);
    CHECK_THROWS_AS(gge_state({}, VectorXd(), 6), std::invalid_argument);
    CHECK_THROWS_AS(observe_rdm(MatrixXcd::Identity(4, 4) / 4.0, 2, 5), std::invalid_argument);
}

}  // TEST_SUITE
