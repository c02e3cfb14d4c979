#pragma once

// U(1)-symmetric translationally invariant random brickwork circuits on a
// dense statevector, with translation-averaged reduced density matrices.
//
// Each two-site gate is exp(-i dt H) with
//   H = a (S1+ S2- + S1- S2+) + b s1z s2z + c (s1z + s2z),
//   a = (theta2 - theta1) / 2,  b = (theta1 + theta2) / 2,
// which is block diagonal in the link magnetization, so the exponential has
// a closed form.  A full step applies the gate on all even links and then on
// all odd links of the periodic chain; by default every sublayer draws a
// fresh gate.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

#include "spinobs/gge.hpp"
#include "spinobs/linalg.hpp"

namespace spinobs {

struct GateParams {
    double theta1 = 0.0;  // in [-pi, pi]
    double theta2 = 0.0;  // in [-pi, pi]
    double c = 0.0;       // in [-pi/2, pi/2]
    double dt = 0.1;
};

GateParams sample_gate_params(std::mt19937_64& rng);

// Closed-form exp(-i dt H); unitary and U(1)-block-diagonal by construction.
Eigen::Matrix4cd gate_unitary(const GateParams& params);

// (cos(theta/2) |up> + e^{i phi} sin(theta/2) |down>)^{tensor L}.
Eigen::VectorXcd product_state(double theta, double phi, int L);

// Applies `gate` on every link (j, j+1 mod L) with j = parity (mod 2),
// in place.  Requires L even so the two sublayers tile the ring.
void apply_link_layer(Eigen::VectorXcd& psi, const Eigen::Matrix4cd& gate, int parity, int L);

// One brickwork step: even links with `even_gate`, then odd links with
// `odd_gate`.
void brickwork_step(Eigen::VectorXcd& psi, const Eigen::Matrix4cd& even_gate,
                    const Eigen::Matrix4cd& odd_gate, int L);

// Reduced density matrix of a `support`-site window averaged over all L
// translations of the window; restores the one-site translation symmetry
// broken by brickwork parity.  Requires support <= L / 2.
Eigen::MatrixXcd averaged_rdm(const Eigen::VectorXcd& psi, int support, int L);

// Steps 0..min(10, total) (every 0.1 in time), then log-spaced up to `total`.
std::vector<int> default_record_steps(int total);

struct TrajectoryOptions {
    int sites = 16;     // even, 2..20
    int support = 3;    // 1..4 and <= sites / 2
    int steps = 100;
    std::vector<int> record_steps;  // empty -> default_record_steps(steps)
    std::uint64_t seed = 0;
};

struct TrajectoryRecord {
    double theta = 0.0;
    double phi = 0.0;
    std::uint64_t seed = 0;
    int sites = 0;
    int support = 0;
    std::vector<int> steps;
    std::vector<double> times;
    std::vector<ObservationVector> observations;
};

// Evolves the Bloch product state under a fresh pair of gates per step and
// records the observation vector of the averaged window at the requested
// steps.
TrajectoryRecord run_trajectory(double theta, double phi, const TrajectoryOptions& opt);

}  // namespace spinobs
