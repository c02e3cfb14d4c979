#pragma once

// Thermal and generalized Gibbs ensembles of short Ising chains, together
// with local Pauli-string observation vectors.
//
// An observation vector collects the expectation values of every canonical
// non-identity label on a fixed window of `support` sites, in enumeration
// order, so its length is 3 * 4^(support-1).

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "spinobs/pauli.hpp"

namespace spinobs {

struct ObservationVector {
    Eigen::VectorXd values;
    int support = 0;
    std::string provenance;
};

struct GGEState {
    Eigen::MatrixXcd rho;
    Eigen::VectorXd lambda;
    std::vector<OperatorSpec> charges;
    int sites = 0;
};

// rho proportional to exp(sum_i lambda_i C_i), normalized to unit trace.
// Charges are realized periodically; requires 1 <= |charges| <= 4 and the
// chain short enough for dense work (L <= 12).
GGEState gge_state(const std::vector<OperatorSpec>& charges, const Eigen::VectorXd& lambda, int L);

// Expectations of all canonical labels on the leftmost `support` sites.
Eigen::VectorXd observe_rdm(const Eigen::MatrixXcd& rho, int L, int support);
ObservationVector observe(const GGEState& state, int support);

// Tr[rho * dense(spec)] for a full-chain density matrix.
double expectation(const Eigen::MatrixXcd& rho, const OperatorSpec& spec, int L);

// Common eigenbasis of a family of commuting charges, found by sequentially
// refining degenerate blocks.  evals(i, k) is the eigenvalue of charge i on
// basis column k.  Throws numerical_error if the family fails to commute.
struct JointBasis {
    Eigen::MatrixXcd V;
    Eigen::MatrixXd evals;
    int sites = 0;
};
JointBasis joint_diagonalize(const std::vector<OperatorSpec>& charges, int L);

// M(k, alpha) = <v_k| P_alpha |v_k> for every canonical label alpha on the
// leftmost window; observation vectors of any state diagonal in V are then
// M^T * weights.
Eigen::MatrixXd observation_matrix(const Eigen::MatrixXcd& V, int L, int support);

// Observation vector of rho = V diag(weights) V^dagger (weights normalized
// by the caller).
Eigen::VectorXd observe_in_basis(const Eigen::MatrixXcd& V, const Eigen::VectorXd& weights, int L,
                                 int support);

// Observation vector of rho proportional to exp(dense(coeffs)) on an L-site
// periodic chain.  Detects specs whose dense form is purely real and uses the
// cheaper real eigensolver in that case.
Eigen::VectorXd thermal_observation(const OperatorSpec& coeffs, int L, int support);

// Inverse problem for the thermal family rho(s) = exp(s * dense(H)) / Z:
// find s with Tr[rho(s) H] / L equal to the requested energy density.
double lambda_for_energy(const OperatorSpec& hamiltonian, double energy_density, int L);

}  // namespace spinobs
