#pragma once

// Reconstruction of translationally invariant Hamiltonian couplings from
// (approximately) thermal observation data: candidate terms are ranked by
// their gradient along the learned one-dimensional manifold coordinate, the
// couplings solve the thermal matching conditions
//   Tr[O(alpha) e^{sum_a a_alpha O(alpha)}] / Tr[e^{...}] = target[alpha]
// by damped Newton iteration, and per-realization answers are combined as
// coupling ratios (only ratios are physical; the overall scale plays the
// role of the inverse temperature, fixed to 1 inside the oracle).

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

#include "spinobs/dataset.hpp"
#include "spinobs/pauli.hpp"

namespace spinobs {

enum class EmbeddingMode {
    tangent,  // latents are already a 1-D manifold coordinate (exactly thermal data)
    pca1,     // use the first principal direction of a multi-D latent set
};

struct CandidateRanking {
    // (trimmed label, mean |gradient| along the manifold coordinate), sorted
    // descending.
    std::vector<std::pair<PauliLabel, double>> magnitudes;
    EmbeddingMode mode = EmbeddingMode::tangent;
};

// Local linear regression of every observation component over the k nearest
// neighbors in the manifold coordinate, averaged over rows.
CandidateRanking rank_candidates(const Dataset& ds, const Eigen::MatrixXd& latents,
                                 EmbeddingMode mode, int k = 10);

struct NewtonOptions {
    double tol = 1e-9;            // sup-norm residual target of the matching conditions
    int max_iterations = 50;
    double fd_step = 1e-5;        // central-difference step for the Jacobian
    double prune_fraction = 1e-3; // |a| below this fraction of max|a| -> eliminated
    int oracle_sites = 10;
};

struct ReconstructionResult {
    std::vector<PauliLabel> candidates;
    Eigen::VectorXd coefficients;      // newton_solve: raw couplings; reconstruct: ratios
    std::vector<PauliLabel> pruned;    // candidates eliminated by the pruning threshold
    double residual = 0.0;
    int iterations = 0;
    // Filled by reconstruct():
    int rows_used = 0;
    int rows_converged = 0;
    int rows_low_signal = 0;
    PauliLabel reference;    // candidate the ratio normalization divides by
    Eigen::VectorXd spread;  // per-candidate standard deviation of the ratios
};

// Solves the matching conditions restricted to the candidate labels (a square
// system).  At most 6 candidates; throws ill_posed_error when the Jacobian
// condition number exceeds 1e12 and convergence_error when damping stalls.
ReconstructionResult newton_solve(const std::vector<PauliLabel>& candidates,
                                  const Eigen::VectorXd& target, int support,
                                  const NewtonOptions& opt = {});

struct ReconstructOptions {
    EmbeddingMode mode = EmbeddingMode::tangent;
    int top_m = 5;   // candidates kept from the ranking
    int knn = 10;
    NewtonOptions newton;
    double low_signal_threshold = 0.05;  // rows with sup|obs| below are excluded
    // Thermality guard: evidence that one latent variable explains the data,
    // measured as best_test_loss(N_L = 1) / best_test_loss(N_L = 0) from a
    // latent sweep.  Negative = not supplied.
    double guard_ratio = -1.0;
    double guard_threshold = 1e-2;
    bool override_guard = false;
};

// Full pipeline: guard, rank, per-row solve, ratio averaging relative to the
// candidate with the largest median recovered coupling.  Throws
// convergence_error when fewer than 25% of the usable rows converge.
ReconstructionResult reconstruct(const Dataset& ds, const Eigen::MatrixXd& latents,
                                 const ReconstructOptions& opt);

}  // namespace spinobs
