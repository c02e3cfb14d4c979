#pragma once

// Driven-dissipative chains: Liouvillian superoperators for translation
// families of local jump operators, and their unique steady states.
//
// Vectorization is row-stacking: vec(rho)[r * dim + c] = rho(r, c), so
// vec(A rho B) = (A kron B^T) vec(rho) and the equation of motion reads
//   d vec(rho)/dt = [ -i (H kron I - I kron H^T)
//                     + eps * sum_{k,j} rate_k ( L kron conj(L)
//                         - 1/2 (L^dag L) kron I - 1/2 I kron (L^dag L)^T ) ] vec(rho).

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <vector>

#include "spinobs/pauli.hpp"

namespace spinobs {

// One translation family of jump operators: `op` acts on `width` consecutive
// sites and is applied at every chain site (wrapping periodically).
struct JumpFamily {
    Eigen::MatrixXcd op;
    int width = 1;
    double rate = 1.0;
};

// The dissipative part of the model: jump families plus the global coupling
// strength epsilon.  The Hamiltonian is supplied separately at assembly time.
struct LindbladSpec {
    std::vector<JumpFamily> jumps;
    double epsilon = 1e-3;
};

struct Liouvillian {
    Eigen::SparseMatrix<complexd> matrix;  // 4^N x 4^N
    int sites = 0;
};

struct SteadyState {
    Eigen::MatrixXcd rho;
    double residual = 0.0;         // ||L vec(rho)||_2 after normalization
    double second_singular = 0.0;  // uniqueness margin estimate
};

// Angles drawn uniformly from [-pi, pi]; a rotated one-site projector jump
// and a rotated-lowering (x) down-projector two-site jump, both at rate 1.
LindbladSpec random_rotated_dissipators(std::uint64_t seed);

// Spin-flip ladder in the x basis: four two-site families at the given rates
// plus one-site sigma^z dephasing at rate 1.  The operators are fully
// determined by the rates; `seed` is accepted for interface symmetry with the
// rotated family and recorded nowhere.
LindbladSpec structured_dissipators(double gamma1, double gamma2, double gamma3, double gamma4,
                                    std::uint64_t seed = 0);

// Sparse assembly of the superoperator; 1 <= N <= 7.
Liouvillian build_liouvillian(const OperatorSpec& hamiltonian, const LindbladSpec& dissipators,
                              int sites);

// sup norm of vec(I)^T L, which vanishes identically for a trace-preserving
// generator.
double trace_defect(const Liouvillian& liou);

struct SteadyStateOptions {
    double tol = 1e-10;             // residual target for the iterative path
    int max_iterations = 50;
    double degeneracy_cutoff = 1e-10;  // second singular value below this -> error
    std::uint64_t probe_seed = 12345;
    bool force_iterative = false;  // take the LU path even when small enough for SVD
};

// Unique steady state: dense null-space SVD up to N = 5, shifted inverse
// iteration on an LU factorization beyond (dense LU at N = 6, sparse LU at
// N = 7).  Throws degeneracy_error when the null space is not one-dimensional
// and convergence_error when the iteration stalls.
SteadyState steady_state(const Liouvillian& liou, const SteadyStateOptions& opt = {});

}  // namespace spinobs
