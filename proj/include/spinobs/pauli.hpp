#pragma once

// Pauli-string labels, operator specifications, and dense realizations on
// short spin-1/2 chains.
//
// A label is a word over {0, x, y, z}; symbol i acts on site (offset + i) of
// the chain.  Canonical labels start with a non-identity symbol (so that the
// same physical string is never counted twice at different offsets); the pure
// identity label "0...0" is also canonical.

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spinobs/linalg.hpp"

namespace spinobs {

class PauliLabel {
  public:
    PauliLabel() = default;
    explicit PauliLabel(std::string symbols);  // throws std::invalid_argument on bad symbols

    int size() const { return static_cast<int>(symbols_.size()); }
    char at(int i) const { return symbols_.at(static_cast<std::size_t>(i)); }
    const std::string& str() const { return symbols_; }

    bool is_identity() const;   // all symbols '0'
    bool is_canonical() const;  // first symbol != '0', or pure identity
    int weight() const;         // number of non-identity symbols

    PauliLabel padded(int support) const;  // right-pad with '0' to length `support`
    PauliLabel trimmed() const;            // drop trailing '0' symbols (keeps length >= 1)

    // '0' < 'x' < 'y' < 'z' holds in ASCII, so string order is symbol order.
    friend auto operator<=>(const PauliLabel&, const PauliLabel&) = default;

  private:
    std::string symbols_;
};

// The four single-site Pauli matrices; index 0,1,2,3 = identity, x, y, z.
Eigen::Matrix2cd sigma(int idx);
Eigen::Matrix2cd sigma(char symbol);

// Dense matrix of a single label acting on sites offset..offset+len-1 of an
// L-site chain (sites wrap cyclically when offset + len > L).
Eigen::MatrixXcd pauli_string_matrix(const PauliLabel& label, int offset, int L);

// All canonical non-identity labels of exactly the given support length, in
// lexicographic (= enumeration) order.  There are 3 * 4^(support-1) of them.
std::vector<PauliLabel> enumerate_support_strings(int support);

// Position of a canonical label inside enumerate_support_strings(support).
int label_index(const PauliLabel& label, int support);

// A Hermitian operator given as a real combination of canonical labels.  When
// translationally_invariant is set the combination is summed over all chain
// offsets on realization.
struct OperatorSpec {
    std::vector<std::pair<double, PauliLabel>> terms;
    bool translationally_invariant = true;

    int support() const;  // longest label length (0 when empty)
    void validate() const;

    std::string to_text() const;                       // structured one-object JSON record
    static OperatorSpec from_text(const std::string&); // inverse; throws std::invalid_argument
};

struct DenseOperator {
    Eigen::MatrixXcd matrix;
    int sites = 0;
};

// Dense realization of a spec on an L-site chain.  Requires support <= L <= 14
// and, for periodic translation-invariant sums, support < L.
DenseOperator build_dense(const OperatorSpec& spec, int L, bool periodic = true);

// Transverse/longitudinal-field Ising chain:
//   H = sum_j [ J z_j z_{j+1} + hx x_j + hz z_j ].
OperatorSpec ising_hamiltonian(double J, double hx, double hz);

// k-th local conserved charge of the hz = 0 Ising chain, as a canonical label
// combination; k = 0 returns the Hamiltonian itself.  All charges commute
// pairwise under periodic boundary conditions.
OperatorSpec ising_charge(int k, double J, double hx);

}  // namespace spinobs
