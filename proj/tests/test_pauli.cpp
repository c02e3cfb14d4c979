#include <doctest.h>

#include <random>

#include "spinobs/linalg.hpp"
#include "spinobs/pauli.hpp"

using namespace spinobs;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

double maxdiff(const MatrixXcd& a, const MatrixXcd& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Independent dense construction of a padded label at a non-wrapping offset,
// built purely from kron chains of single-site matrices.
MatrixXcd kron_chain_oracle(const PauliLabel& label, int offset, int L) {
    MatrixXcd m = MatrixXcd::Identity(1, 1);
    for (int site = 0; site < L; ++site) {
        const int i = site - offset;
        const Eigen::Matrix2cd s =
            (i >= 0 && i < label.size()) ? sigma(label.at(i)) : Eigen::Matrix2cd::Identity();
        m = kron(m, s).eval();
    }
    return m;
}

MatrixXcd commutator(const MatrixXcd& a, const MatrixXcd& b) { return a * b - b * a; }

}  // namespace

TEST_SUITE("pauli") {

TEST_CASE("single-site pauli algebra") {
    const complexd i(0.0, 1.0);
    for (int k = 0; k < 4; ++k) {
        CHECK(maxdiff(sigma(k) * sigma(k), Eigen::Matrix2cd::Identity()) == 0.0);
        CHECK(maxdiff(sigma(k), sigma(k).adjoint()) == 0.0);
    }
    CHECK(maxdiff(sigma('x') * sigma('y'), i * MatrixXcd(sigma('z'))) == 0.0);
    CHECK(maxdiff(sigma('y') * sigma('z'), i * MatrixXcd(sigma('x'))) == 0.0);
    CHECK(maxdiff(sigma('z') * sigma('x'), i * MatrixXcd(sigma('y'))) == 0.0);
    CHECK(maxdiff(sigma('x') * sigma('y') + sigma('y') * sigma('x'), MatrixXcd::Zero(2, 2)) == 0.0);
}

TEST_CASE("label validation and canonical form") {
    CHECK_THROWS_AS(PauliLabel(""), std::invalid_argument);
    CHECK_THROWS_AS(PauliLabel("xqz"), std::invalid_argument);
    CHECK(PauliLabel("x0z").is_canonical());
    CHECK(!PauliLabel("0xz").is_canonical());
    CHECK(PauliLabel("000").is_canonical());  // pure identity is canonical
    CHECK(PauliLabel("000").is_identity());
    CHECK(PauliLabel("x0z").weight() == 2);
    CHECK(PauliLabel("zx").padded(4).str() == "zx00");
    CHECK(PauliLabel("zx00").trimmed().str() == "zx");
    CHECK(PauliLabel("000").trimmed().str() == "0");
    CHECK(PauliLabel("x") < PauliLabel("y"));
    CHECK(PauliLabel("x0") < PauliLabel("xx"));
}

TEST_CASE("enumeration counts and order") {
    for (int s = 1; s <= 4; ++s) {
        auto labels = enumerate_support_strings(s);
        CHECK(labels.size() == 3u << (2 * (s - 1)));
        for (std::size_t k = 0; k < labels.size(); ++k) {
            CHECK(labels[k].is_canonical());
            CHECK(!labels[k].is_identity());
            CHECK(labels[k].size() == s);
            if (k > 0) CHECK(labels[k - 1] < labels[k]);
            CHECK(label_index(labels[k], s) == static_cast<int>(k));
        }
    }
    auto s3 = enumerate_support_strings(3);
    CHECK(s3.front().str() == "x00");
    CHECK(s3[1].str() == "x0x");
    CHECK(s3.back().str() == "zzz");
}

TEST_CASE("string matrices match kron chains") {
    std::mt19937_64 rng(11);
    const int L = 5;
    const char syms[4] = {'0', 'x', 'y', 'z'};
    for (int rep = 0; rep < 20; ++rep) {
        const int len = 1 + static_cast<int>(rng() % 3);
        std::string s;
        s.push_back(syms[1 + rng() % 3]);
        for (int i = 1; i < len; ++i) s.push_back(syms[rng() % 4]);
        const PauliLabel label(s);
        const int offset = static_cast<int>(rng() % static_cast<unsigned>(L - len + 1));
        CHECK(maxdiff(pauli_string_matrix(label, offset, L), kron_chain_oracle(label, offset, L)) <= 1e-15);
    }
}

TEST_CASE("wrapped string matches embedded operator") {
    const int L = 4;
    const MatrixXcd direct = pauli_string_matrix(PauliLabel("zy"), L - 1, L);
    const std::vector<int> sites{L - 1, 0};
    const MatrixXcd embedded = embed_operator(kron(sigma('z'), sigma('y')), sites, L);
    CHECK(maxdiff(direct, embedded) <= 1e-15);
}

TEST_CASE("dense ising hamiltonian matches a hand-built sum") {
    const int L = 3;
    const double J = 1.0, hx = 0.6, hz = 0.3;
    MatrixXcd h = MatrixXcd::Zero(8, 8);
    for (int j = 0; j < L; ++j) {
        const std::vector<int> pair{j, (j + 1) % L};
        h += J * embed_operator(kron(sigma('z'), sigma('z')), pair, L);
        const std::vector<int> one{j};
        h += hx * embed_operator(sigma('x'), one, L);
        h += hz * embed_operator(sigma('z'), one, L);
    }
    const DenseOperator built = build_dense(ising_hamiltonian(J, hx, hz), L, true);
    CHECK(built.sites == L);
    CHECK(maxdiff(built.matrix, h) <= 1e-14);

    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es2(built.matrix);
    CHECK(std::abs(es.eigenvalues()(0) - es2.eigenvalues()(0)) <= 1e-13);
}

TEST_CASE("periodic translation-invariant operators commute with translation") {
    const int L = 6;
    OperatorSpec spec;
    spec.terms.emplace_back(0.7, PauliLabel("zy"));
    spec.terms.emplace_back(-1.2, PauliLabel("x0z"));
    spec.terms.emplace_back(0.4, PauliLabel("y"));
    const MatrixXcd m = build_dense(spec, L, true).matrix;
    const MatrixXcd t = cyclic_shift(L);
    CHECK(maxdiff(t * m * t.adjoint(), m) <= 1e-13);
    CHECK(is_hermitian(m, 1e-13));
}

TEST_CASE("charge tower commutes pairwise") {
    const int L = 8;
    const double J = 1.0, hx = 0.6;
    std::vector<MatrixXcd> c;
    for (int k = 0; k <= 4; ++k) c.push_back(build_dense(ising_charge(k, J, hx), L, true).matrix);
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(is_hermitian(c[i], 1e-13));
        for (std::size_t j = i; j < c.size(); ++j)
            CHECK(commutator(c[i], c[j]).norm() <= 1e-10);
    }
    // Charge 0 is the hamiltonian itself (at hz = 0).
    CHECK(maxdiff(c[0], build_dense(ising_hamiltonian(J, hx, 0.0), L, true).matrix) == 0.0);
    // The tower members are linearly independent (pairwise-orthogonal traces aside,
    // check the Gram determinant of the first three is far from zero).
    Eigen::Matrix3d gram;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) gram(i, j) = (c[i].adjoint() * c[j]).trace().real();
    CHECK(std::abs(gram.determinant()) > 1.0);
}

TEST_CASE("operator spec text round-trip") {
    OperatorSpec spec;
    spec.terms.emplace_back(1.0, PauliLabel("zz"));
    spec.terms.emplace_back(0.6, PauliLabel("x"));
    spec.terms.emplace_back(1.0 / 3.0, PauliLabel("zxz"));
    spec.translationally_invariant = true;
    const OperatorSpec back = OperatorSpec::from_text(spec.to_text());
    REQUIRE(back.terms.size() == spec.terms.size());
    for (std::size_t i = 0; i < spec.terms.size(); ++i) {
        CHECK(back.terms[i].first == spec.terms[i].first);  // exact double round-trip
        CHECK(back.terms[i].second == spec.terms[i].second);
    }
    CHECK(back.translationally_invariant == spec.translationally_invariant);
    CHECK_THROWS_AS(OperatorSpec::from_text("not json"), std::invalid_argument);
    CHECK_THROWS_AS(OperatorSpec::from_text("{\"terms\":[[1.0,\"0x\"]],\"translationally_invariant\":true}"),
                    std::invalid_argument);
}

TEST_CASE("build_dense rejects bad input") {
    OperatorSpec spec;
    spec.terms.emplace_back(1.0, PauliLabel("zz"));
    CHECK_THROWS_AS(build_dense(spec, 1, true), std::invalid_argument);   // support > L
    CHECK_THROWS_AS(build_dense(spec, 2, true), std::invalid_argument);   // periodic needs L > support
    CHECK_THROWS_AS(build_dense(spec, 15, true), std::invalid_argument);  // resource cap
    CHECK_NOTHROW(build_dense(spec, 2, false));
    OperatorSpec empty;
    CHECK_THROWS_AS(build_dense(empty, 4, true), std::invalid_argument);
}

TEST_CASE("partial trace and window rdm agree") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss;
    const int L = 6;
    VectorXcd psi(1 << L);
    for (int n = 0; n < psi.size(); ++n) psi(n) = complexd(gauss(rng), gauss(rng));
    psi.normalize();
    const MatrixXcd rho = psi * psi.adjoint();

    const MatrixXcd front = partial_trace_front(rho, 2, L);
    CHECK(maxdiff(front, window_rdm(psi, 0, 2, L)) <= 1e-13);
    CHECK(std::abs(front.trace().real() - 1.0) <= 1e-12);
    CHECK(is_hermitian(front, 1e-12));

    // A wrapped window of psi equals the front window of the translated state.
    const VectorXcd shifted = cyclic_shift(L) * psi;
    CHECK(maxdiff(window_rdm(psi, L - 1, 2, L), window_rdm(shifted, 0, 2, L)) <= 1e-13);
}

}  // TEST_SUITE
