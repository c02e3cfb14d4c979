#include "spinobs/pauli.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace spinobs {

namespace {

bool valid_symbol(char c) { return c == '0' || c == 'x' || c == 'y' || c == 'z'; }

int symbol_digit(char c) {
    switch (c) {
        case '0': return 0;
        case 'x': return 1;
        case 'y': return 2;
        case 'z': return 3;
        default: throw std::invalid_argument("invalid pauli symbol");
    }
}

std::string repeat(char c, int n) { return std::string(static_cast<std::size_t>(std::max(n, 0)), c); }

}  // namespace

PauliLabel::PauliLabel(std::string symbols) : symbols_(std::move(symbols)) {
    if (symbols_.empty()) throw std::invalid_argument("empty pauli label");
    for (char c : symbols_)
        if (!valid_symbol(c)) throw std::invalid_argument("invalid symbol in pauli label: " + symbols_);
}

bool PauliLabel::is_identity() const {
    return std::all_of(symbols_.begin(), symbols_.end(), [](char c) { return c == '0'; });
}

bool PauliLabel::is_canonical() const { return symbols_.front() != '0' || is_identity(); }

int PauliLabel::weight() const {
    return static_cast<int>(std::count_if(symbols_.begin(), symbols_.end(), [](char c) { return c != '0'; }));
}

PauliLabel PauliLabel::padded(int support) const {
    if (support < size()) throw std::invalid_argument("cannot pad label to shorter length");
    return PauliLabel(symbols_ + repeat('0', support - size()));
}

PauliLabel PauliLabel::trimmed() const {
    std::size_t last = symbols_.find_last_not_of('0');
    if (last == std::string::npos) return PauliLabel("0");
    return PauliLabel(symbols_.substr(0, last + 1));
}

Eigen::Matrix2cd sigma(int idx) {
    const complexd i(0.0, 1.0);
    Eigen::Matrix2cd m;
    switch (idx) {
        case 0: m << 1, 0, 0, 1; break;
        case 1: m << 0, 1, 1, 0; break;
        case 2: m << 0, -i, i, 0; break;
        case 3: m << 1, 0, 0, -1; break;
        default: throw std::invalid_argument("pauli index must be 0..3");
    }
    return m;
}

Eigen::Matrix2cd sigma(char symbol) { return sigma(symbol_digit(symbol)); }

Eigen::MatrixXcd pauli_string_matrix(const PauliLabel& label, int offset, int L) {
    const int len = label.size();
    if (L < 1 || L > 24) throw std::invalid_argument("chain length out of range");
    if (len > L) throw std::invalid_argument("label longer than chain");
    if (offset < 0 || offset >= L) throw std::invalid_argument("offset out of range");
    const long dim = 1L << L;

    // One non-zero entry per column: the string is a signed bit-flip pattern.
    long flip = 0;
    std::vector<std::pair<int, char>> active;  // (bit position, symbol) for y/z phases
    for (int i = 0; i < len; ++i) {
        const char c = label.at(i);
        if (c == '0') continue;
        const int p = L - 1 - ((offset + i) % L);
        if (c == 'x' || c == 'y') flip |= 1L << p;
        if (c == 'y' || c == 'z') active.emplace_back(p, c);
    }

    const complexd i_unit(0.0, 1.0);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    for (long n = 0; n < dim; ++n) {
        complexd phase = 1.0;
        for (auto [p, c] : active) {
            const bool down = (n >> p) & 1;
            if (c == 'y')
                phase *= down ? -i_unit : i_unit;  // sigma^y |up> = i |down>, sigma^y |down> = -i |up>
            else
                phase *= down ? -1.0 : 1.0;
        }
        out(n ^ flip, n) = phase;
    }
    return out;
}

std::vector<PauliLabel> enumerate_support_strings(int support) {
    if (support < 1 || support > 6) throw std::invalid_argument("support out of range");
    std::vector<PauliLabel> labels;
    const long rest = 1L << (2 * (support - 1));  // 4^(support-1)
    labels.reserve(static_cast<std::size_t>(3 * rest));
    const char symbols[4] = {'0', 'x', 'y', 'z'};
    for (int first = 1; first <= 3; ++first) {
        for (long r = 0; r < rest; ++r) {
            std::string s;
            s.push_back(symbols[first]);
            for (int i = support - 2; i >= 0; --i) s.push_back(symbols[(r >> (2 * i)) & 3]);
            labels.emplace_back(std::move(s));
        }
    }
    return labels;
}

int label_index(const PauliLabel& label, int support) {
    if (label.size() != support) throw std::invalid_argument("label length does not match support");
    if (!label.is_canonical() || label.is_identity())
        throw std::invalid_argument("label must be canonical and non-identity");
    long idx = static_cast<long>(symbol_digit(label.at(0)) - 1) << (2 * (support - 1));
    for (int i = 1; i < support; ++i)
        idx |= static_cast<long>(symbol_digit(label.at(i))) << (2 * (support - 1 - i));
    return static_cast<int>(idx);
}

int OperatorSpec::support() const {
    int s = 0;
    for (const auto& [c, l] : terms) s = std::max(s, l.size());
    return s;
}

void OperatorSpec::validate() const {
    if (terms.empty()) throw std::invalid_argument("operator spec has no terms");
    for (const auto& [c, l] : terms) {
        if (!std::isfinite(c)) throw std::invalid_argument("non-finite coefficient in operator spec");
        if (!l.is_canonical()) throw std::invalid_argument("non-canonical label in operator spec: " + l.str());
    }
}

std::string OperatorSpec::to_text() const {
    nlohmann::json j;
    j["translationally_invariant"] = translationally_invariant;
    j["terms"] = nlohmann::json::array();
    for (const auto& [c, l] : terms) j["terms"].push_back({c, l.str()});
    return j.dump();
}

OperatorSpec OperatorSpec::from_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("bad operator spec record: ") + e.what());
    }
    OperatorSpec spec;
    try {
        spec.translationally_invariant = j.at("translationally_invariant").get<bool>();
        for (const auto& t : j.at("terms"))
            spec.terms.emplace_back(t.at(0).get<double>(), PauliLabel(t.at(1).get<std::string>()));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad operator spec record: ") + e.what());
    }
    spec.validate();
    return spec;
}

DenseOperator build_dense(const OperatorSpec& spec, int L, bool periodic) {
    spec.validate();
    const int s = spec.support();
    if (L > 14) throw std::invalid_argument("dense realization limited to L <= 14");
    if (s > L) throw std::invalid_argument("operator support exceeds chain length");
    if (spec.translationally_invariant && periodic && s >= L && s > 1)
        throw std::invalid_argument("periodic translation sum requires support < L");

    const long dim = 1L << L;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& [coeff, label] : spec.terms) {
        if (label.is_identity()) {
            const double total =
                spec.translationally_invariant ? coeff * static_cast<double>(periodic ? L : L - label.size() + 1)
                                               : coeff;
            m += total * Eigen::MatrixXcd::Identity(dim, dim);
            continue;
        }
        if (spec.translationally_invariant) {
            const int last = periodic ? L - 1 : L - label.size();
            for (int offset = 0; offset <= last; ++offset)
                m += coeff * pauli_string_matrix(label, offset, L);
        } else {
            m += coeff * pauli_string_matrix(label, 0, L);
        }
    }
    return DenseOperator{std::move(m), L};
}

OperatorSpec ising_hamiltonian(double J, double hx, double hz) {
    OperatorSpec spec;
    spec.terms.emplace_back(J, PauliLabel("zz"));
    if (hx != 0.0) spec.terms.emplace_back(hx, PauliLabel("x"));
    if (hz != 0.0) spec.terms.emplace_back(hz, PauliLabel("z"));
    return spec;
}

OperatorSpec ising_charge(int k, double J, double hx) {
    if (k < 0) throw std::invalid_argument("charge index must be non-negative");
    OperatorSpec spec;
    if (k == 0) {
        spec.terms.emplace_back(J, PauliLabel("zz"));
        spec.terms.emplace_back(hx, PauliLabel("x"));
    } else if (k % 2 == 1) {
        // Odd charges are current-like: J (y x..x z - z x..x y) over distance (k+1)/2.
        const int m = (k + 1) / 2;
        spec.terms.emplace_back(J, PauliLabel("y" + repeat('x', m - 1) + "z"));
        spec.terms.emplace_back(-J, PauliLabel("z" + repeat('x', m - 1) + "y"));
    } else if (k == 2) {
        spec.terms.emplace_back(J, PauliLabel("zxz"));
        spec.terms.emplace_back(-hx, PauliLabel("yy"));
        spec.terms.emplace_back(-hx, PauliLabel("zz"));
        spec.terms.emplace_back(-J, PauliLabel("x"));
    } else {
        const int m = k / 2;
        spec.terms.emplace_back(J, PauliLabel("z" + repeat('x', m) + "z"));
        spec.terms.emplace_back(-hx, PauliLabel("y" + repeat('x', m - 1) + "y"));
        spec.terms.emplace_back(-hx, PauliLabel("z" + repeat('x', m - 1) + "z"));
        spec.terms.emplace_back(J, PauliLabel("y" + repeat('x', m - 2) + "y"));
    }
    return spec;
}

}  // namespace spinobs
