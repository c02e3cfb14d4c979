#include "spinobs/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spinobs {

using Eigen::Matrix4cd;
using Eigen::MatrixXcd;
using Eigen::Vector4cd;
using Eigen::VectorXcd;

GateParams sample_gate_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> full(-M_PI, M_PI);
    std::uniform_real_distribution<double> half(-M_PI / 2, M_PI / 2);
    GateParams p;
    p.theta1 = full(rng);
    p.theta2 = full(rng);
    p.c = half(rng);
    return p;
}

Matrix4cd gate_unitary(const GateParams& params) {
    const complexd i(0.0, 1.0);
    const double a = (params.theta2 - params.theta1) / 2;
    const double b = (params.theta1 + params.theta2) / 2;
    const double dt = params.dt;

    Matrix4cd u = Matrix4cd::Zero();
    u(0, 0) = std::exp(-i * (dt * (b + 2 * params.c)));
    u(3, 3) = std::exp(-i * (dt * (b - 2 * params.c)));
    const complexd phase = std::exp(i * (dt * b));
    const double co = std::cos(a * dt), si = std::sin(a * dt);
    u(1, 1) = phase * co;
    u(1, 2) = phase * (-i * si);
    u(2, 1) = phase * (-i * si);
    u(2, 2) = phase * co;
    return u;
}

VectorXcd product_state(double theta, double phi, int L) {
    if (L < 1 || L > 20) throw std::invalid_argument("chain length must lie in [1, 20]");
    const complexd i(0.0, 1.0);
    const complexd up = std::cos(theta / 2);
    const complexd down = std::exp(i * phi) * std::sin(theta / 2);
    const long dim = 1L << L;
    VectorXcd psi(dim);
    std::vector<complexd> down_pow(static_cast<std::size_t>(L) + 1, 1.0);
    std::vector<complexd> up_pow(static_cast<std::size_t>(L) + 1, 1.0);
    for (int k = 1; k <= L; ++k) {
        down_pow[static_cast<std::size_t>(k)] = down_pow[static_cast<std::size_t>(k - 1)] * down;
        up_pow[static_cast<std::size_t>(k)] = up_pow[static_cast<std::size_t>(k - 1)] * up;
    }
    for (long n = 0; n < dim; ++n) {
        const int k = __builtin_popcountl(static_cast<unsigned long>(n));
        psi(n) = up_pow[static_cast<std::size_t>(L - k)] * down_pow[static_cast<std::size_t>(k)];
    }
    return psi;
}

void apply_link_layer(VectorXcd& psi, const Matrix4cd& gate, int parity, int L) {
    if (L < 2 || L % 2 != 0) throw std::invalid_argument("brickwork requires an even chain length");
    if (parity != 0 && parity != 1) throw std::invalid_argument("sublayer parity must be 0 or 1");
    const long dim = 1L << L;
    if (psi.size() != dim) throw std::invalid_argument("state dimension does not match chain length");

    for (int j = parity; j < L; j += 2) {
        const int p = j, q = (j + 1) % L;
        const long mp = 1L << (L - 1 - p);
        const long mq = 1L << (L - 1 - q);
        const long both = mp | mq;
        for (long n = 0; n < dim; ++n) {
            if (n & both) continue;
            const long n01 = n | mq, n10 = n | mp, n11 = n | both;
            const Vector4cd v(psi(n), psi(n01), psi(n10), psi(n11));
            const Vector4cd w = gate * v;
            psi(n) = w(0);
            psi(n01) = w(1);
            psi(n10) = w(2);
            psi(n11) = w(3);
        }
    }
}

void brickwork_step(VectorXcd& psi, const Matrix4cd& even_gate, const Matrix4cd& odd_gate, int L) {
    apply_link_layer(psi, even_gate, 0, L);
    apply_link_layer(psi, odd_gate, 1, L);
}

MatrixXcd averaged_rdm(const VectorXcd& psi, int support, int L) {
    if (support < 1 || support > L / 2)
        throw std::invalid_argument("window support must lie in [1, L/2]");
    const long sub = 1L << support;
    MatrixXcd acc = MatrixXcd::Zero(sub, sub);
    for (int first = 0; first < L; ++first) acc += window_rdm(psi, first, support, L);
    return acc / static_cast<double>(L);
}

std::vector<int> default_record_steps(int total) {
    if (total < 1) throw std::invalid_argument("trajectory needs at least one step");
    std::vector<int> steps;
    for (int s = 0; s <= std::min(10, total); ++s) steps.push_back(s);
    // Ten points per decade beyond t = 1.
    const double ratio = std::pow(10.0, 0.1);
    double mark = 10.0;
    while (true) {
        mark *= ratio;
        const int s = static_cast<int>(std::lround(mark));
        if (s > total) break;
        if (s > steps.back()) steps.push_back(s);
    }
    if (steps.back() != total && total > 10) steps.push_back(total);
    return steps;
}

TrajectoryRecord run_trajectory(double theta, double phi, const TrajectoryOptions& opt) {
    const int L = opt.sites;
    if (L < 2 || L > 20 || L % 2 != 0)
        throw std::invalid_argument("trajectory chain length must be even and in [2, 20]");
    if (opt.support < 1 || opt.support > 4 || opt.support > L / 2)
        throw std::invalid_argument("trajectory support must lie in [1, 4] and at most L/2");
    if (opt.steps < 1) throw std::invalid_argument("trajectory needs at least one step");

    std::vector<int> record =
        opt.record_steps.empty() ? default_record_steps(opt.steps) : opt.record_steps;
    std::sort(record.begin(), record.end());
    record.erase(std::unique(record.begin(), record.end()), record.end());
    if (record.front() < 0 || record.back() > opt.steps)
        throw std::invalid_argument("recording steps must lie in [0, steps]");

    TrajectoryRecord rec;
    rec.theta = theta;
    rec.phi = phi;
    rec.seed = opt.seed;
    rec.sites = L;
    rec.support = opt.support;

    const double dt = GateParams{}.dt;
    VectorXcd psi = product_state(theta, phi, L);
    std::mt19937_64 rng(opt.seed);

    const auto record_now = [&](int step) {
        ObservationVector obs;
        obs.values = observe_rdm(averaged_rdm(psi, opt.support, L), opt.support, opt.support);
        obs.support = opt.support;
        obs.provenance = "circuit";
        rec.observations.push_back(std::move(obs));
        rec.steps.push_back(step);
        rec.times.push_back(step * dt);
    };

    std::size_t next = 0;
    if (record[next] == 0) {
        record_now(0);
        ++next;
    }
    for (int step = 1; step <= opt.steps && next < record.size(); ++step) {
        const Matrix4cd even = gate_unitary(sample_gate_params(rng));
        const Matrix4cd odd = gate_unitary(sample_gate_params(rng));
        brickwork_step(psi, even, odd, L);
        if (record[next] == step) {
            record_now(step);
            ++next;
        }
    }
    return rec;
}

}  // namespace spinobs
