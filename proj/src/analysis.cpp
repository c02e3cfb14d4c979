#include "spinobs/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "spinobs/errors.hpp"

namespace spinobs {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd twonn_mu(const MatrixXd& points) {
    const long n = points.rows();
    if (n < 10) throw std::invalid_argument("neighbor-ratio estimation needs at least 10 points");

    const VectorXd sq = points.rowwise().squaredNorm();
    std::vector<long> duplicates;
    VectorXd mu(n);
    for (long i = 0; i < n; ++i) {
        // ||x_i - x_j||^2 via the Gram trick, one row at a time.
        VectorXd d2 = sq.array() - 2.0 * (points * points.row(i).transpose()).array() + sq(i);
        d2(i) = std::numeric_limits<double>::infinity();
        double r1 = std::numeric_limits<double>::infinity();
        double r2 = std::numeric_limits<double>::infinity();
        for (long j = 0; j < n; ++j) {
            const double v = std::max(d2(j), 0.0);
            if (v < r1) {
                r2 = r1;
                r1 = v;
            } else if (v < r2) {
                r2 = v;
            }
        }
        if (r1 <= 0.0) {
            duplicates.push_back(i);
            continue;
        }
        mu(i) = std::sqrt(r2 / r1);
    }
    if (!duplicates.empty()) {
        std::ostringstream msg;
        msg << "duplicate points leave no nearest-neighbor scale; rows";
        for (std::size_t k = 0; k < duplicates.size() && k < 8; ++k) msg << ' ' << duplicates[k];
        if (duplicates.size() > 8) msg << " ...";
        throw degeneracy_error(msg.str());
    }
    return mu;
}

IdEstimate twonn_fit_from_mu(const VectorXd& mu) {
    const long n = mu.size();
    if (n < 10) throw std::invalid_argument("neighbor-ratio fit needs at least 10 ratios");
    VectorXd sorted = mu;
    std::sort(sorted.data(), sorted.data() + n);
    if (sorted(0) < 1.0) throw std::invalid_argument("neighbor ratios must be >= 1");

    const long drop = std::max<long>(1, static_cast<long>(std::floor(0.02 * static_cast<double>(n))));
    const long m = n - drop;

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (long j = 0; j < m; ++j) {
        const double x = std::log(sorted(j));
        const double p = static_cast<double>(j + 1) / static_cast<double>(n);
        const double y = std::log(1.0 - p);
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    if (sxx <= 0.0) throw degeneracy_error("all neighbor ratios are 1; no scale to fit");

    IdEstimate est;
    est.id = -sxy / sxx;
    est.residual = std::sqrt(std::max(0.0, syy - sxy * sxy / sxx) / static_cast<double>(m));
    est.n_points = static_cast<int>(m);
    est.mu = sorted.head(m);
    return est;
}

IdEstimate twonn_id(const MatrixXd& points) { return twonn_fit_from_mu(twonn_mu(points)); }

std::vector<WindowSlope> two_slope_from_mu(const VectorXd& mu,
                                           const std::vector<std::pair<double, double>>& windows) {
    if (windows.empty()) throw std::invalid_argument("no ratio windows given");
    const long n = mu.size();
    std::vector<WindowSlope> out;
    out.reserve(windows.size());
    for (const auto& [lo, hi] : windows) {
        if (!(lo >= 1.0) || !(hi > lo)) throw std::invalid_argument("ratio window must satisfy 1 <= lo < hi");
        std::vector<double> inside;
        for (long j = 0; j < n; ++j)
            if (mu(j) >= lo && mu(j) < hi) inside.push_back(mu(j));
        if (inside.size() < 50) {
            std::ostringstream msg;
            msg << "ratio window [" << lo << ", " << hi << ") holds " << inside.size()
                << " points; need at least 50";
            throw std::invalid_argument(msg.str());
        }

        // Log-spaced histogram of the density inside the window.
        const int bins = std::clamp(static_cast<int>(inside.size()) / 25, 5, 12);
        const double llo = std::log(lo), lhi = std::log(hi);
        std::vector<long> counts(static_cast<std::size_t>(bins), 0);
        for (double v : inside) {
            int b = static_cast<int>((std::log(v) - llo) / (lhi - llo) * bins);
            b = std::clamp(b, 0, bins - 1);
            ++counts[static_cast<std::size_t>(b)];
        }
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        int used = 0;
        for (int b = 0; b < bins; ++b) {
            if (counts[static_cast<std::size_t>(b)] == 0) continue;
            const double edge0 = std::exp(llo + (lhi - llo) * b / bins);
            const double edge1 = std::exp(llo + (lhi - llo) * (b + 1) / bins);
            const double center = std::sqrt(edge0 * edge1);
            const double density =
                static_cast<double>(counts[static_cast<std::size_t>(b)]) / (edge1 - edge0);
            const double x = std::log(center), y = std::log(density);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++used;
        }
        if (used < 3) throw std::invalid_argument("ratio window is too narrow for a slope fit");
        const double denom = used * sxx - sx * sx;
        if (std::abs(denom) < 1e-300) throw degeneracy_error("degenerate ratio histogram");
        const double slope = (used * sxy - sx * sy) / denom;

        WindowSlope w;
        w.lo = lo;
        w.hi = hi;
        w.count = static_cast<int>(inside.size());
        w.id = -slope - 1.0;
        out.push_back(w);
    }
    return out;
}

std::vector<WindowSlope> two_slope_analysis(const MatrixXd& points,
                                            const std::vector<std::pair<double, double>>& windows) {
    return two_slope_from_mu(twonn_mu(points), windows);
}

Pca pca(const MatrixXd& points) {
    const long n = points.rows();
    if (n < 2) throw std::invalid_argument("principal components need at least 2 points");
    Pca p;
    p.mean = points.colwise().mean();
    const MatrixXd centered = points.rowwise() - p.mean.transpose();
    const MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw numerical_error("covariance eigendecomposition failed");
    // SelfAdjointEigenSolver sorts ascending; flip to descending.
    const long d = cov.rows();
    p.components.resize(d, d);
    p.explained_variance.resize(d);
    for (long k = 0; k < d; ++k) {
        p.components.col(k) = es.eigenvectors().col(d - 1 - k);
        p.explained_variance(k) = std::max(0.0, es.eigenvalues()(d - 1 - k));
    }
    return p;
}

MatrixXd pca_project(const Pca& basis, const MatrixXd& points, int k) {
    if (k < 1 || k > basis.components.cols())
        throw std::invalid_argument("projection rank outside the component range");
    if (points.cols() != basis.components.rows())
        throw std::invalid_argument("points do not match the component dimension");
    return (points.rowwise() - basis.mean.transpose()) * basis.components.leftCols(k);
}

namespace {

// Conditional affinities of row i given the squared distances to all rows;
// bandwidth beta found by bisection on the entropy.
void conditional_affinities(const VectorXd& d2, long i, double log_perplexity, VectorXd& p_out) {
    double beta = 1.0, beta_lo = 0.0, beta_hi = std::numeric_limits<double>::infinity();
    const long n = d2.size();
    for (int it = 0; it < 64; ++it) {
        double sum = 0.0, weighted = 0.0;
        for (long j = 0; j < n; ++j) {
            if (j == i) {
                p_out(j) = 0.0;
                continue;
            }
            const double w = std::exp(-beta * d2(j));
            p_out(j) = w;
            sum += w;
            weighted += w * d2(j);
        }
        if (sum <= 0.0) {  // bandwidth too narrow for this neighborhood
            beta_hi = beta;
            beta = (beta_lo + beta_hi) / 2;
            continue;
        }
        const double entropy = std::log(sum) + beta * weighted / sum;
        const double diff = entropy - log_perplexity;
        if (std::abs(diff) < 1e-5) {
            p_out /= sum;
            return;
        }
        if (diff > 0.0) {  // entropy too high -> sharpen
            beta_lo = beta;
            beta = std::isinf(beta_hi) ? beta * 2 : (beta_lo + beta_hi) / 2;
        } else {
            beta_hi = beta;
            beta = (beta_lo + beta_hi) / 2;
        }
    }
    double sum = p_out.sum();
    if (sum <= 0.0) throw numerical_error("affinity bandwidth search collapsed");
    p_out /= sum;
}

}  // namespace

Embedding2D tsne(const MatrixXd& points, const TsneOptions& opt) {
    const long n = points.rows();
    if (n < 3) throw std::invalid_argument("embedding needs at least 3 points");
    if (n > 5000) throw std::invalid_argument("exact embedding limited to 5000 points");
    if (opt.perplexity <= 0.0 || opt.perplexity >= static_cast<double>(n) / 3.0)
        throw std::invalid_argument("perplexity must be positive and below n/3");
    if (opt.iterations < 1) throw std::invalid_argument("embedding needs at least one iteration");

    // Symmetrized affinities of the input cloud.
    const VectorXd sq = points.rowwise().squaredNorm();
    MatrixXd p(n, n);
    {
        VectorXd row(n);
        const double log_perp = std::log(opt.perplexity);
        for (long i = 0; i < n; ++i) {
            VectorXd d2 =
                (sq.array() - 2.0 * (points * points.row(i).transpose()).array() + sq(i)).max(0.0);
            conditional_affinities(d2, i, log_perp, row);
            p.row(i) = row.transpose();
        }
    }
    p = ((p + p.transpose()) / (2.0 * static_cast<double>(n))).eval();
    p = p.cwiseMax(1e-12).eval();
    for (long i = 0; i < n; ++i) p(i, i) = 1e-12;

    Embedding2D emb;
    emb.options = opt;
    emb.kl_history.reserve(static_cast<std::size_t>(opt.iterations));

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1e-2);
    MatrixXd y(n, 2);
    for (long i = 0; i < n; ++i) {
        y(i, 0) = gauss(rng);
        y(i, 1) = gauss(rng);
    }
    MatrixXd velocity = MatrixXd::Zero(n, 2);
    MatrixXd grad(n, 2), num(n, n);

    for (int it = 0; it < opt.iterations; ++it) {
        const double exaggeration = it < opt.exaggeration_iterations ? opt.early_exaggeration : 1.0;
        const double momentum = it < opt.exaggeration_iterations ? 0.5 : 0.8;

        // Student-t kernel numerators and normalization.
        const VectorXd ysq = y.rowwise().squaredNorm();
        double z = 0.0;
        for (long i = 0; i < n; ++i) {
            for (long j = 0; j < n; ++j) {
                if (i == j) {
                    num(i, j) = 0.0;
                    continue;
                }
                const double d2 = std::max(0.0, ysq(i) + ysq(j) - 2.0 * y.row(i).dot(y.row(j)));
                num(i, j) = 1.0 / (1.0 + d2);
            }
            z += num.row(i).sum();
        }
        z = std::max(z, 1e-300);

        double kl = 0.0;
        grad.setZero();
        for (long i = 0; i < n; ++i) {
            for (long j = 0; j < n; ++j) {
                if (i == j) continue;
                const double q = std::max(num(i, j) / z, 1e-12);
                kl += p(i, j) * std::log(p(i, j) / q);
                const double coeff = 4.0 * (exaggeration * p(i, j) - q) * num(i, j);
                grad.row(i) += coeff * (y.row(i) - y.row(j));
            }
        }
        // KL against the true affinities even while exaggeration distorts the
        // gradient.
        emb.kl_history.push_back(kl);

        velocity = momentum * velocity - opt.learning_rate * grad;
        y += velocity;
        y.rowwise() -= y.colwise().mean();
    }

    if (!y.allFinite()) throw numerical_error("embedding diverged to non-finite coordinates");
    emb.points = std::move(y);
    emb.final_kl = emb.kl_history.back();
    return emb;
}

VectorXd average_ranks(const VectorXd& v) {
    const long n = v.size();
    std::vector<long> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0L);
    std::sort(order.begin(), order.end(), [&](long a, long b) { return v(a) < v(b); });
    VectorXd ranks(n);
    long i = 0;
    while (i < n) {
        long j = i;
        while (j + 1 < n && v(order[static_cast<std::size_t>(j + 1)]) == v(order[static_cast<std::size_t>(i)])) ++j;
        const double avg = static_cast<double>(i + j) / 2.0 + 1.0;
        for (long k = i; k <= j; ++k) ranks(order[static_cast<std::size_t>(k)]) = avg;
        i = j + 1;
    }
    return ranks;
}

CorrelationResult latent_observable_correlation(const VectorXd& latent, const VectorXd& values) {
    const long n = latent.size();
    if (n != values.size()) throw std::invalid_argument("latent/value row counts differ");
    if (n < 3) throw std::invalid_argument("correlation needs at least 3 rows");

    // Rows sharing a value with at least one other row.
    const auto tied_rows = [](const VectorXd& v) {
        std::vector<double> s(v.data(), v.data() + v.size());
        std::sort(s.begin(), s.end());
        long tied = 0;
        for (std::size_t i = 0; i < s.size();) {
            std::size_t j = i;
            while (j + 1 < s.size() && s[j + 1] == s[i]) ++j;
            if (j > i) tied += static_cast<long>(j - i + 1);
            i = j + 1;
        }
        return tied;
    };

    CorrelationResult res;
    res.tie_warning = 2 * tied_rows(latent) > n || 2 * tied_rows(values) > n;

    const VectorXd ra = average_ranks(latent);
    const VectorXd rb = average_ranks(values);
    const VectorXd ca = ra.array() - ra.mean();
    const VectorXd cb = rb.array() - rb.mean();
    const double denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
    res.spearman = denom > 0.0 ? ca.dot(cb) / denom : 0.0;

    // Strict monotonicity of the latent along increasing values.
    std::vector<long> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0L);
    std::sort(order.begin(), order.end(), [&](long a, long b) { return values(a) < values(b); });
    bool increasing = true, decreasing = true;
    for (long k = 0; k + 1 < n; ++k) {
        const long a = order[static_cast<std::size_t>(k)], b = order[static_cast<std::size_t>(k + 1)];
        if (values(a) == values(b)) continue;  // strictness undefined across exact value ties
        if (latent(b) <= latent(a)) increasing = false;
        if (latent(b) >= latent(a)) decreasing = false;
    }
    res.monotone = increasing || decreasing;
    return res;
}

}  // namespace spinobs
