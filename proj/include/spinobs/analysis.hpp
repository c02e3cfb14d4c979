#pragma once

// Geometry of observation and latent point sets: TwoNN intrinsic-dimension
// estimation, windowed slope diagnostics of the neighbor-ratio density,
// principal components, an exact t-SNE embedding, and rank-correlation
// diagnostics between latent coordinates and physical observables.

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

namespace spinobs {

// Ratio mu_j = r2/r1 of the second to first nearest-neighbor distance of
// every row.  Throws degeneracy_error naming the rows when duplicates make
// r1 = 0.
Eigen::VectorXd twonn_mu(const Eigen::MatrixXd& points);

struct IdEstimate {
    double id = 0.0;        // estimated intrinsic dimension
    double residual = 0.0;  // rms residual of the line fit
    int n_points = 0;       // ratios retained by the fit
    Eigen::VectorXd mu;     // retained sorted ratios
};

// For locally uniform data f(mu) = Id mu^{-Id-1}, so the empirical cumulative
// satisfies ln(1 - P) = -Id ln(mu).  Least squares through the origin after
// discarding the top 2% of ratios (the tail of ln(1 - P) is infinitely
// noisy).
IdEstimate twonn_fit_from_mu(const Eigen::VectorXd& mu);
IdEstimate twonn_id(const Eigen::MatrixXd& points);

struct WindowSlope {
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;
    double id = 0.0;  // -slope - 1 of the log-log density fit in the window
};

// Power-law slope of the empirical ratio density inside each [lo, hi)
// window, from a log-binned histogram.  Windows must each hold at least 50
// ratios.  A mixture of manifold dimensions shows up as window-dependent
// slopes.
std::vector<WindowSlope> two_slope_from_mu(const Eigen::VectorXd& mu,
                                           const std::vector<std::pair<double, double>>& windows);
std::vector<WindowSlope> two_slope_analysis(const Eigen::MatrixXd& points,
                                            const std::vector<std::pair<double, double>>& windows);

struct Pca {
    Eigen::MatrixXd components;         // columns, sorted by variance descending
    Eigen::VectorXd explained_variance;
    Eigen::VectorXd mean;
};

Pca pca(const Eigen::MatrixXd& points);

// Coordinates of `points` along the first k components.
Eigen::MatrixXd pca_project(const Pca& basis, const Eigen::MatrixXd& points, int k);

struct TsneOptions {
    double perplexity = 30.0;
    int iterations = 1000;
    double learning_rate = 200.0;
    double early_exaggeration = 12.0;
    int exaggeration_iterations = 250;
    std::uint64_t seed = 0;
};

struct Embedding2D {
    Eigen::MatrixXd points;  // n x 2
    TsneOptions options;
    double final_kl = 0.0;
    std::vector<double> kl_history;  // one entry per iteration, against the true affinities
};

// Exact O(n^2) t-SNE: per-point Gaussian bandwidth matched to the perplexity
// by bisection, symmetrized affinities, Student-t kernel in the plane,
// momentum gradient descent (0.5 before the exaggeration phase ends, 0.8
// after).  Requires perplexity < n / 3.
Embedding2D tsne(const Eigen::MatrixXd& points, const TsneOptions& opt = {});

struct CorrelationResult {
    double spearman = 0.0;
    bool monotone = false;      // latent strictly monotone when sorted by value
    bool tie_warning = false;   // more than half the rows tied in either input
};

// Ranks with ties averaged.
Eigen::VectorXd average_ranks(const Eigen::VectorXd& v);

CorrelationResult latent_observable_correlation(const Eigen::VectorXd& latent,
                                                const Eigen::VectorXd& values);

}  // namespace spinobs
