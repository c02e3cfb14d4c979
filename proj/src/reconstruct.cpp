#include "spinobs/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "spinobs/analysis.hpp"
#include "spinobs/errors.hpp"
#include "spinobs/gge.hpp"

namespace spinobs {

using Eigen::MatrixXd;
using Eigen::VectorXd;

CandidateRanking rank_candidates(const Dataset& ds, const MatrixXd& latents, EmbeddingMode mode,
                                 int k) {
    const long n = ds.rows.rows();
    if (latents.rows() != n) throw std::invalid_argument("latents are not aligned with the dataset");
    if (k < 2) throw std::invalid_argument("gradient estimation needs at least 2 neighbors");
    if (n < k + 1) throw std::invalid_argument("gradient estimation needs more rows than neighbors");

    VectorXd s;
    if (mode == EmbeddingMode::tangent) {
        if (latents.cols() != 1)
            throw std::invalid_argument("tangent mode expects a one-dimensional latent coordinate");
        s = latents.col(0);
    } else {
        s = pca_project(pca(latents), latents, 1).col(0);
    }

    const long n_obs = ds.rows.cols();
    VectorXd accum = VectorXd::Zero(n_obs);
    std::vector<long> order(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        // k nearest rows in the manifold coordinate, plus the row itself.
        std::iota(order.begin(), order.end(), 0L);
        std::nth_element(order.begin(), order.begin() + k, order.end(), [&](long a, long b) {
            return std::abs(s(a) - s(i)) < std::abs(s(b) - s(i));
        });

        double sw = 0.0, sww = 0.0;
        VectorXd sy = VectorXd::Zero(n_obs), swy = VectorXd::Zero(n_obs);
        for (long j = 0; j <= k; ++j) {
            const long r = order[static_cast<std::size_t>(j)];
            const double w = s(r) - s(i);
            sw += w;
            sww += w * w;
            sy += ds.rows.row(r).transpose();
            swy += w * ds.rows.row(r).transpose();
        }
        const double m = static_cast<double>(k + 1);
        const double denom = m * sww - sw * sw;
        if (denom <= 1e-30 * m * std::max(sww, 1.0)) continue;  // no spread: gradient 0
        accum += ((m * swy - sw * sy) / denom).cwiseAbs();
    }
    accum /= static_cast<double>(n);

    const auto labels = enumerate_support_strings(ds.support);
    if (static_cast<long>(labels.size()) != n_obs)
        throw std::invalid_argument("dataset width does not match its support");

    CandidateRanking ranking;
    ranking.mode = mode;
    ranking.magnitudes.reserve(labels.size());
    for (std::size_t a = 0; a < labels.size(); ++a)
        ranking.magnitudes.emplace_back(labels[a].trimmed(), accum(static_cast<long>(a)));
    std::stable_sort(ranking.magnitudes.begin(), ranking.magnitudes.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return ranking;
}

namespace {

OperatorSpec candidate_spec(const std::vector<PauliLabel>& candidates, const VectorXd& a) {
    OperatorSpec spec;
    spec.translationally_invariant = true;
    for (std::size_t c = 0; c < candidates.size(); ++c)
        spec.terms.emplace_back(a(static_cast<long>(c)), candidates[c]);
    return spec;
}

// Matching-condition residual restricted to the candidate labels.
VectorXd matching_residual(const std::vector<PauliLabel>& candidates, const VectorXd& a,
                           const VectorXd& target, const std::vector<int>& indices, int support,
                           int L) {
    const VectorXd obs = thermal_observation(candidate_spec(candidates, a), L, support);
    VectorXd f(static_cast<long>(indices.size()));
    for (std::size_t c = 0; c < indices.size(); ++c)
        f(static_cast<long>(c)) = obs(indices[c]) - target(indices[c]);
    return f;
}

}  // namespace

ReconstructionResult newton_solve(const std::vector<PauliLabel>& candidates, const VectorXd& target,
                                  int support, const NewtonOptions& opt) {
    const long nc = static_cast<long>(candidates.size());
    if (nc < 1 || nc > 6) throw std::invalid_argument("newton solve supports 1 to 6 candidates");
    if (support < 1 || support > 4) throw std::invalid_argument("support must lie in [1, 4]");
    const auto labels = enumerate_support_strings(support);
    if (target.size() != static_cast<long>(labels.size()))
        throw std::invalid_argument("target length does not match the support enumeration");
    if (opt.oracle_sites < 2 * support)
        throw std::invalid_argument("oracle chain too short for the observation window");

    std::set<PauliLabel> seen;
    std::vector<int> indices;
    for (const auto& cand : candidates) {
        if (cand.is_identity())
            throw std::invalid_argument("the identity cannot be a Hamiltonian candidate");
        if (!cand.is_canonical())
            throw std::invalid_argument("candidate label " + cand.str() + " is not canonical");
        if (cand.size() > support)
            throw std::invalid_argument("candidate " + cand.str() + " exceeds the target support");
        if (!seen.insert(cand.trimmed()).second)
            throw std::invalid_argument("duplicate candidate " + cand.str());
        indices.push_back(label_index(cand.padded(support), support));
    }

    ReconstructionResult result;
    result.candidates = candidates;
    result.coefficients = VectorXd::Zero(nc);

    // Infinite temperature: every traceless observable vanishes at a = 0.
    if (target.cwiseAbs().maxCoeff() <= 1e-12) {
        result.residual = 0.0;
        result.iterations = 0;
        for (const auto& cand : candidates) result.pruned.push_back(cand.trimmed());
        return result;
    }

    const int L = opt.oracle_sites;
    VectorXd a = VectorXd::Zero(nc);
    VectorXd f = matching_residual(candidates, a, target, indices, support, L);
    double fnorm = f.cwiseAbs().maxCoeff();

    int it = 0;
    for (; it < opt.max_iterations && fnorm > opt.tol; ++it) {
        MatrixXd jac(nc, nc);
        for (long c = 0; c < nc; ++c) {
            VectorXd ap = a, am = a;
            ap(c) += opt.fd_step;
            am(c) -= opt.fd_step;
            jac.col(c) = (matching_residual(candidates, ap, target, indices, support, L) -
                          matching_residual(candidates, am, target, indices, support, L)) /
                         (2.0 * opt.fd_step);
        }
        const Eigen::JacobiSVD<MatrixXd> svd(jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const double smin = svd.singularValues()(nc - 1);
        if (smin <= 0.0 || svd.singularValues()(0) / smin > 1e12) {
            std::ostringstream msg;
            msg << "matching-condition jacobian is numerically singular (condition "
                << (smin > 0.0 ? svd.singularValues()(0) / smin : std::numeric_limits<double>::infinity())
                << ")";
            throw ill_posed_error(msg.str());
        }
        const VectorXd step = svd.solve(-f);

        double t = 1.0;
        bool improved = false;
        for (int halving = 0; halving < 12; ++halving, t /= 2) {
            const VectorXd trial = a + t * step;
            const VectorXd ft = matching_residual(candidates, trial, target, indices, support, L);
            const double norm_t = ft.cwiseAbs().maxCoeff();
            if (norm_t < fnorm) {
                a = trial;
                f = ft;
                fnorm = norm_t;
                improved = true;
                break;
            }
        }
        if (!improved) {
            std::ostringstream msg;
            msg << "damped newton stalled at residual " << fnorm << " after " << it + 1
                << " iterations";
            throw convergence_error(msg.str());
        }
    }
    if (fnorm > opt.tol) {
        std::ostringstream msg;
        msg << "matching conditions not satisfied: residual " << fnorm << " after "
            << opt.max_iterations << " iterations (tolerance " << opt.tol << ")";
        throw convergence_error(msg.str());
    }

    result.coefficients = a;
    result.residual = fnorm;
    result.iterations = it;
    const double amax = a.cwiseAbs().maxCoeff();
    for (long c = 0; c < nc; ++c)
        if (std::abs(a(c)) < opt.prune_fraction * amax)
            result.pruned.push_back(candidates[static_cast<std::size_t>(c)].trimmed());
    return result;
}

ReconstructionResult reconstruct(const Dataset& ds, const MatrixXd& latents,
                                 const ReconstructOptions& opt) {
    if (!opt.override_guard) {
        if (opt.guard_ratio < 0.0)
            throw std::invalid_argument(
                "thermality evidence missing: supply the latent-sweep loss ratio "
                "loss(N_L=1)/loss(N_L=0) or set the override flag");
        if (opt.guard_ratio >= opt.guard_threshold) {
            std::ostringstream msg;
            msg << "data fail the one-parameter thermality guard: sweep loss ratio "
                << opt.guard_ratio << " >= " << opt.guard_threshold;
            throw ill_posed_error(msg.str());
        }
    }

    const CandidateRanking ranking = rank_candidates(ds, latents, opt.mode, opt.knn);
    const int m = std::min<int>(opt.top_m, static_cast<int>(ranking.magnitudes.size()));
    if (m < 1) throw std::invalid_argument("no candidates available");
    std::vector<PauliLabel> candidates;
    for (int c = 0; c < m; ++c) candidates.push_back(ranking.magnitudes[static_cast<std::size_t>(c)].first);

    ReconstructionResult agg;
    agg.candidates = candidates;

    std::vector<VectorXd> solutions;
    double residual_sum = 0.0;
    int iter_max = 0;
    std::string last_failure = "none";
    for (long r = 0; r < ds.rows.rows(); ++r) {
        const VectorXd target = ds.rows.row(r).transpose();
        if (target.cwiseAbs().maxCoeff() < opt.low_signal_threshold) {
            ++agg.rows_low_signal;
            continue;
        }
        ++agg.rows_used;
        try {
            const ReconstructionResult row =
                newton_solve(candidates, target, ds.support, opt.newton);
            ++agg.rows_converged;
            solutions.push_back(row.coefficients);
            residual_sum += row.residual;
            iter_max = std::max(iter_max, row.iterations);
        } catch (const numerical_error& e) {
            last_failure = e.what();
        }
    }

    if (agg.rows_used == 0)
        throw convergence_error("all rows fell below the low-signal threshold");
    if (4 * agg.rows_converged < agg.rows_used) {
        std::ostringstream msg;
        msg << "reconstruction failed: " << agg.rows_converged << " of " << agg.rows_used
            << " usable rows converged (need 25%); last failure: " << last_failure;
        throw convergence_error(msg.str());
    }

    // Each row recovers the couplings only up to that row's overall scale, so
    // rows are combined through coefficient ratios.  The reference candidate is
    // the one with the largest median |coefficient| across rows: candidates that
    // merely ranked high but carry no coupling make an unusable denominator.
    const long nc = static_cast<long>(candidates.size());
    long ref = 0;
    double best_median = -1.0;
    std::vector<double> mags(solutions.size());
    for (long c = 0; c < nc; ++c) {
        for (std::size_t r = 0; r < solutions.size(); ++r) mags[r] = std::abs(solutions[r](c));
        std::nth_element(mags.begin(), mags.begin() + static_cast<long>(mags.size() / 2), mags.end());
        const double med = mags[mags.size() / 2];
        if (med > best_median) {
            best_median = med;
            ref = c;
        }
    }
    if (best_median <= 0.0)
        throw convergence_error("all converged rows recovered a zero Hamiltonian");

    std::vector<VectorXd> ratios;
    for (const VectorXd& v : solutions)
        if (std::abs(v(ref)) > 0.0) ratios.push_back(v / v(ref));
    if (ratios.empty())
        throw convergence_error("reference coupling vanished on every converged row");

    VectorXd mean = VectorXd::Zero(nc);
    for (const VectorXd& v : ratios) mean += v;
    mean /= static_cast<double>(ratios.size());
    VectorXd var = VectorXd::Zero(nc);
    for (const VectorXd& v : ratios) var += (v - mean).cwiseAbs2();
    agg.spread = (var / std::max<double>(1.0, static_cast<double>(ratios.size()) - 1.0)).cwiseSqrt();

    agg.reference = candidates[static_cast<std::size_t>(ref)].trimmed();
    agg.coefficients = mean;
    agg.residual = residual_sum / static_cast<double>(solutions.size());
    agg.iterations = iter_max;
    const double amax = mean.cwiseAbs().maxCoeff();
    for (long c = 0; c < nc; ++c)
        if (std::abs(mean(c)) < opt.newton.prune_fraction * amax)
            agg.pruned.push_back(candidates[static_cast<std::size_t>(c)].trimmed());
    return agg;
}

}  // namespace spinobs
