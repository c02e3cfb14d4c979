#pragma once

// Observation datasets: assembly from the physics engines, train/test
// splitting, and a diffable text file format.
//
// File layout for basepath "name":
//   name.obs    one observation row per line, space-separated decimal text
//               with 17 significant digits (value-exact round trip)
//   name.meta   JSON metadata: source kind, parameters, seed, support,
//               per-row auxiliary arrays under "aux"
//   name.split  two lines "train i j k ..." / "test i j k ..." (only written
//               once a split exists)

#include <Eigen/Dense>

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "spinobs/gge.hpp"

namespace spinobs {

struct Dataset {
    Eigen::MatrixXd rows;  // one observation vector per row
    int support = 0;
    nlohmann::json metadata = nlohmann::json::object();
    std::vector<int> train_indices;
    std::vector<int> test_indices;

    int size() const { return static_cast<int>(rows.rows()); }
    int dim() const { return static_cast<int>(rows.cols()); }
    bool has_split() const { return !train_indices.empty() || !test_indices.empty(); }

    Eigen::MatrixXd train_matrix() const;
    Eigen::MatrixXd test_matrix() const;

    bool has_aux(const std::string& name) const;
    Eigen::VectorXd aux(const std::string& name) const;  // throws std::invalid_argument if absent
    void set_aux(const std::string& name, const Eigen::VectorXd& values);
};

// Uniformly random disjoint train/test split, recorded in the dataset.
void split_dataset(Dataset& ds, double train_fraction, std::uint64_t seed);

void save_dataset(const Dataset& ds, const std::string& basepath);
Dataset load_dataset(const std::string& basepath);

struct GgeDatasetOptions {
    int n_charges = 1;
    int n_samples = 2000;
    int sites = 10;
    int support = 3;
    double J = 1.0;
    double hx = 0.6;
    double lambda_max = 2.0;  // lambda_i drawn from U[-lambda_max/J, lambda_max/J]
    std::uint64_t seed = 0;
};

// Generalized Gibbs dataset over the first n_charges members of the Ising
// charge tower, with Lagrange multipliers drawn uniformly per sample.  Uses a
// single joint diagonalization of the commuting charges, so the per-sample
// cost is a reweighting rather than an eigensolve.
Dataset sample_gge_dataset(const GgeDatasetOptions& opt);

}  // namespace spinobs
