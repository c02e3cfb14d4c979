#include "spinobs/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "spinobs/errors.hpp"

namespace spinobs {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd gather_rows(const MatrixXd& rows, const std::vector<int>& idx) {
    MatrixXd out(static_cast<Eigen::Index>(idx.size()), rows.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows.row(idx[i]);
    return out;
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Eigen::MatrixXd Dataset::train_matrix() const {
    if (!has_split()) throw std::invalid_argument("dataset has no split");
    return gather_rows(rows, train_indices);
}

Eigen::MatrixXd Dataset::test_matrix() const {
    if (!has_split()) throw std::invalid_argument("dataset has no split");
    return gather_rows(rows, test_indices);
}

bool Dataset::has_aux(const std::string& name) const {
    return metadata.contains("aux") && metadata["aux"].contains(name);
}

Eigen::VectorXd Dataset::aux(const std::string& name) const {
    if (!has_aux(name)) throw std::invalid_argument("dataset has no auxiliary array '" + name + "'");
    const auto& arr = metadata["aux"][name];
    VectorXd out(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) out(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    return out;
}

void Dataset::set_aux(const std::string& name, const Eigen::VectorXd& values) {
    if (values.size() != rows.rows())
        throw std::invalid_argument("auxiliary array length must match the number of rows");
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < values.size(); ++i) arr.push_back(values(i));
    metadata["aux"][name] = std::move(arr);
}

void split_dataset(Dataset& ds, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train fraction must lie strictly between 0 and 1");
    const int n = ds.size();
    const int n_train = static_cast<int>(std::lround(train_fraction * n));
    if (n_train < 1 || n_train >= n)
        throw std::invalid_argument("split would leave an empty train or test side");

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    ds.train_indices.assign(perm.begin(), perm.begin() + n_train);
    ds.test_indices.assign(perm.begin() + n_train, perm.end());
    std::sort(ds.train_indices.begin(), ds.train_indices.end());
    std::sort(ds.test_indices.begin(), ds.test_indices.end());
    ds.metadata["split"] = {{"train_fraction", train_fraction}, {"seed", seed}};
}

void save_dataset(const Dataset& ds, const std::string& basepath) {
    {
        std::ofstream obs(basepath + ".obs");
        if (!obs) throw std::runtime_error("cannot open for writing: " + basepath + ".obs");
        for (Eigen::Index i = 0; i < ds.rows.rows(); ++i) {
            for (Eigen::Index j = 0; j < ds.rows.cols(); ++j) {
                if (j) obs << ' ';
                obs << format_value(ds.rows(i, j));
            }
            obs << '\n';
        }
    }
    {
        nlohmann::json meta = ds.metadata;
        meta["support"] = ds.support;
        meta["n_rows"] = ds.size();
        meta["n_cols"] = ds.dim();
        std::ofstream mf(basepath + ".meta");
        if (!mf) throw std::runtime_error("cannot open for writing: " + basepath + ".meta");
        mf << meta.dump(2) << '\n';
    }
    if (ds.has_split()) {
        std::ofstream sf(basepath + ".split");
        if (!sf) throw std::runtime_error("cannot open for writing: " + basepath + ".split");
        sf << "train";
        for (int i : ds.train_indices) sf << ' ' << i;
        sf << "\ntest";
        for (int i : ds.test_indices) sf << ' ' << i;
        sf << '\n';
    }
}

Dataset load_dataset(const std::string& basepath) {
    Dataset ds;

    std::ifstream obs(basepath + ".obs");
    if (!obs) throw std::runtime_error("cannot open dataset rows: " + basepath + ".obs");
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    Eigen::Index width = -1;
    while (std::getline(obs, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::vector<double> row;
        std::string tok;
        while (ss >> tok) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size())
                throw std::runtime_error(basepath + ".obs: bad number at row " + std::to_string(lineno) +
                                         ", column " + std::to_string(row.size() + 1));
            row.push_back(v);
        }
        if (width < 0) width = static_cast<Eigen::Index>(row.size());
        if (static_cast<Eigen::Index>(row.size()) != width)
            throw std::runtime_error(basepath + ".obs: inconsistent row length at row " +
                                     std::to_string(lineno));
        rows.push_back(std::move(row));
    }
    ds.rows.resize(static_cast<Eigen::Index>(rows.size()), std::max<Eigen::Index>(width, 0));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (Eigen::Index j = 0; j < width; ++j) ds.rows(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];

    std::ifstream mf(basepath + ".meta");
    if (!mf) throw std::runtime_error("cannot open dataset metadata: " + basepath + ".meta");
    try {
        ds.metadata = nlohmann::json::parse(mf);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(basepath + ".meta: " + std::string(e.what()));
    }
    ds.support = ds.metadata.value("support", 0);

    if (std::filesystem::exists(basepath + ".split")) {
        std::ifstream sf(basepath + ".split");
        std::string label;
        int sline = 0;
        while (sf >> label) {
            ++sline;
            std::vector<int>* side = nullptr;
            if (label == "train")
                side = &ds.train_indices;
            else if (label == "test")
                side = &ds.test_indices;
            else
                throw std::runtime_error(basepath + ".split: unknown side '" + label + "' at line " +
                                         std::to_string(sline));
            side->clear();
            std::getline(sf, line);
            std::istringstream ss(line);
            int idx;
            while (ss >> idx) {
                if (idx < 0 || idx >= ds.size())
                    throw std::runtime_error(basepath + ".split: index out of range at line " +
                                             std::to_string(sline));
                side->push_back(idx);
            }
        }
    }
    return ds;
}

Dataset sample_gge_dataset(const GgeDatasetOptions& opt) {
    if (opt.n_charges < 1 || opt.n_charges > 4)
        throw std::invalid_argument("number of charges must be 1..4");
    if (opt.n_samples < 10) throw std::invalid_argument("need at least 10 samples");
    if (opt.J == 0.0) throw std::invalid_argument("coupling J must be non-zero");

    std::vector<OperatorSpec> charges;
    for (int k = 0; k < opt.n_charges; ++k) charges.push_back(ising_charge(k, opt.J, opt.hx));
    const JointBasis jb = joint_diagonalize(charges, opt.sites);
    const MatrixXd obs_matrix = observation_matrix(jb.V, opt.sites, opt.support);

    const double bound = std::abs(opt.lambda_max / opt.J);
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unif(-bound, bound);

    Dataset ds;
    ds.support = opt.support;
    ds.rows.resize(opt.n_samples, obs_matrix.cols());
    MatrixXd lambdas(opt.n_samples, opt.n_charges);
    MatrixXd densities(opt.n_samples, opt.n_charges);
    for (int i = 0; i < opt.n_samples; ++i) {
        VectorXd lam(opt.n_charges);
        for (int c = 0; c < opt.n_charges; ++c) lam(c) = unif(rng);
        VectorXd expo = VectorXd::Zero(jb.V.rows());
        for (int c = 0; c < opt.n_charges; ++c) expo += lam(c) * jb.evals.row(c).transpose();
        VectorXd w = (expo.array() - expo.maxCoeff()).exp();
        w /= w.sum();
        ds.rows.row(i) = (obs_matrix.transpose() * w).transpose();
        lambdas.row(i) = lam.transpose();
        densities.row(i) = (jb.evals * w).transpose() / opt.sites;
    }

    ds.metadata["kind"] = "gge";
    ds.metadata["seed"] = opt.seed;
    ds.metadata["params"] = {{"n_charges", opt.n_charges}, {"n_samples", opt.n_samples},
                             {"sites", opt.sites},         {"support", opt.support},
                             {"J", opt.J},                 {"hx", opt.hx},
                             {"lambda_max", opt.lambda_max}};
    for (int c = 0; c < opt.n_charges; ++c) {
        ds.set_aux("lambda" + std::to_string(c), lambdas.col(c));
        ds.set_aux("charge" + std::to_string(c) + "_density", densities.col(c));
    }
    ds.set_aux("energy_density", densities.col(0));
    return ds;
}

}  // namespace spinobs
