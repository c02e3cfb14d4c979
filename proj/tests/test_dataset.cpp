#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "spinobs/dataset.hpp"
#include "spinobs/errors.hpp"

using namespace spinobs;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::string temp_base(const std::string& tag) {
    return (std::filesystem::temp_directory_path() / ("spinobs_test_" + tag)).string();
}

Dataset random_dataset(int n, int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Dataset ds;
    ds.support = 1;
    ds.rows.resize(n, dim);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dim; ++j) ds.rows(i, j) = unif(rng);
    ds.metadata["kind"] = "synthetic";
    ds.metadata["seed"] = seed;
    return ds;
}

void cleanup(const std::string& base) {
    for (const char* ext : {".obs", ".meta", ".split"}) std::remove((base + ext).c_str());
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("gge dataset shape and bounds") {
    GgeDatasetOptions opt;
    opt.n_charges = 1;
    opt.n_samples = 2000;
    opt.sites = 8;
    opt.support = 3;
    opt.seed = 42;
    const Dataset ds = sample_gge_dataset(opt);
    CHECK(ds.size() == 2000);
    CHECK(ds.dim() == 48);
    CHECK(ds.support == 3);
    CHECK(ds.rows.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
    CHECK(ds.has_aux("energy_density"));
    CHECK(ds.has_aux("lambda0"));
    CHECK(ds.aux("lambda0").cwiseAbs().maxCoeff() <= 2.0);
}

TEST_CASE("gge dataset is reproducible and seed-sensitive") {
    GgeDatasetOptions opt;
    opt.n_charges = 2;
    opt.n_samples = 10;
    opt.sites = 6;
    opt.seed = 7;
    const Dataset a = sample_gge_dataset(opt);
    const Dataset b = sample_gge_dataset(opt);
    CHECK((a.rows - b.rows).cwiseAbs().maxCoeff() == 0.0);
    opt.seed = 8;
    const Dataset c = sample_gge_dataset(opt);
    CHECK((a.rows - c.rows).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("gge dataset rows match direct ensemble computation") {
    GgeDatasetOptions opt;
    opt.n_charges = 2;
    opt.n_samples = 10;
    opt.sites = 6;
    opt.support = 3;
    opt.seed = 91;
    const Dataset ds = sample_gge_dataset(opt);
    std::vector<OperatorSpec> charges{ising_charge(0, opt.J, opt.hx), ising_charge(1, opt.J, opt.hx)};
    const VectorXd l0 = ds.aux("lambda0"), l1 = ds.aux("lambda1");
    for (int i = 0; i < 3; ++i) {
        VectorXd lam(2);
        lam << l0(i), l1(i);
        const VectorXd direct = observe(gge_state(charges, lam, opt.sites), opt.support).values;
        CHECK((ds.rows.row(i).transpose() - direct).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("split sizes, determinism, and coverage") {
    Dataset ds = random_dataset(2000, 4, 1);
    split_dataset(ds, 0.8, 5);
    CHECK(ds.train_indices.size() == 1600);
    CHECK(ds.test_indices.size() == 400);

    Dataset ds2 = random_dataset(2000, 4, 1);
    split_dataset(ds2, 0.8, 5);
    CHECK(ds.train_indices == ds2.train_indices);
    CHECK(ds.test_indices == ds2.test_indices);

    std::vector<bool> seen(2000, false);
    for (int i : ds.train_indices) seen[static_cast<std::size_t>(i)] = true;
    for (int i : ds.test_indices) {
        CHECK(!seen[static_cast<std::size_t>(i)]);  // disjoint
        seen[static_cast<std::size_t>(i)] = true;
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));  // covering

    Dataset small = random_dataset(10, 3, 2);
    split_dataset(small, 0.5, 1);
    CHECK(small.train_indices.size() == 5);
    CHECK(small.test_indices.size() == 5);
    CHECK_THROWS_AS(split_dataset(small, 0.99, 1), std::invalid_argument);
    CHECK_THROWS_AS(split_dataset(small, 0.0, 1), std::invalid_argument);
}

TEST_CASE("save and load round trip exactly") {
    Dataset ds = random_dataset(3, 5, 77);
    ds.rows(0, 0) = 1.0 / 3.0;
    ds.rows(1, 2) = -1e-17;
    ds.rows(2, 4) = 0.123456789012345678;
    ds.metadata["seed"] = std::uint64_t(0xDEADBEEFCAFEF00DULL);
    ds.metadata["params"] = {{"J", 1.0}, {"hx", 0.6}};
    split_dataset(ds, 0.66, 3);
    const std::string base = temp_base("roundtrip");
    save_dataset(ds, base);
    const Dataset back = load_dataset(base);
    REQUIRE(back.size() == ds.size());
    REQUIRE(back.dim() == ds.dim());
    for (int i = 0; i < ds.size(); ++i)
        for (int j = 0; j < ds.dim(); ++j) CHECK(back.rows(i, j) == ds.rows(i, j));
    CHECK(back.metadata["seed"].get<std::uint64_t>() == 0xDEADBEEFCAFEF00DULL);
    CHECK(back.metadata["params"]["hx"].get<double>() == 0.6);
    CHECK(back.train_indices == ds.train_indices);
    CHECK(back.test_indices == ds.test_indices);
    CHECK(back.support == ds.support);
    cleanup(base);
}

TEST_CASE("loading malformed rows reports the location") {
    const std::string base = temp_base("malformed");
    {
        std::ofstream obs(base + ".obs");
        obs << "0.5 0.25\n0.5\n";
        std::ofstream meta(base + ".meta");
        meta << "{\"support\": 1}\n";
    }
    CHECK_THROWS_WITH_AS(load_dataset(base), doctest::Contains("row 2"), std::runtime_error);
    {
        std::ofstream obs(base + ".obs");
        obs << "0.5 0.25\n0.5 oops\n";
    }
    CHECK_THROWS_WITH_AS(load_dataset(base), doctest::Contains("row 2"), std::runtime_error);
    CHECK_THROWS_AS(load_dataset(temp_base("missing_file")), std::runtime_error);
    cleanup(base);
}

TEST_CASE("auxiliary arrays") {
    Dataset ds = random_dataset(5, 2, 9);
    VectorXd e(5);
    e << 1, 2, 3, 4, 5;
    ds.set_aux("energy_density", e);
    CHECK(ds.has_aux("energy_density"));
    CHECK((ds.aux("energy_density") - e).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(ds.aux("missing"), std::invalid_argument);
    CHECK_THROWS_AS(ds.set_aux("bad", VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("gge dataset argument validation") {
    GgeDatasetOptions opt;
    opt.n_charges = 5;
    CHECK_THROWS_AS(sample_gge_dataset(opt), std::invalid_argument);
    opt.n_charges = 1;
    opt.n_samples = 5;
    CHECK_THROWS_AS(sample_gge_dataset(opt), std::invalid_argument);
}

}  // TEST_SUITE
