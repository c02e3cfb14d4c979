// Command-line orchestration of the observation-complexity workflow: dataset
// generation (thermal ensembles, driven-dissipative steady states, random
// circuits), autoencoder training and latent sweeps, intrinsic-dimension and
// embedding analysis, coupling reconstruction, and SVG report emission.
//
// Exit codes: 0 success, 1 usage/input error, 2 numerical or convergence
// failure.  Every artifact embeds the effective configuration and seed, and
// usage errors never leave partial output files (validation and computation
// precede all writes).

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "spinobs/analysis.hpp"
#include "spinobs/autoencoder.hpp"
#include "spinobs/circuit.hpp"
#include "spinobs/dataset.hpp"
#include "spinobs/errors.hpp"
#include "spinobs/gge.hpp"
#include "spinobs/lindblad.hpp"
#include "spinobs/pauli.hpp"
#include "spinobs/reconstruct.hpp"
#include "spinobs/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spinobs;

namespace {

// ---------------------------------------------------------------------------
// Plumbing

// Output paths resolve against $SPINOBS_OUT when relative and the variable is
// set, so batch scripts can redirect a whole pipeline with one line.
std::string resolve_out(const std::string& path) {
    const char* base = std::getenv("SPINOBS_OUT");
    if (path.empty() || path.front() == '/' || base == nullptr || *base == '\0') return path;
    return (fs::path(base) / path).string();
}

// Effective configuration of a subcommand as a single provenance line.
std::string config_line(const CLI::App& sub) {
    std::string flat = sub.get_name();
    std::istringstream lines(sub.config_to_str(true, false));
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty()) flat += "; " + line;
    }
    return flat;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& content) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
    if (!out.good()) throw std::runtime_error("failed writing " + path);
}

void write_csv(const std::string& path, const std::string& config,
               const std::vector<std::string>& columns, const Eigen::MatrixXd& values) {
    std::ostringstream out;
    out << "# config: " << config << "\n";
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
    out << "\n";
    for (long r = 0; r < values.rows(); ++r) {
        for (long c = 0; c < values.cols(); ++c) out << (c ? "," : "") << fmt17(values(r, c));
        out << "\n";
    }
    write_text(path, out.str());
}

struct CsvTable {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;
};

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    CsvTable table;
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (table.columns.empty()) {
            table.columns = cells;
            continue;
        }
        if (cells.size() != table.columns.size())
            throw std::runtime_error(path + ": wrong cell count at line " + std::to_string(lineno));
        std::vector<double> row;
        for (const std::string& cell : cells) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str())
                throw std::runtime_error(path + ": bad number '" + cell + "' at line " +
                                         std::to_string(lineno));
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (table.columns.empty()) throw std::runtime_error(path + ": missing header line");
    table.values.resize(static_cast<long>(rows.size()), static_cast<long>(table.columns.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            table.values(static_cast<long>(r), static_cast<long>(c)) = rows[r][c];
    return table;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoi(item));
    }
    if (out.empty()) throw CLI::ValidationError("expected a comma-separated integer list");
    return out;
}

// Aux columns of a dataset in name-sorted order (deterministic artifacts).
std::vector<std::string> aux_names(const Dataset& ds) {
    std::vector<std::string> names;
    if (ds.metadata.contains("aux"))
        for (const auto& [k, v] : ds.metadata.at("aux").items()) names.push_back(k);
    std::sort(names.begin(), names.end());
    return names;
}

// ---------------------------------------------------------------------------
// Subcommand state

struct GenGgeArgs {
    GgeDatasetOptions opt;
    double split = 0.8;
    std::string out = "gge";
};

struct GenLindbladArgs {
    int sites = 6;
    double epsilon = 1e-3;
    int n = 100;
    int support = 3;
    bool structured = false;
    double J = 1.0, hx = 1.152, hz = 0.974;
    double gamma_max = 1.0;
    std::uint64_t seed = 0;
    double split = 0.8;
    int jobs = 1;
    std::string out = "lindblad";
};

struct GenCircuitArgs {
    TrajectoryOptions opt;
    int n = 500;
    double theta_lo = 0.0, theta_hi = 3.14159265358979324;
    double phi_lo = -3.14159265358979324, phi_hi = 3.14159265358979324;
    std::string record;
    double split = 0.8;
    std::string out = "circuit";
};

struct TrainArgs {
    std::string data;
    int latent = 1;
    std::vector<int> widths{400, 400};
    TrainOptions opt;
    double split = 0.8;
    std::string out = "train_run";
};

struct SweepArgs {
    std::string data;
    std::string latents = "0,1,2,3,4";
    int seeds = 3;
    std::vector<int> widths{400, 400};
    TrainOptions opt;
    double split = 0.8;
    int jobs = 1;
    std::string out = "sweep_run";
};

struct IdArgs {
    std::string data;
    std::string latents;
    std::string mode = "twonn";
    std::string windows = "1.02:1.5,2:2.5";
    std::string out;
};

struct EmbedArgs {
    std::string data;
    TsneOptions opt;
    std::string color;
    std::string out = "embed_run";
};

struct CorrelateArgs {
    std::string latents;
    int col = 0;
    std::string data;
    std::string aux = "energy_density";
    std::string out;
};

struct ReconstructArgs {
    std::string data;
    std::string latents;
    std::string mode = "tangent";
    ReconstructOptions opt;
    std::string out = "reconstruction.txt";
};

struct ReportArgs {
    std::string kind = "sweep";
    std::string in;
    std::string out = "report.svg";
    std::string title;
    bool log_x = false, log_y = false;
};

// ---------------------------------------------------------------------------
// Subcommand actions

int run_gen_gge(const GenGgeArgs& a, const std::string& config) {
    Dataset ds = sample_gge_dataset(a.opt);
    if (a.split > 0.0) split_dataset(ds, a.split, a.opt.seed + 1);
    ds.metadata["config"] = config;
    const std::string base = resolve_out(a.out);
    if (fs::path(base).has_parent_path()) fs::create_directories(fs::path(base).parent_path());
    save_dataset(ds, base);
    std::cout << "wrote " << base << ".obs (" << ds.size() << " x " << ds.dim() << ")\n";
    return 0;
}

int run_gen_lindblad(const GenLindbladArgs& a, const std::string& config) {
    if (a.n < 1) throw CLI::ValidationError("--n must be positive");
    if (a.jobs < 1) throw CLI::ValidationError("--jobs must be positive");
    const OperatorSpec h = ising_hamiltonian(a.J, a.hx, a.hz);
    const auto labels = enumerate_support_strings(a.support);

    Dataset ds;
    ds.support = a.support;
    ds.rows.resize(a.n, static_cast<long>(labels.size()));
    Eigen::VectorXd energy(a.n), xx(a.n), residual(a.n), sigma2(a.n);
    Eigen::MatrixXd gammas = Eigen::MatrixXd::Zero(a.n, 4);

    OperatorSpec xx_pair;  // x x on the observation window's first two sites
    xx_pair.translationally_invariant = false;
    xx_pair.terms.emplace_back(1.0, PauliLabel("xx"));

    std::atomic<int> failures{0};
    std::string first_failure;
    std::mutex failure_mutex;
    const auto worker = [&](int begin, int stride) {
        for (int r = begin; r < a.n; r += stride) {
            try {
                LindbladSpec diss;
                if (a.structured) {
                    std::mt19937_64 rng(a.seed + static_cast<std::uint64_t>(r));
                    std::uniform_real_distribution<double> unif(0.0, a.gamma_max);
                    const double g1 = unif(rng), g2 = unif(rng), g3 = unif(rng), g4 = unif(rng);
                    diss = structured_dissipators(g1, g2, g3, g4, a.seed + static_cast<std::uint64_t>(r));
                    gammas.row(r) << g1, g2, g3, g4;
                } else {
                    diss = random_rotated_dissipators(a.seed + static_cast<std::uint64_t>(r));
                }
                diss.epsilon = a.epsilon;
                const Liouvillian liou = build_liouvillian(h, diss, a.sites);
                const SteadyState ss = steady_state(liou);
                ds.rows.row(r) = observe_rdm(ss.rho, a.sites, a.support).transpose();
                energy(r) = expectation(ss.rho, h, a.sites) / a.sites;
                xx(r) = expectation(ss.rho, xx_pair, a.sites);
                residual(r) = ss.residual;
                sigma2(r) = ss.second_singular;
            } catch (const numerical_error& e) {
                ++failures;
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (first_failure.empty()) first_failure = e.what();
            }
        }
    };
    if (a.jobs == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < a.jobs; ++j) pool.emplace_back(worker, j, a.jobs);
        for (auto& t : pool) t.join();
    }
    if (failures > 0)
        throw convergence_error(std::to_string(failures.load()) + " of " + std::to_string(a.n) +
                                " steady states failed; first: " + first_failure);

    ds.set_aux("energy_density", energy);
    ds.set_aux("xx", xx);
    ds.set_aux("residual", residual);
    ds.set_aux("second_singular", sigma2);
    if (a.structured)
        for (int g = 0; g < 4; ++g) ds.set_aux("gamma" + std::to_string(g + 1), gammas.col(g));
    ds.metadata["config"] = config;
    ds.metadata["source"] = a.structured ? "lindblad-structured" : "lindblad-rotated";
    ds.metadata["sites"] = a.sites;
    ds.metadata["epsilon"] = a.epsilon;
    ds.metadata["seed"] = a.seed;
    if (a.split > 0.0) split_dataset(ds, a.split, a.seed + 1);

    const std::string base = resolve_out(a.out);
    if (fs::path(base).has_parent_path()) fs::create_directories(fs::path(base).parent_path());
    save_dataset(ds, base);
    std::cout << "wrote " << base << ".obs (" << ds.size() << " x " << ds.dim() << ")\n";
    return 0;
}

int run_gen_circuit(GenCircuitArgs a, const std::string& config) {
    if (a.n < 1) throw CLI::ValidationError("--n must be positive");
    if (!a.record.empty()) a.opt.record_steps = parse_int_list(a.record);

    // One trajectory per initial state; every recorded step becomes its own
    // dataset over initial states.
    std::mt19937_64 rng(a.opt.seed);
    std::uniform_real_distribution<double> uth(a.theta_lo, a.theta_hi), uph(a.phi_lo, a.phi_hi);
    std::vector<Dataset> per_step;
    std::vector<int> steps;
    std::vector<double> times;
    Eigen::VectorXd thetas(a.n), phis(a.n);
    for (int r = 0; r < a.n; ++r) {
        const double theta = uth(rng), phi = uph(rng);
        TrajectoryOptions topt = a.opt;
        topt.seed = a.opt.seed + 1000003ULL * static_cast<std::uint64_t>(r);
        const TrajectoryRecord rec = run_trajectory(theta, phi, topt);
        if (per_step.empty()) {
            steps = rec.steps;
            times = rec.times;
            per_step.resize(steps.size());
            for (std::size_t s = 0; s < steps.size(); ++s) {
                per_step[s].support = a.opt.support;
                per_step[s].rows.resize(a.n, rec.observations[s].values.size());
            }
        }
        for (std::size_t s = 0; s < steps.size(); ++s)
            per_step[s].rows.row(r) = rec.observations[s].values.transpose();
        thetas(r) = theta;
        phis(r) = phi;
    }

    const std::string base = resolve_out(a.out);
    if (fs::path(base).has_parent_path()) fs::create_directories(fs::path(base).parent_path());
    json manifest;
    manifest["config"] = config;
    manifest["steps"] = steps;
    manifest["times"] = times;
    manifest["files"] = json::array();
    for (std::size_t s = 0; s < steps.size(); ++s) {
        Dataset& ds = per_step[s];
        ds.set_aux("theta", thetas);
        ds.set_aux("phi", phis);
        ds.metadata["config"] = config;
        ds.metadata["source"] = "circuit";
        ds.metadata["step"] = steps[s];
        ds.metadata["time"] = times[s];
        ds.metadata["seed"] = a.opt.seed;
        if (a.split > 0.0) split_dataset(ds, a.split, a.opt.seed + 1);
        char suffix[32];
        std::snprintf(suffix, sizeof(suffix), "_step%04d", steps[s]);
        save_dataset(ds, base + suffix);
        manifest["files"].push_back(base + suffix + ".obs");
    }
    write_text(base + "_manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << steps.size() << " datasets under " << base << "_step*.obs\n";
    return 0;
}

NetworkConfig make_config(int input_dim, int latent, const std::vector<int>& widths) {
    NetworkConfig config;
    config.input_dim = input_dim;
    config.encoder_widths = widths;
    config.latent_dim = latent;
    config.decoder_widths = widths;
    return config;
}

int run_train(const TrainArgs& a, const std::string& config_str) {
    Dataset ds = load_dataset(a.data);
    if (!ds.has_split()) split_dataset(ds, a.split, a.opt.seed + 1);
    const NetworkConfig config = make_config(ds.dim(), a.latent, a.widths);
    const TrainReport report = train(ds, config, a.opt);

    const std::string dir = resolve_out(a.out);
    fs::create_directories(dir);
    save_network(dir + "/checkpoint.json", config, report.best_params);

    Eigen::MatrixXd metrics(static_cast<long>(report.eval_steps.size()), 3);
    for (std::size_t i = 0; i < report.eval_steps.size(); ++i)
        metrics.row(static_cast<long>(i)) << static_cast<double>(report.eval_steps[i]),
            report.train_curve[i], report.test_curve[i];
    write_csv(dir + "/metrics.csv", config_str, {"step", "train_loss", "test_loss"}, metrics);

    const Eigen::MatrixXd latents = encode_dataset(report.best_params, config, ds);
    std::vector<std::string> cols;
    for (int c = 0; c < latents.cols(); ++c) cols.push_back("latent" + std::to_string(c));
    Eigen::MatrixXd table = latents;
    for (const std::string& name : aux_names(ds)) {
        table.conservativeResize(Eigen::NoChange, table.cols() + 1);
        table.col(table.cols() - 1) = ds.aux(name);
        cols.push_back(name);
    }
    write_csv(dir + "/latents.csv", config_str, cols, table);

    json summary;
    summary["config"] = config_str;
    summary["best_test_loss"] = report.best_test_loss;
    summary["best_step"] = report.best_step;
    summary["latent_dim"] = a.latent;
    summary["seed"] = a.opt.seed;
    write_text(dir + "/summary.json", summary.dump(2) + "\n");
    std::cout << "best test loss " << fmt17(report.best_test_loss) << " at step "
              << report.best_step << "\n";
    return 0;
}

int run_sweep(const SweepArgs& a, const std::string& config_str) {
    Dataset ds = load_dataset(a.data);
    if (!ds.has_split()) split_dataset(ds, a.split, a.opt.seed + 1);
    const std::vector<int> latent_dims = parse_int_list(a.latents);
    if (a.seeds < 1) throw CLI::ValidationError("--seeds must be positive");

    const NetworkConfig config = make_config(ds.dim(), 1, a.widths);
    Eigen::MatrixXd losses(static_cast<long>(latent_dims.size()), a.seeds);
    Eigen::MatrixXd runs(static_cast<long>(latent_dims.size()) * a.seeds, 3);
    for (int s = 0; s < a.seeds; ++s) {
        TrainOptions opt = a.opt;
        opt.seed = a.opt.seed + 7919ULL * static_cast<std::uint64_t>(s);
        const auto entries = latent_sweep(ds, latent_dims, config, opt, a.jobs);
        for (std::size_t i = 0; i < entries.size(); ++i) {
            losses(static_cast<long>(i), s) = entries[i].best_test_loss;
            runs.row(static_cast<long>(i) * a.seeds + s)
                << static_cast<double>(entries[i].latent_dim), static_cast<double>(s),
                entries[i].best_test_loss;
        }
    }
    Eigen::MatrixXd med(static_cast<long>(latent_dims.size()), 2);
    for (std::size_t i = 0; i < latent_dims.size(); ++i) {
        std::vector<double> seed_losses(static_cast<std::size_t>(a.seeds));
        for (int s = 0; s < a.seeds; ++s) seed_losses[static_cast<std::size_t>(s)] =
            losses(static_cast<long>(i), s);
        std::sort(seed_losses.begin(), seed_losses.end());
        const std::size_t m = seed_losses.size();
        const double median =
            (m % 2) ? seed_losses[m / 2] : 0.5 * (seed_losses[m / 2 - 1] + seed_losses[m / 2]);
        med.row(static_cast<long>(i)) << static_cast<double>(latent_dims[i]), median;
    }

    const std::string dir = resolve_out(a.out);
    fs::create_directories(dir);
    write_csv(dir + "/sweep.csv", config_str, {"n_latent", "best_test_loss"}, med);
    write_csv(dir + "/sweep_runs.csv", config_str, {"n_latent", "seed", "best_test_loss"}, runs);

    PlotTable plot;
    plot.columns = {"n_latent", "median best test loss"};
    plot.values = med;
    PlotOptions popt;
    popt.title = "reconstruction error vs latent count";
    popt.x_label = "number of latent neurons";
    popt.y_label = "best test loss";
    popt.log_y = med.col(1).minCoeff() > 0.0;
    popt.config = config_str;
    emit_svg(plot, PlotKind::line, dir + "/sweep.svg", popt);
    for (long i = 0; i < med.rows(); ++i)
        std::cout << "N_L=" << med(i, 0) << "  median best test loss " << fmt17(med(i, 1)) << "\n";
    return 0;
}

std::vector<std::pair<double, double>> parse_windows(const std::string& s) {
    std::vector<std::pair<double, double>> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::size_t colon = item.find(':');
        if (colon == std::string::npos)
            throw CLI::ValidationError("windows are lo:hi pairs separated by commas");
        out.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
    }
    if (out.empty()) throw CLI::ValidationError("expected at least one lo:hi window");
    return out;
}

// Latent CSVs from `train` append auxiliary columns; keep the "latent*" ones
// when the header distinguishes them, otherwise use every column.
Eigen::MatrixXd latent_columns(const CsvTable& table) {
    std::vector<long> keep;
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        if (table.columns[c].rfind("latent", 0) == 0) keep.push_back(static_cast<long>(c));
    if (keep.empty()) return table.values;
    Eigen::MatrixXd out(table.values.rows(), static_cast<long>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c)
        out.col(static_cast<long>(c)) = table.values.col(keep[c]);
    return out;
}

int run_intrinsic_dim(const IdArgs& a, const std::string& config_str) {
    Eigen::MatrixXd points;
    if (!a.latents.empty()) {
        points = latent_columns(read_csv(a.latents));
    } else if (!a.data.empty()) {
        points = load_dataset(a.data).rows;
    } else {
        throw CLI::ValidationError("supply --data or --latents");
    }

    json out;
    out["config"] = config_str;
    if (a.mode == "twonn") {
        const IdEstimate est = twonn_id(points);
        out["id"] = est.id;
        out["residual"] = est.residual;
        out["n_points"] = est.n_points;
        std::cout << "TwoNN intrinsic dimension " << est.id << " (" << est.n_points
                  << " ratios, fit residual " << est.residual << ")\n";
    } else if (a.mode == "two-slope") {
        const auto slopes = two_slope_analysis(points, parse_windows(a.windows));
        out["windows"] = json::array();
        for (const WindowSlope& w : slopes) {
            out["windows"].push_back(
                {{"lo", w.lo}, {"hi", w.hi}, {"count", w.count}, {"id", w.id}});
            std::cout << "window [" << w.lo << ", " << w.hi << "): id " << w.id << " from "
                      << w.count << " ratios\n";
        }
    } else {
        throw CLI::ValidationError("--mode must be twonn or two-slope");
    }
    if (!a.out.empty()) write_text(resolve_out(a.out), out.dump(2) + "\n");
    return 0;
}

int run_embed(const EmbedArgs& a, const std::string& config_str) {
    const Dataset ds = load_dataset(a.data);
    Eigen::VectorXd color = Eigen::VectorXd::Zero(ds.size());
    std::string color_name = "index";
    if (!a.color.empty()) {
        color = ds.aux(a.color);
        color_name = a.color;
    } else {
        for (int r = 0; r < ds.size(); ++r) color(r) = r;
    }

    const Embedding2D emb = tsne(ds.rows, a.opt);

    const std::string dir = resolve_out(a.out);
    fs::create_directories(dir);
    Eigen::MatrixXd table(ds.size(), 3);
    table.leftCols(2) = emb.points;
    table.col(2) = color;
    write_csv(dir + "/embedding.csv", config_str, {"u", "v", color_name}, table);

    Eigen::MatrixXd kl(static_cast<long>(emb.kl_history.size()), 2);
    for (std::size_t i = 0; i < emb.kl_history.size(); ++i)
        kl.row(static_cast<long>(i)) << static_cast<double>(i), emb.kl_history[i];
    write_csv(dir + "/kl.csv", config_str, {"iteration", "kl"}, kl);

    PlotTable plot;
    plot.columns = {"u", "v", color_name};
    plot.values = table;
    PlotOptions popt;
    popt.title = "t-SNE embedding";
    popt.config = config_str;
    emit_svg(plot, PlotKind::scatter_color, dir + "/embedding.svg", popt);
    std::cout << "final KL " << emb.final_kl << "; wrote " << dir << "/embedding.svg\n";
    return 0;
}

int run_correlate(const CorrelateArgs& a, const std::string& config_str) {
    const CsvTable latents = read_csv(a.latents);
    if (a.col < 0 || a.col >= latents.values.cols())
        throw CLI::ValidationError("--col outside the latent table");
    const Dataset ds = load_dataset(a.data);
    const Eigen::VectorXd values = ds.aux(a.aux);
    const CorrelationResult res =
        latent_observable_correlation(latents.values.col(a.col), values);

    std::cout << "spearman " << fmt17(res.spearman) << "  monotone " << (res.monotone ? "yes" : "no")
              << (res.tie_warning ? "  [tie warning: rank correlation unreliable]" : "") << "\n";
    if (!a.out.empty()) {
        json out;
        out["config"] = config_str;
        out["spearman"] = res.spearman;
        out["monotone"] = res.monotone;
        out["tie_warning"] = res.tie_warning;
        out["aux"] = a.aux;
        write_text(resolve_out(a.out), out.dump(2) + "\n");
    }
    return 0;
}

int run_reconstruct(const ReconstructArgs& a, const std::string& config_str) {
    const Dataset ds = load_dataset(a.data);
    const Eigen::MatrixXd latents = latent_columns(read_csv(a.latents));
    if (latents.rows() != ds.size())
        throw CLI::ValidationError("latent rows do not match the dataset");
    ReconstructOptions opt = a.opt;
    if (a.mode == "tangent")
        opt.mode = EmbeddingMode::tangent;
    else if (a.mode == "pca1")
        opt.mode = EmbeddingMode::pca1;
    else
        throw CLI::ValidationError("--mode must be tangent or pca1");

    const ReconstructionResult res = reconstruct(ds, latents, opt);

    std::ostringstream report;
    report << "# coupling reconstruction\n";
    report << "# config: " << config_str << "\n";
    report << "rows: " << ds.size() << " total, " << res.rows_used << " usable, "
           << res.rows_converged << " converged, " << res.rows_low_signal << " low-signal\n";
    report << "reference candidate: " << res.reference.str() << " (ratios are relative to it)\n";
    report << "mean matching residual: " << fmt17(res.residual) << "\n";
    report << "candidates:\n";
    for (std::size_t c = 0; c < res.candidates.size(); ++c)
        report << "  " << res.candidates[c].str() << "  ratio " << fmt17(res.coefficients(c))
               << "  spread " << fmt17(res.spread(c)) << "\n";
    report << "eliminated:";
    for (const PauliLabel& p : res.pruned) report << " " << p.str();
    report << (res.pruned.empty() ? " none" : "") << "\n";

    write_text(resolve_out(a.out), report.str());
    std::cout << report.str();
    return 0;
}

int run_report(const ReportArgs& a, const std::string& config_str) {
    const CsvTable csv = read_csv(a.in);
    PlotTable plot;
    plot.columns = csv.columns;
    plot.values = csv.values;
    PlotKind kind;
    PlotOptions popt;
    popt.log_x = a.log_x;
    popt.log_y = a.log_y;
    popt.title = a.title;
    popt.config = config_str;
    if (a.kind == "sweep") {
        kind = PlotKind::line;
        popt.x_label = plot.columns.front();
    } else if (a.kind == "embedding") {
        kind = PlotKind::scatter_color;
    } else if (a.kind == "barrier") {
        kind = PlotKind::heatmap;
        popt.x_label = plot.columns.front();
        popt.y_label = plot.columns.size() > 1 ? plot.columns[1] : "";
    } else {
        throw CLI::ValidationError("--kind must be sweep, embedding, or barrier");
    }
    emit_svg(plot, kind, resolve_out(a.out), popt);
    std::cout << "wrote " << resolve_out(a.out) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spin-chain observation complexity toolkit"};
    app.require_subcommand(1);

    GenGgeArgs gge;
    CLI::App* c_gge = app.add_subcommand("gen-gge", "sample a (generalized) Gibbs dataset");
    c_gge->add_option("--nc", gge.opt.n_charges, "number of conserved charges (1..4)")
        ->capture_default_str();
    c_gge->add_option("--n", gge.opt.n_samples, "number of states")->capture_default_str();
    c_gge->add_option("--L", gge.opt.sites, "chain length")->capture_default_str();
    c_gge->add_option("--support", gge.opt.support, "observation window size")->capture_default_str();
    c_gge->add_option("--J", gge.opt.J, "Ising coupling")->capture_default_str();
    c_gge->add_option("--hx", gge.opt.hx, "transverse field")->capture_default_str();
    c_gge->add_option("--lambda-max", gge.opt.lambda_max, "multiplier range")->capture_default_str();
    c_gge->add_option("--seed", gge.opt.seed, "RNG seed")->capture_default_str();
    c_gge->add_option("--split", gge.split, "train fraction (0 = no split)")->capture_default_str();
    c_gge->add_option("--out", gge.out, "output basename")->capture_default_str();

    GenLindbladArgs lin;
    CLI::App* c_lin = app.add_subcommand("gen-lindblad", "steady states of dissipative chains");
    c_lin->add_option("--sites", lin.sites, "chain length (1..7)")->capture_default_str();
    c_lin->add_option("--epsilon", lin.epsilon, "dissipation strength")->capture_default_str();
    c_lin->add_option("--n", lin.n, "number of dissipator realizations")->capture_default_str();
    c_lin->add_option("--support", lin.support, "observation window size")->capture_default_str();
    c_lin->add_flag("--structured", lin.structured, "spin-flip families instead of random rotated");
    c_lin->add_option("--J", lin.J, "Ising coupling")->capture_default_str();
    c_lin->add_option("--hx", lin.hx, "transverse field")->capture_default_str();
    c_lin->add_option("--hz", lin.hz, "longitudinal field")->capture_default_str();
    c_lin->add_option("--gamma-max", lin.gamma_max, "structured rate range")->capture_default_str();
    c_lin->add_option("--seed", lin.seed, "RNG seed")->capture_default_str();
    c_lin->add_option("--split", lin.split, "train fraction (0 = no split)")->capture_default_str();
    c_lin->add_option("--jobs", lin.jobs, "parallel steady-state solves")->capture_default_str();
    c_lin->add_option("--out", lin.out, "output basename")->capture_default_str();

    GenCircuitArgs cir;
    CLI::App* c_cir = app.add_subcommand("gen-circuit", "random-circuit trajectory observations");
    c_cir->add_option("--L", cir.opt.sites, "chain length (even)")->capture_default_str();
    c_cir->add_option("--support", cir.opt.support, "observation window size")->capture_default_str();
    c_cir->add_option("--steps", cir.opt.steps, "total brickwork steps")->capture_default_str();
    c_cir->add_option("--record", cir.record, "recorded steps (comma list; default dense-then-log)");
    c_cir->add_option("--n", cir.n, "number of initial product states")->capture_default_str();
    c_cir->add_option("--theta-min", cir.theta_lo, "Bloch angle range")->capture_default_str();
    c_cir->add_option("--theta-max", cir.theta_hi, "Bloch angle range")->capture_default_str();
    c_cir->add_option("--phi-min", cir.phi_lo, "Bloch phase range")->capture_default_str();
    c_cir->add_option("--phi-max", cir.phi_hi, "Bloch phase range")->capture_default_str();
    c_cir->add_option("--seed", cir.opt.seed, "RNG seed")->capture_default_str();
    c_cir->add_option("--split", cir.split, "train fraction (0 = no split)")->capture_default_str();
    c_cir->add_option("--out", cir.out, "output basename")->capture_default_str();

    TrainArgs tr;
    CLI::App* c_tr = app.add_subcommand("train", "train one bottleneck autoencoder");
    c_tr->add_option("--data", tr.data, "dataset basename")->required();
    c_tr->add_option("--nl", tr.latent, "latent width")->capture_default_str();
    c_tr->add_option("--widths", tr.widths, "hidden widths (encoder; decoder mirrors)")
        ->capture_default_str();
    c_tr->add_option("--steps", tr.opt.steps, "Adam steps")->capture_default_str();
    c_tr->add_option("--batch", tr.opt.batch_size, "batch size")->capture_default_str();
    c_tr->add_option("--lr", tr.opt.learning_rate, "learning rate")->capture_default_str();
    c_tr->add_option("--eval-every", tr.opt.eval_every, "evaluation period")->capture_default_str();
    c_tr->add_option("--seed", tr.opt.seed, "RNG seed")->capture_default_str();
    c_tr->add_option("--split", tr.split, "train fraction when the dataset has no split")
        ->capture_default_str();
    c_tr->add_option("--out", tr.out, "output directory")->capture_default_str();

    SweepArgs sw;
    CLI::App* c_sw = app.add_subcommand("sweep", "best test loss across latent widths");
    c_sw->add_option("--data", sw.data, "dataset basename")->required();
    c_sw->add_option("--nl-list", sw.latents, "latent widths (comma list)")->capture_default_str();
    c_sw->add_option("--seeds", sw.seeds, "independent seeds per width")->capture_default_str();
    c_sw->add_option("--widths", sw.widths, "hidden widths")->capture_default_str();
    c_sw->add_option("--steps", sw.opt.steps, "Adam steps")->capture_default_str();
    c_sw->add_option("--batch", sw.opt.batch_size, "batch size")->capture_default_str();
    c_sw->add_option("--lr", sw.opt.learning_rate, "learning rate")->capture_default_str();
    c_sw->add_option("--eval-every", sw.opt.eval_every, "evaluation period")->capture_default_str();
    c_sw->add_option("--seed", sw.opt.seed, "base RNG seed")->capture_default_str();
    c_sw->add_option("--split", sw.split, "train fraction when the dataset has no split")
        ->capture_default_str();
    c_sw->add_option("--jobs", sw.jobs, "parallel trainings")->capture_default_str();
    c_sw->add_option("--out", sw.out, "output directory")->capture_default_str();

    IdArgs id;
    CLI::App* c_id = app.add_subcommand("intrinsic-dim", "TwoNN / two-slope dimension estimate");
    c_id->add_option("--data", id.data, "dataset basename (rows as points)");
    c_id->add_option("--latents", id.latents, "latent CSV instead of dataset rows");
    c_id->add_option("--mode", id.mode, "twonn or two-slope")->capture_default_str();
    c_id->add_option("--windows", id.windows, "two-slope mu windows lo:hi,lo:hi")
        ->capture_default_str();
    c_id->add_option("--out", id.out, "optional JSON output path");

    EmbedArgs em;
    CLI::App* c_em = app.add_subcommand("embed", "exact t-SNE embedding of dataset rows");
    c_em->add_option("--data", em.data, "dataset basename")->required();
    c_em->add_option("--perplexity", em.opt.perplexity, "t-SNE perplexity")->capture_default_str();
    c_em->add_option("--iterations", em.opt.iterations, "gradient steps")->capture_default_str();
    c_em->add_option("--seed", em.opt.seed, "RNG seed")->capture_default_str();
    c_em->add_option("--color", em.color, "aux column used for the colormap");
    c_em->add_option("--out", em.out, "output directory")->capture_default_str();

    CorrelateArgs co;
    CLI::App* c_co = app.add_subcommand("correlate", "rank correlation of a latent with an aux");
    c_co->add_option("--latents", co.latents, "latent CSV")->required();
    c_co->add_option("--col", co.col, "latent column")->capture_default_str();
    c_co->add_option("--data", co.data, "dataset basename")->required();
    c_co->add_option("--aux", co.aux, "aux column name")->capture_default_str();
    c_co->add_option("--out", co.out, "optional JSON output path");

    ReconstructArgs rc;
    CLI::App* c_rc = app.add_subcommand("reconstruct", "coupling ratios from thermal observations");
    c_rc->add_option("--data", rc.data, "dataset basename")->required();
    c_rc->add_option("--latents", rc.latents, "latent CSV aligned with the dataset")->required();
    c_rc->add_option("--mode", rc.mode, "tangent or pca1")->capture_default_str();
    c_rc->add_option("--top-m", rc.opt.top_m, "candidates kept from the ranking")
        ->capture_default_str();
    c_rc->add_option("--knn", rc.opt.knn, "ranking neighbors")->capture_default_str();
    c_rc->add_option("--oracle-sites", rc.opt.newton.oracle_sites, "thermal oracle chain length")
        ->capture_default_str();
    c_rc->add_option("--tol", rc.opt.newton.tol, "matching-condition tolerance")
        ->capture_default_str();
    c_rc->add_option("--low-signal", rc.opt.low_signal_threshold, "row exclusion threshold")
        ->capture_default_str();
    c_rc->add_option("--guard-ratio", rc.opt.guard_ratio,
                     "latent-sweep evidence loss(N_L=1)/loss(N_L=0)");
    c_rc->add_flag("--override-guard", rc.opt.override_guard, "skip the thermality guard");
    c_rc->add_option("--out", rc.out, "report path")->capture_default_str();

    ReportArgs rp;
    CLI::App* c_rp = app.add_subcommand("report", "render a CSV table to SVG");
    c_rp->add_option("--kind", rp.kind, "sweep (line), embedding (scatter), barrier (heatmap)")
        ->capture_default_str();
    c_rp->add_option("--in", rp.in, "input CSV")->required();
    c_rp->add_option("--out", rp.out, "output SVG path")->capture_default_str();
    c_rp->add_option("--title", rp.title, "plot title");
    c_rp->add_flag("--log-x", rp.log_x, "log-scale x axis");
    c_rp->add_flag("--log-y", rp.log_y, "log-scale y axis");

    for (CLI::App* sub : {c_gge, c_lin, c_cir, c_tr, c_sw, c_id, c_em, c_co, c_rc, c_rp})
        sub->set_config("--config", "", "read options from an INI file (flags take precedence)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (c_gge->parsed()) return run_gen_gge(gge, config_line(*c_gge));
        if (c_lin->parsed()) return run_gen_lindblad(lin, config_line(*c_lin));
        if (c_cir->parsed()) return run_gen_circuit(cir, config_line(*c_cir));
        if (c_tr->parsed()) return run_train(tr, config_line(*c_tr));
        if (c_sw->parsed()) return run_sweep(sw, config_line(*c_sw));
        if (c_id->parsed()) return run_intrinsic_dim(id, config_line(*c_id));
        if (c_em->parsed()) return run_embed(em, config_line(*c_em));
        if (c_co->parsed()) return run_correlate(co, config_line(*c_co));
        if (c_rc->parsed()) return run_reconstruct(rc, config_line(*c_rc));
        if (c_rp->parsed()) return run_report(rp, config_line(*c_rp));
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
