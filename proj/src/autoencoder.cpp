#include "spinobs/autoencoder.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "spinobs/errors.hpp"

namespace spinobs {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Vectorized tanh via exp (Eigen's packet exp); numerically stable through
// the sign-symmetric form tanh(x) = sign(x) (1 - e^{-2|x|}) / (1 + e^{-2|x|}).
void tanh_inplace(MatrixXd& z) {
    auto a = z.array();
    const Eigen::ArrayXXd e = (-2.0 * a.abs()).exp();
    z = (a.sign() * (1.0 - e) / (1.0 + e)).matrix();
}

struct ForwardCache {
    std::vector<MatrixXd> a;  // a[0] = input batch, a[l] = output of affine layer l
};

void forward_into(const NetworkParams& params, const NetworkConfig& config, const MatrixXd& batch,
                  ForwardCache& cache) {
    const std::size_t n_affine = params.weights.size();
    cache.a.resize(n_affine + 1);
    cache.a[0] = batch;
    for (std::size_t l = 1; l <= n_affine; ++l) {
        cache.a[l].noalias() = cache.a[l - 1] * params.weights[l - 1].transpose();
        cache.a[l].rowwise() += params.biases[l - 1].transpose();
        if (l < n_affine || config.tanh_output) tanh_inplace(cache.a[l]);
    }
}

void accumulate_gradient(const NetworkParams& params, const NetworkConfig& config,
                         const ForwardCache& cache, Gradients& grads) {
    const std::size_t n_affine = params.weights.size();
    const MatrixXd& x = cache.a[0];
    const double scale = 2.0 / (static_cast<double>(x.rows()) * static_cast<double>(x.cols()));
    MatrixXd delta = scale * (cache.a[n_affine] - x);
    if (config.tanh_output) delta.array() *= 1.0 - cache.a[n_affine].array().square();
    for (std::size_t l = n_affine; l >= 1; --l) {
        grads.weights[l - 1].noalias() = delta.transpose() * cache.a[l - 1];
        grads.biases[l - 1] = delta.colwise().sum().transpose();
        if (l > 1) {
            MatrixXd next = delta * params.weights[l - 1];
            next.array() *= 1.0 - cache.a[l - 1].array().square();
            delta.swap(next);
        }
    }
}

double loss_from_output(const MatrixXd& out, const MatrixXd& batch) {
    return (out - batch).squaredNorm() /
           (static_cast<double>(batch.rows()) * static_cast<double>(batch.cols()));
}

double clamped_atanh(double x) {
    const double c = std::clamp(x, -1.0 + 1e-12, 1.0 - 1e-12);
    return std::atanh(c);
}

}  // namespace

std::vector<int> NetworkConfig::layer_widths() const {
    std::vector<int> w;
    w.push_back(input_dim);
    w.insert(w.end(), encoder_widths.begin(), encoder_widths.end());
    w.push_back(latent_dim);
    w.insert(w.end(), decoder_widths.begin(), decoder_widths.end());
    w.push_back(input_dim);
    return w;
}

int NetworkConfig::latent_layer() const { return static_cast<int>(encoder_widths.size()) + 1; }

void NetworkConfig::validate() const {
    if (input_dim < 1) throw std::invalid_argument("network input dimension must be positive");
    if (latent_dim < 0) throw std::invalid_argument("latent dimension must be non-negative");
    if (latent_dim > input_dim)
        throw std::invalid_argument("latent dimension must not exceed the input dimension");
    for (int w : encoder_widths)
        if (w < 1) throw std::invalid_argument("encoder widths must be positive");
    for (int w : decoder_widths)
        if (w < 1) throw std::invalid_argument("decoder widths must be positive");
}

NetworkParams init_params(const NetworkConfig& config, std::uint64_t seed) {
    config.validate();
    const auto widths = config.layer_widths();
    std::mt19937_64 rng(seed);
    NetworkParams p;
    for (std::size_t l = 1; l < widths.size(); ++l) {
        const int fan_in = widths[l - 1];
        const int fan_out = widths[l];
        const double bound = fan_in > 0 ? 1.0 / std::sqrt(static_cast<double>(fan_in)) : 0.0;
        std::uniform_real_distribution<double> unif(-bound, bound);
        MatrixXd w(fan_out, fan_in);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = unif(rng);
        p.weights.push_back(std::move(w));
        p.biases.push_back(VectorXd::Zero(fan_out));
    }
    return p;
}

AdamState init_adam(const NetworkConfig& config) {
    const auto widths = config.layer_widths();
    AdamState s;
    for (std::size_t l = 1; l < widths.size(); ++l) {
        s.m_weights.push_back(MatrixXd::Zero(widths[l], widths[l - 1]));
        s.v_weights.push_back(MatrixXd::Zero(widths[l], widths[l - 1]));
        s.m_biases.push_back(VectorXd::Zero(widths[l]));
        s.v_biases.push_back(VectorXd::Zero(widths[l]));
    }
    return s;
}

void validate_params(const NetworkConfig& config, const NetworkParams& params) {
    const auto widths = config.layer_widths();
    if (params.weights.size() != widths.size() - 1 || params.biases.size() != widths.size() - 1)
        throw std::invalid_argument("parameter layer count does not match the configuration");
    for (std::size_t l = 1; l < widths.size(); ++l) {
        if (params.weights[l - 1].rows() != widths[l] || params.weights[l - 1].cols() != widths[l - 1] ||
            params.biases[l - 1].size() != widths[l])
            throw std::invalid_argument("parameter shapes do not match the configuration");
        if (!params.weights[l - 1].allFinite() || !params.biases[l - 1].allFinite())
            throw std::invalid_argument("parameters must be finite");
    }
}

Eigen::MatrixXd forward_batch(const NetworkParams& params, const NetworkConfig& config,
                              const MatrixXd& batch, MatrixXd* latents) {
    validate_params(config, params);
    if (batch.cols() != config.input_dim)
        throw std::invalid_argument("batch width does not match the network input dimension");
    ForwardCache cache;
    forward_into(params, config, batch, cache);
    if (latents) *latents = cache.a[static_cast<std::size_t>(config.latent_layer())];
    return cache.a.back();
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> forward(const NetworkParams& params,
                                                    const NetworkConfig& config,
                                                    const Eigen::VectorXd& x) {
    MatrixXd latents;
    const MatrixXd out = forward_batch(params, config, x.transpose(), &latents);
    return {out.row(0).transpose(), latents.row(0).transpose()};
}

double loss(const NetworkParams& params, const NetworkConfig& config, const MatrixXd& batch) {
    if (batch.rows() == 0) throw std::invalid_argument("loss of an empty batch");
    return loss_from_output(forward_batch(params, config, batch), batch);
}

Gradients gradient(const NetworkParams& params, const NetworkConfig& config, const MatrixXd& batch) {
    validate_params(config, params);
    if (batch.rows() == 0) throw std::invalid_argument("gradient of an empty batch");
    if (batch.cols() != config.input_dim)
        throw std::invalid_argument("batch width does not match the network input dimension");
    ForwardCache cache;
    forward_into(params, config, batch, cache);
    Gradients g;
    g.weights.resize(params.weights.size());
    g.biases.resize(params.biases.size());
    accumulate_gradient(params, config, cache, g);
    return g;
}

void adam_update(NetworkParams& params, AdamState& state, const Gradients& grads) {
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        auto update = [&](auto& theta, auto& m, auto& v, const auto& g) {
            m = state.beta1 * m + (1.0 - state.beta1) * g;
            v.array() = state.beta2 * v.array() + (1.0 - state.beta2) * g.array().square();
            theta.array() -=
                state.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + state.epsilon);
        };
        update(params.weights[l], state.m_weights[l], state.v_weights[l], grads.weights[l]);
        update(params.biases[l], state.m_biases[l], state.v_biases[l], grads.biases[l]);
    }
}

TrainReport train(const Dataset& ds, const NetworkConfig& config, const TrainOptions& opt) {
    config.validate();
    if (!ds.has_split()) throw std::invalid_argument("training requires a dataset split");
    if (ds.dim() != config.input_dim)
        throw std::invalid_argument("dataset width does not match the network input dimension");
    if (opt.steps < 1) throw std::invalid_argument("step count must be positive");
    if (opt.batch_size < 1) throw std::invalid_argument("batch size must be positive");
    if (opt.eval_every < 1) throw std::invalid_argument("evaluation interval must be positive");

    const MatrixXd x_train = ds.train_matrix();
    const MatrixXd x_test = ds.test_matrix();
    if (x_train.rows() == 0 || x_test.rows() == 0)
        throw std::invalid_argument("training requires non-empty train and test sides");

    TrainReport report;
    report.steps = opt.steps;
    report.batch_size = opt.batch_size;
    report.seed = opt.seed;

    if (config.latent_dim == 0) {
        // A zero-width bottleneck can only represent a constant; the optimal
        // constant for the mean-squared loss is the training mean, so solve
        // in closed form instead of iterating.
        const Eigen::RowVectorXd mu = x_train.colwise().mean();
        NetworkParams params = init_params(config, opt.seed);
        for (auto& w : params.weights) w.setZero();
        for (auto& b : params.biases) b.setZero();
        VectorXd out_bias = mu.transpose();
        if (config.tanh_output)
            for (Eigen::Index i = 0; i < out_bias.size(); ++i) out_bias(i) = clamped_atanh(out_bias(i));
        params.biases.back() = out_bias;
        const double train_loss = loss_from_output(mu.replicate(x_train.rows(), 1), x_train);
        const double test_loss = loss_from_output(mu.replicate(x_test.rows(), 1), x_test);
        report.eval_steps = {0};
        report.train_curve = {train_loss};
        report.test_curve = {test_loss};
        report.best_test_loss = test_loss;
        report.best_step = 0;
        report.best_params = std::move(params);
        return report;
    }

    std::mt19937_64 rng(opt.seed);
    NetworkParams params = init_params(config, opt.seed ^ 0x9e3779b97f4a7c15ULL);
    AdamState adam = init_adam(config);
    adam.learning_rate = opt.learning_rate;

    const int n_train = static_cast<int>(x_train.rows());
    const int batch = std::min(opt.batch_size, n_train);
    std::vector<int> perm(static_cast<std::size_t>(n_train));
    std::iota(perm.begin(), perm.end(), 0);
    int pos = n_train;  // force an initial shuffle

    MatrixXd x_batch(batch, x_train.cols());
    ForwardCache cache;
    Gradients grads;
    grads.weights.resize(params.weights.size());
    grads.biases.resize(params.biases.size());

    report.best_test_loss = std::numeric_limits<double>::infinity();
    for (long step = 1; step <= opt.steps; ++step) {
        if (pos + batch > n_train) {
            std::shuffle(perm.begin(), perm.end(), rng);
            pos = 0;
        }
        for (int i = 0; i < batch; ++i)
            x_batch.row(i) = x_train.row(perm[static_cast<std::size_t>(pos + i)]);
        pos += batch;

        forward_into(params, config, x_batch, cache);
        accumulate_gradient(params, config, cache, grads);
        adam_update(params, adam, grads);

        if (step % opt.eval_every == 0 || step == opt.steps) {
            if (step == opt.steps && !report.eval_steps.empty() && report.eval_steps.back() == step)
                break;
            // Evaluate through the internal path: diverged (non-finite)
            // parameters must surface as a non-finite loss, not a shape check.
            ForwardCache eval_cache;
            forward_into(params, config, x_train, eval_cache);
            const double train_loss = loss_from_output(eval_cache.a.back(), x_train);
            forward_into(params, config, x_test, eval_cache);
            const double test_loss = loss_from_output(eval_cache.a.back(), x_test);
            if (!std::isfinite(train_loss) || !std::isfinite(test_loss))
                throw training_error("training diverged at step " + std::to_string(step));
            report.eval_steps.push_back(step);
            report.train_curve.push_back(train_loss);
            report.test_curve.push_back(test_loss);
            if (test_loss < report.best_test_loss) {
                report.best_test_loss = test_loss;
                report.best_step = step;
                report.best_params = params;
            }
        }
    }
    return report;
}

std::vector<SweepEntry> latent_sweep(const Dataset& ds, const std::vector<int>& latent_dims,
                                     NetworkConfig config, const TrainOptions& opt, int jobs) {
    if (latent_dims.empty()) throw std::invalid_argument("latent sweep needs at least one width");
    std::vector<SweepEntry> entries(latent_dims.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= latent_dims.size()) return;
            NetworkConfig cfg = config;
            cfg.latent_dim = latent_dims[i];
            SweepEntry e;
            e.latent_dim = latent_dims[i];
            e.report = train(ds, cfg, opt);
            e.best_test_loss = e.report.best_test_loss;
            entries[i] = std::move(e);
        }
    };
    const int n_jobs = std::max(1, std::min<int>(jobs, static_cast<int>(latent_dims.size())));
    if (n_jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return entries;
}

Eigen::MatrixXd encode_dataset(const NetworkParams& params, const NetworkConfig& config,
                               const Dataset& ds) {
    MatrixXd latents;
    forward_batch(params, config, ds.rows, &latents);
    return latents;
}

void save_network(const std::string& path, const NetworkConfig& config, const NetworkParams& params) {
    validate_params(config, params);
    nlohmann::json j;
    j["version"] = 1;
    j["config"] = {{"input_dim", config.input_dim},
                   {"encoder_widths", config.encoder_widths},
                   {"latent_dim", config.latent_dim},
                   {"decoder_widths", config.decoder_widths},
                   {"tanh_output", config.tanh_output}};
    j["weights"] = nlohmann::json::array();
    j["biases"] = nlohmann::json::array();
    for (const auto& w : params.weights) {
        nlohmann::json flat = nlohmann::json::array();
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index k = 0; k < w.cols(); ++k) flat.push_back(w(i, k));
        j["weights"].push_back(std::move(flat));
    }
    for (const auto& b : params.biases) {
        nlohmann::json flat = nlohmann::json::array();
        for (Eigen::Index i = 0; i < b.size(); ++i) flat.push_back(b(i));
        j["biases"].push_back(std::move(flat));
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << j.dump() << '\n';
}

std::pair<NetworkConfig, NetworkParams> load_network(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + ": " + std::string(e.what()));
    }
    if (j.value("version", 0) != 1) throw std::runtime_error(path + ": unsupported checkpoint version");
    NetworkConfig config;
    const auto& c = j.at("config");
    config.input_dim = c.at("input_dim").get<int>();
    config.encoder_widths = c.at("encoder_widths").get<std::vector<int>>();
    config.latent_dim = c.at("latent_dim").get<int>();
    config.decoder_widths = c.at("decoder_widths").get<std::vector<int>>();
    config.tanh_output = c.at("tanh_output").get<bool>();

    const auto widths = config.layer_widths();
    NetworkParams params;
    const auto& jw = j.at("weights");
    const auto& jb = j.at("biases");
    if (jw.size() != widths.size() - 1 || jb.size() != widths.size() - 1)
        throw std::runtime_error(path + ": layer count does not match the stored configuration");
    for (std::size_t l = 1; l < widths.size(); ++l) {
        const auto& wf = jw[l - 1];
        if (wf.size() != static_cast<std::size_t>(widths[l]) * static_cast<std::size_t>(widths[l - 1]))
            throw std::runtime_error(path + ": weight size mismatch in layer " + std::to_string(l));
        MatrixXd w(widths[l], widths[l - 1]);
        std::size_t k = 0;
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index c2 = 0; c2 < w.cols(); ++c2) w(i, c2) = wf[k++].get<double>();
        const auto& bf = jb[l - 1];
        if (bf.size() != static_cast<std::size_t>(widths[l]))
            throw std::runtime_error(path + ": bias size mismatch in layer " + std::to_string(l));
        VectorXd b(widths[l]);
        for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = bf[static_cast<std::size_t>(i)].get<double>();
        params.weights.push_back(std::move(w));
        params.biases.push_back(std::move(b));
    }
    validate_params(config, params);
    return {config, params};
}

}  // namespace spinobs
