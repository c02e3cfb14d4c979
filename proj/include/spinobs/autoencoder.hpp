#pragma once

// Bottleneck feed-forward autoencoder with hand-rolled reverse-mode
// gradients and Adam, plus latent-width sweeps and checkpointing.
//
// Architecture: input -> encoder widths -> latent (N_L) -> decoder widths ->
// input, tanh on every hidden layer including the latent one, linear output
// by default.  Batches are stored row-wise (samples x features).

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "spinobs/dataset.hpp"

namespace spinobs {

struct NetworkConfig {
    int input_dim = 0;
    std::vector<int> encoder_widths{400, 400};
    int latent_dim = 1;
    std::vector<int> decoder_widths{400, 400};
    bool tanh_output = false;

    // All layer widths from input to output, encoder/latent/decoder inclusive.
    std::vector<int> layer_widths() const;
    int latent_layer() const;  // index into affine-layer outputs holding the latent
    void validate() const;
};

struct NetworkParams {
    std::vector<Eigen::MatrixXd> weights;  // weights[l]: (out x in) for affine layer l
    std::vector<Eigen::VectorXd> biases;
};

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

struct AdamState {
    double learning_rate = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long step = 0;
    std::vector<Eigen::MatrixXd> m_weights, v_weights;
    std::vector<Eigen::VectorXd> m_biases, v_biases;
};

struct TrainOptions {
    int batch_size = 128;
    long steps = 250000;
    long eval_every = 500;
    double learning_rate = 5e-4;
    std::uint64_t seed = 0;
};

struct TrainReport {
    std::vector<long> eval_steps;
    std::vector<double> train_curve;
    std::vector<double> test_curve;
    double best_test_loss = 0.0;
    long best_step = 0;
    NetworkParams best_params;
    long steps = 0;
    int batch_size = 0;
    std::uint64_t seed = 0;
};

// Uniform U[-1/sqrt(fan_in), 1/sqrt(fan_in)] weights, zero biases.
NetworkParams init_params(const NetworkConfig& config, std::uint64_t seed);
AdamState init_adam(const NetworkConfig& config);

void validate_params(const NetworkConfig& config, const NetworkParams& params);

// Batch forward pass; optionally reports the latent activations.
Eigen::MatrixXd forward_batch(const NetworkParams& params, const NetworkConfig& config,
                              const Eigen::MatrixXd& batch, Eigen::MatrixXd* latents = nullptr);

// Single-vector convenience wrapper: (reconstruction, latent).
std::pair<Eigen::VectorXd, Eigen::VectorXd> forward(const NetworkParams& params,
                                                    const NetworkConfig& config,
                                                    const Eigen::VectorXd& x);

// Mean over batch rows of the mean squared error over components.
double loss(const NetworkParams& params, const NetworkConfig& config, const Eigen::MatrixXd& batch);

// Exact gradient of loss() by reverse accumulation.
Gradients gradient(const NetworkParams& params, const NetworkConfig& config,
                   const Eigen::MatrixXd& batch);

void adam_update(NetworkParams& params, AdamState& state, const Gradients& grads);

// Shuffled mini-batch Adam with periodic full evaluations and best-test-loss
// early stopping.  latent_dim = 0 short-circuits to the exact mean baseline
// (the optimum of a constant predictor).  Deterministic under fixed seed.
TrainReport train(const Dataset& ds, const NetworkConfig& config, const TrainOptions& opt);

struct SweepEntry {
    int latent_dim = 0;
    double best_test_loss = 0.0;
    TrainReport report;
};

// One independent training per latent width; entries may run concurrently
// when jobs > 1 (results independent of the job count).
std::vector<SweepEntry> latent_sweep(const Dataset& ds, const std::vector<int>& latent_dims,
                                     NetworkConfig config, const TrainOptions& opt, int jobs = 1);

// Latent vector per dataset row, order-preserving.
Eigen::MatrixXd encode_dataset(const NetworkParams& params, const NetworkConfig& config,
                               const Dataset& ds);

// Versioned JSON checkpoint of config + parameters; value-exact round trip.
void save_network(const std::string& path, const NetworkConfig& config, const NetworkParams& params);
std::pair<NetworkConfig, NetworkParams> load_network(const std::string& path);

}  // namespace spinobs
