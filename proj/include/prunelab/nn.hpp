#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "prunelab/data.hpp"

namespace prunelab {

enum class Activation { relu };

struct NetworkArch {
    int input_dim = 0;
    std::vector<int> hidden_dims;  // e.g. {256, 128} for an mlp-256-128
    int output_dim = 2;
    Activation activation = Activation::relu;

    void validate() const;
    int layer_count() const { return static_cast<int>(hidden_dims.size()) + 1; }
    /// (fan_in, fan_out) per layer, input to output.
    std::vector<std::pair<int, int>> layer_shapes() const;
    /// Total weight count across layers (biases excluded).
    long prunable_weight_count() const;
    std::string name() const;  // "mlp-256-128"
};

struct Layer {
    Eigen::MatrixXd weights;  // fan_out x fan_in
    Eigen::VectorXd bias;     // fan_out
    Eigen::MatrixXd mask;     // fan_out x fan_in, entries in {0,1}
};

// Effective weights are weights .* mask: a weight whose mask is 0 reads as 0
// in every forward pass and receives no optimizer update.
struct Network {
    NetworkArch arch;
    std::vector<Layer> layers;
    std::uint64_t init_seed = 0;

    long unmasked_weight_count() const;
    double weights_remaining_pct() const;
};

/// Full copy of weights and biases at training step `step` (masks excluded).
struct Checkpoint {
    long step = 0;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

struct TrainConfig {
    double learning_rate = 0.1;
    int batch_size = 128;
    int epochs = 20;
    long rewind_step = 0;  // SGD step at which the rewind checkpoint is captured
    std::uint64_t seed = 0;

    void validate() const;
    long steps_per_epoch(long n_train) const;
    long total_steps(long n_train) const;
};

/// Fresh dense network: weights uniform on (-1/sqrt(fan_in), 1/sqrt(fan_in)),
/// biases zero, masks all ones. Bit-identical for identical (arch, seed);
/// entries are drawn layer by layer, row-major within each layer.
Network init_network(const NetworkArch& arch, std::uint64_t seed);

/// Batch logits (n x output_dim) under the effective (masked) weights.
Eigen::MatrixXd forward(const Network& net, const RowMatrixXd& inputs);

struct LossGrad {
    double loss = 0.0;  // mean softmax cross-entropy over the batch
    std::vector<Eigen::MatrixXd> weight_grads;
    std::vector<Eigen::VectorXd> bias_grads;
};

/// Mean-batch loss and exact gradients. Gradients at masked-out weights are 0.
/// A non-finite loss (overflowed activations) is returned as-is; callers
/// treat it as divergence.
LossGrad loss_and_grad(const Network& net, const RowMatrixXd& inputs,
                       const std::vector<int>& labels);

struct TrainOutcome {
    Checkpoint checkpoint;                    // captured at cfg.rewind_step
    std::vector<double> test_accuracy_history;  // one entry per epoch
    bool diverged = false;
};

/// Plain mini-batch SGD at a fixed learning rate. Data is reshuffled each
/// epoch by a generator seeded from cfg.seed, so a run is fully determined by
/// (net, data, cfg). Training stops immediately when the loss goes non-finite.
TrainOutcome train(Network& net, const DataSplit& train_data, const DataSplit& test_data,
                   const TrainConfig& cfg);

/// Fraction of argmax-correct predictions; argmax ties resolve to the lower
/// class index.
double evaluate(const Network& net, const DataSplit& data);

/// Binary container with arch, init seed, and per-layer arrays (see README
/// for the exact byte layout; stable across versions).
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace prunelab
