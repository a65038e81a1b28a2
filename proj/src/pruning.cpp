#include "prunelab/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "prunelab/common.hpp"

namespace prunelab {

void ImpConfig::validate() const {
    if (prune_fraction_per_iter <= 0.0 || prune_fraction_per_iter >= 1.0)
        throw std::invalid_argument("ImpConfig: prune_fraction_per_iter must be in (0, 1)");
    if (n_iterations < 0) throw std::invalid_argument("ImpConfig: n_iterations must be >= 0");
    if (prune_biases)
        throw std::invalid_argument("ImpConfig: bias pruning is not supported");
    train.validate();
}

namespace {

struct WeightRef {
    double magnitude;
    int layer;
    int row;
    int col;

    bool operator<(const WeightRef& other) const {
        return std::tie(magnitude, layer, row, col) <
               std::tie(other.magnitude, other.layer, other.row, other.col);
    }
};

long survivors_after(long m, double fraction) {
    return static_cast<long>(std::floor((1.0 - fraction) * static_cast<double>(m)));
}

void prune_pool(std::vector<WeightRef>& pool, long n_prune,
                std::vector<Eigen::MatrixXd>& masks) {
    if (n_prune <= 0) return;
    std::nth_element(pool.begin(), pool.begin() + (n_prune - 1), pool.end());
    std::sort(pool.begin(), pool.begin() + n_prune);  // deterministic prune set under ties
    for (long i = 0; i < n_prune; ++i) {
        const WeightRef& w = pool[static_cast<std::size_t>(i)];
        masks[static_cast<std::size_t>(w.layer)](w.row, w.col) = 0.0;
    }
}

}  // namespace

std::vector<Eigen::MatrixXd> magnitude_prune(const Network& net, double fraction,
                                             PruneScope scope) {
    if (fraction <= 0.0 || fraction >= 1.0)
        throw std::invalid_argument("magnitude_prune: fraction must be in (0, 1)");

    std::vector<Eigen::MatrixXd> masks;
    masks.reserve(net.layers.size());
    for (const auto& layer : net.layers) masks.push_back(layer.mask);

    auto collect = [&](int layer_idx) {
        std::vector<WeightRef> pool;
        const Layer& layer = net.layers[static_cast<std::size_t>(layer_idx)];
        for (int r = 0; r < layer.weights.rows(); ++r)
            for (int c = 0; c < layer.weights.cols(); ++c)
                if (layer.mask(r, c) != 0.0)
                    pool.push_back({std::abs(layer.weights(r, c)), layer_idx, r, c});
        return pool;
    };

    if (scope == PruneScope::global) {
        std::vector<WeightRef> pool;
        for (int l = 0; l < static_cast<int>(net.layers.size()); ++l) {
            auto layer_pool = collect(l);
            pool.insert(pool.end(), layer_pool.begin(), layer_pool.end());
        }
        const long m = static_cast<long>(pool.size());
        const long n_prune = m - survivors_after(m, fraction);
        if (n_prune >= m)
            throw std::runtime_error("magnitude_prune: pruning would remove every weight");
        prune_pool(pool, n_prune, masks);
    } else {
        for (int l = 0; l < static_cast<int>(net.layers.size()); ++l) {
            auto pool = collect(l);
            const long m = static_cast<long>(pool.size());
            const long n_prune = m - survivors_after(m, fraction);
            if (m > 0 && n_prune >= m)
                throw std::runtime_error("magnitude_prune: layer " + std::to_string(l) +
                                         " would be emptied");
            prune_pool(pool, n_prune, masks);
        }
    }
    return masks;
}

void rewind(Network& net, const Checkpoint& ckpt) {
    if (ckpt.weights.size() != net.layers.size())
        throw std::invalid_argument("rewind: layer count mismatch");
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        Layer& layer = net.layers[l];
        if (ckpt.weights[l].rows() != layer.weights.rows() ||
            ckpt.weights[l].cols() != layer.weights.cols() ||
            ckpt.biases[l].size() != layer.bias.size())
            throw std::invalid_argument("rewind: shape mismatch at layer " + std::to_string(l));
        layer.weights = ckpt.weights[l].cwiseProduct(layer.mask);
        layer.bias = ckpt.biases[l];
    }
}

TrialResult imp_run(const NetworkArch& arch, const Dataset& data, const ImpConfig& cfg) {
    cfg.validate();
    arch.validate();

    TrialResult trial;
    trial.seed = cfg.train.seed;

    Network net = init_network(arch, mix_seed(cfg.train.seed, fnv1a64("init")));

    // Level 0: dense training; its checkpoint is the rewind point for every
    // later level.
    TrainOutcome dense = train(net, data.train, data.test, cfg.train);
    if (dense.diverged) {
        trial.status = TrialStatus::diverged;
        return trial;
    }
    const Checkpoint rewind_point = dense.checkpoint;
    trial.dense_accuracy = evaluate(net, data.test);
    trial.levels.push_back({net.weights_remaining_pct(), trial.dense_accuracy});

    for (int k = 1; k <= cfg.n_iterations; ++k) {
        auto masks = magnitude_prune(net, cfg.prune_fraction_per_iter, cfg.scope);
        for (std::size_t l = 0; l < net.layers.size(); ++l) net.layers[l].mask = std::move(masks[l]);
        rewind(net, rewind_point);

        TrainOutcome outcome = train(net, data.train, data.test, cfg.train);
        if (outcome.diverged) {
            trial.status = TrialStatus::diverged;
            return trial;
        }
        trial.levels.push_back({net.weights_remaining_pct(), evaluate(net, data.test)});
    }
    return trial;
}

std::optional<double> min_matching_weights(const TrialResult& trial) {
    if (trial.status != TrialStatus::ok)
        throw std::invalid_argument("min_matching_weights: trial did not complete");
    std::optional<double> best;
    for (std::size_t i = 1; i < trial.levels.size(); ++i) {
        const TrialLevel& level = trial.levels[i];
        if (level.test_accuracy >= trial.dense_accuracy &&
            (!best || level.weights_remaining_pct < *best))
            best = level.weights_remaining_pct;
    }
    return best;
}

PrunabilityResult aggregate_prunability(const std::vector<TrialResult>& trials) {
    PrunabilityResult result;
    for (const auto& trial : trials) {
        if (trial.status != TrialStatus::ok) continue;
        if (auto pct = min_matching_weights(trial))
            result.per_seed_min_matching_pct.push_back(*pct);
        else
            ++result.n_unmatched;
    }
    if (result.per_seed_min_matching_pct.empty())
        throw std::runtime_error("aggregate_prunability: no trial produced a matching level");

    const auto& xs = result.per_seed_min_matching_pct;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());
    result.mean = mean;
    result.stddev = std::sqrt(var);
    return result;
}

}  // namespace prunelab
