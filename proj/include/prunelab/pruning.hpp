#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "prunelab/datagen.hpp"
#include "prunelab/nn.hpp"

namespace prunelab {

enum class PruneScope { global, per_layer };

struct ImpConfig {
    double prune_fraction_per_iter = 0.2;
    int n_iterations = 25;
    PruneScope scope = PruneScope::global;
    TrainConfig train;
    bool prune_biases = false;  // bias pruning is not supported; must stay false

    void validate() const;
};

struct TrialLevel {
    double weights_remaining_pct = 0.0;
    double test_accuracy = 0.0;
};

enum class TrialStatus { ok, diverged };

/// One seed's pruning trajectory. levels[0] is the dense network at 100%.
struct TrialResult {
    std::uint64_t seed = 0;
    double dense_accuracy = 0.0;
    std::vector<TrialLevel> levels;
    TrialStatus status = TrialStatus::ok;
};

struct PrunabilityResult {
    std::vector<double> per_seed_min_matching_pct;
    double mean = 0.0;
    double stddev = 0.0;   // population std over the matching trials
    int n_unmatched = 0;   // ok trials with no matching pruned level
};

/// New masks with the smallest-magnitude surviving weights switched off so
/// that exactly floor((1 - fraction) * m) survive (m = current survivor
/// count; pooled for global scope, per layer otherwise). Magnitude ties break
/// by ascending (layer, row, column). Already-masked weights stay masked.
std::vector<Eigen::MatrixXd> magnitude_prune(const Network& net, double fraction,
                                             PruneScope scope);

/// Restores every surviving weight and every bias to its checkpoint value;
/// masked weights are set to exactly 0 and masks are left untouched.
void rewind(Network& net, const Checkpoint& ckpt);

/// Full iterate: dense training (capturing the rewind checkpoint), then
/// n_iterations rounds of prune -> rewind -> retrain with the same
/// TrainConfig. Divergence marks the trial and truncates its levels.
TrialResult imp_run(const NetworkArch& arch, const Dataset& data, const ImpConfig& cfg);

/// Smallest weights-remaining percentage among pruned levels whose test
/// accuracy is at least the trial's dense accuracy; empty when no pruned
/// level matches.
std::optional<double> min_matching_weights(const TrialResult& trial);

/// Mean and population std of per-seed minima; unmatched trials are counted
/// and excluded. Throws when no usable trial remains.
PrunabilityResult aggregate_prunability(const std::vector<TrialResult>& trials);

}  // namespace prunelab
