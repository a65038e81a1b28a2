#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "prunelab/datagen.hpp"
#include "prunelab/nn.hpp"
#include "prunelab/pruning.hpp"

namespace prunelab {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class SweepAxis { extrinsic, intrinsic, task };

std::string to_string(SweepAxis axis);

struct DataTemplate {
    long n_train = 50000;
    long n_test = 10000;
    Embedding embedding = Embedding::linear;
};

/// A declarative sweep: one dimensionality axis varied, the other two fixed,
/// crossed with architectures and seed indices.
struct ExperimentConfig {
    SweepAxis sweep_axis = SweepAxis::task;
    std::vector<int> dimension_values;  // ascending
    int fixed_extrinsic = 0;            // unused when extrinsic is swept
    int fixed_intrinsic = 0;            // unused when intrinsic is swept
    int fixed_task = 0;                 // unused when task is swept
    std::vector<NetworkArch> architectures;  // input_dim resolved per cell
    int n_seeds = 3;
    std::uint64_t master_seed = 0;
    ImpConfig imp;
    DataTemplate data;
    std::string output_dir;

    /// (D, d, t) for one value of the swept axis.
    TaskDatasetSpec dataset_spec_for(int dimension_value) const;
    void validate() const;
};

/// Parses and validates a JSON experiment config. Unknown keys are rejected;
/// every constraint violation names the offending key. An absent
/// imp.train.rewind_step resolves to one epoch of steps.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Fully resolved echo of the config (all defaults filled in).
nlohmann::json config_to_json(const ExperimentConfig& cfg);

}  // namespace prunelab
