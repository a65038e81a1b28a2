#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prunelab/experiment.hpp"
#include "prunelab/pruning.hpp"
#include "prunelab/stats.hpp"

namespace prunelab {

/// One cell-slot of the sweep and where its result lives on disk.
struct TrialRef {
    int dimension = 0;
    std::string arch;
    int seed_index = 0;
    std::uint64_t trial_seed = 0;
    std::uint64_t dataset_seed = 0;
    std::string file;     // relative to the run directory
    std::string status;   // "ok", "diverged", or "error: ..."
    bool executed = false;  // ran in this invocation (vs. found on disk)
};

struct RunManifest {
    std::string artifact_version;
    std::uint64_t master_seed = 0;
    std::vector<TrialRef> trials;
    std::vector<std::string> errors;
    double elapsed_seconds = 0.0;  // of the invocation that last executed trials

    int n_failed() const;
};

/// Deterministic per-trial seeding (see common.hpp for the mixing scheme):
///   trial seed   = mix(master, dimension, fnv1a64(arch), seed_index)
///   dataset seed = mix(master, dimension, seed_index, fnv1a64("data"))
/// Datasets deliberately exclude the architecture so every architecture in a
/// cell trains on the same data.
std::uint64_t trial_seed_for(std::uint64_t master, int dimension, const std::string& arch,
                             int seed_index);
std::uint64_t dataset_seed_for(std::uint64_t master, int dimension, int seed_index);

/// Runs every missing trial of the sweep (a bounded worker pool, one trial
/// per task), persists one JSON document per trial, then writes the
/// per-cell prunability table and the manifest. Trials whose files already
/// parse are skipped, so re-runs are incremental and a completed run is a
/// byte-exact no-op.
RunManifest run_experiment(const ExperimentConfig& cfg, int workers = 1);

RunManifest load_manifest(const std::string& run_dir);

/// The resolved config recorded in a run's manifest.
ExperimentConfig load_run_config(const std::string& run_dir);

/// Trial document (de)serialization, one JSON file per trial.
void save_trial(const TrialResult& trial, const TrialRef& ref, const TaskDatasetSpec& spec,
                const std::string& path);
TrialResult load_trial(const std::string& path);

/// Per-cell prunability rows computed from a set of trial results.
std::vector<GroupStat> prunability_table(const ExperimentConfig& cfg,
                                         const std::string& run_dir);

void write_group_table_csv(const std::vector<GroupStat>& table, const std::string& path);
std::vector<GroupStat> load_group_table_csv(const std::string& path);

}  // namespace prunelab
