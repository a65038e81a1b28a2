#include "prunelab/runner.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "prunelab/common.hpp"
#include "prunelab/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace prunelab {

int RunManifest::n_failed() const {
    int n = 0;
    for (const auto& t : trials)
        if (t.status != "ok") ++n;
    return n;
}

std::uint64_t trial_seed_for(std::uint64_t master, int dimension, const std::string& arch,
                             int seed_index) {
    return mix_seed(master, static_cast<std::uint64_t>(dimension), fnv1a64(arch),
                    static_cast<std::uint64_t>(seed_index));
}

std::uint64_t dataset_seed_for(std::uint64_t master, int dimension, int seed_index) {
    return mix_seed(master, static_cast<std::uint64_t>(dimension),
                    static_cast<std::uint64_t>(seed_index), fnv1a64("data"));
}

namespace {

std::string trial_filename(SweepAxis axis, int dimension, const std::string& arch,
                           int seed_index) {
    return "trials/" + to_string(axis) + "-" + std::to_string(dimension) + "__" + arch + "__s" +
           std::to_string(seed_index) + ".json";
}

void write_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open for writing: " + tmp);
        os << text;
        if (!os) throw std::runtime_error("write failed: " + tmp);
    }
    fs::rename(tmp, path);
}

json trial_to_json(const TrialResult& trial, const TrialRef& ref, const TaskDatasetSpec& spec) {
    json levels = json::array();
    for (const auto& level : trial.levels)
        levels.push_back({{"weights_remaining_pct", level.weights_remaining_pct},
                          {"test_accuracy", level.test_accuracy}});
    return json{
        {"dimension", ref.dimension},
        {"arch", ref.arch},
        {"seed_index", ref.seed_index},
        {"trial_seed", ref.trial_seed},
        {"dataset_seed", ref.dataset_seed},
        {"dataset",
         {{"extrinsic_dim", spec.extrinsic_dim},
          {"intrinsic_dim", spec.intrinsic_dim},
          {"task_dim", spec.task_dim},
          {"n_train", spec.n_train},
          {"n_test", spec.n_test},
          {"embedding",
           spec.embedding == Embedding::linear ? "linear" : "nonlinear_manifold"}}},
        {"status", trial.status == TrialStatus::ok ? "ok" : "diverged"},
        {"dense_accuracy", trial.dense_accuracy},
        {"levels", levels},
    };
}

TrialResult trial_from_json(const json& j) {
    TrialResult trial;
    trial.seed = j.at("trial_seed").get<std::uint64_t>();
    trial.dense_accuracy = j.at("dense_accuracy").get<double>();
    trial.status = j.at("status").get<std::string>() == "ok" ? TrialStatus::ok
                                                             : TrialStatus::diverged;
    for (const auto& level : j.at("levels"))
        trial.levels.push_back({level.at("weights_remaining_pct").get<double>(),
                                level.at("test_accuracy").get<double>()});
    return trial;
}

Dataset generate_dataset(const TaskDatasetSpec& spec) {
    return spec.embedding == Embedding::linear ? gen_linear_task_dataset(spec)
                                               : gen_manifold_dataset(spec);
}

}  // namespace

void save_trial(const TrialResult& trial, const TrialRef& ref, const TaskDatasetSpec& spec,
                const std::string& path) {
    write_text_atomic(path, trial_to_json(trial, ref, spec).dump(2) + "\n");
}

TrialResult load_trial(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open trial file: " + path);
    json j;
    is >> j;
    return trial_from_json(j);
}

std::vector<GroupStat> prunability_table(const ExperimentConfig& cfg,
                                         const std::string& run_dir) {
    std::vector<GroupStat> table;
    for (const auto& arch : cfg.architectures) {
        const std::string name = arch.name();
        for (int dim : cfg.dimension_values) {
            std::vector<TrialResult> trials;
            for (int s = 0; s < cfg.n_seeds; ++s) {
                const std::string file =
                    run_dir + "/" + trial_filename(cfg.sweep_axis, dim, name, s);
                trials.push_back(load_trial(file));
            }
            PrunabilityResult agg = aggregate_prunability(trials);
            table.push_back({name, dim, agg.mean, agg.stddev});
        }
    }
    return table;
}

void write_group_table_csv(const std::vector<GroupStat>& table, const std::string& path) {
    std::ostringstream os;
    os << "group_label,dimension,mean,std\n";
    for (const auto& row : table)
        os << row.group_label << "," << row.dimension_value << "," << format_double(row.mean_pct)
           << "," << format_double(row.std_pct) << "\n";
    write_text_atomic(path, os.str());
}

std::vector<GroupStat> load_group_table_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open table: " + path);
    std::vector<GroupStat> table;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty table: " + path);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        GroupStat row;
        std::string field;
        if (!std::getline(ls, row.group_label, ',')) continue;
        if (!std::getline(ls, field, ',')) throw std::runtime_error("bad table row: " + line);
        row.dimension_value = std::stoi(field);
        if (!std::getline(ls, field, ',')) throw std::runtime_error("bad table row: " + line);
        row.mean_pct = std::stod(field);
        if (!std::getline(ls, field, ',')) throw std::runtime_error("bad table row: " + line);
        row.std_pct = std::stod(field);
        table.push_back(std::move(row));
    }
    return table;
}

RunManifest run_experiment(const ExperimentConfig& cfg, int workers) {
    cfg.validate();
    if (workers < 1) throw std::invalid_argument("run_experiment: workers must be >= 1");
    const auto t0 = std::chrono::steady_clock::now();

    fs::create_directories(cfg.output_dir);
    fs::create_directories(cfg.output_dir + "/trials");

    RunManifest manifest;
    manifest.artifact_version = kArtifactVersion;
    manifest.master_seed = cfg.master_seed;

    // Plan every trial; queue the ones without a readable result file.
    std::vector<std::size_t> queue;
    for (const auto& arch : cfg.architectures) {
        for (int dim : cfg.dimension_values) {
            for (int s = 0; s < cfg.n_seeds; ++s) {
                TrialRef ref;
                ref.dimension = dim;
                ref.arch = arch.name();
                ref.seed_index = s;
                ref.trial_seed = trial_seed_for(cfg.master_seed, dim, ref.arch, s);
                ref.dataset_seed = dataset_seed_for(cfg.master_seed, dim, s);
                ref.file = trial_filename(cfg.sweep_axis, dim, ref.arch, s);

                const std::string full = cfg.output_dir + "/" + ref.file;
                bool have = false;
                if (fs::exists(full)) {
                    try {
                        TrialResult existing = load_trial(full);
                        ref.status = existing.status == TrialStatus::ok ? "ok" : "diverged";
                        have = true;
                    } catch (const std::exception&) {
                        have = false;  // unreadable file: re-run the trial
                    }
                }
                if (!have) queue.push_back(manifest.trials.size());
                manifest.trials.push_back(std::move(ref));
            }
        }
    }

    std::mutex mu;
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t qi = next.fetch_add(1);
            if (qi >= queue.size()) return;
            TrialRef& ref = manifest.trials[queue[qi]];
            ref.executed = true;
            try {
                TaskDatasetSpec spec = cfg.dataset_spec_for(ref.dimension);
                spec.seed = ref.dataset_seed;
                const Dataset data = generate_dataset(spec);

                NetworkArch arch;
                arch.input_dim = spec.extrinsic_dim;
                for (const auto& a : cfg.architectures)
                    if (a.name() == ref.arch) arch.hidden_dims = a.hidden_dims;
                arch.output_dim = 2;

                ImpConfig imp = cfg.imp;
                imp.train.seed = ref.trial_seed;
                const TrialResult trial = imp_run(arch, data, imp);

                save_trial(trial, ref, spec, cfg.output_dir + "/" + ref.file);
                ref.status = trial.status == TrialStatus::ok ? "ok" : "diverged";
            } catch (const std::exception& e) {
                ref.status = std::string("error: ") + e.what();
                std::lock_guard<std::mutex> lock(mu);
                manifest.errors.push_back(ref.file + ": " + e.what());
            }
        }
    };

    const int n_threads = std::min<int>(workers, static_cast<int>(queue.size()));
    if (n_threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    manifest.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const bool executed_any = !queue.empty();
    const std::string manifest_path = cfg.output_dir + "/manifest.json";
    const std::string table_path = cfg.output_dir + "/prunability.csv";

    // A completed run is left untouched so re-runs change no bytes.
    if (executed_any || !fs::exists(manifest_path)) {
        if (manifest.errors.empty()) {
            try {
                write_group_table_csv(prunability_table(cfg, cfg.output_dir), table_path);
            } catch (const std::exception& e) {
                manifest.errors.push_back(std::string("prunability table: ") + e.what());
            }
        }

        json jtrials = json::array();
        for (const auto& t : manifest.trials)
            jtrials.push_back({{"dimension", t.dimension},
                               {"arch", t.arch},
                               {"seed_index", t.seed_index},
                               {"trial_seed", t.trial_seed},
                               {"dataset_seed", t.dataset_seed},
                               {"file", t.file},
                               {"status", t.status}});
        json jm{{"artifact_version", manifest.artifact_version},
                {"master_seed", manifest.master_seed},
                {"config", config_to_json(cfg)},
                {"trials", jtrials},
                {"errors", manifest.errors},
                {"elapsed_seconds", manifest.elapsed_seconds}};
        write_text_atomic(manifest_path, jm.dump(2) + "\n");
    }
    return manifest;
}

ExperimentConfig load_run_config(const std::string& run_dir) {
    std::ifstream is(run_dir + "/manifest.json");
    if (!is) throw std::runtime_error("no manifest.json in " + run_dir);
    json j;
    is >> j;
    return config_from_json(j.at("config"));
}

RunManifest load_manifest(const std::string& run_dir) {
    std::ifstream is(run_dir + "/manifest.json");
    if (!is) throw std::runtime_error("no manifest.json in " + run_dir);
    json j;
    is >> j;
    RunManifest manifest;
    manifest.artifact_version = j.at("artifact_version").get<std::string>();
    manifest.master_seed = j.at("master_seed").get<std::uint64_t>();
    manifest.elapsed_seconds = j.at("elapsed_seconds").get<double>();
    for (const auto& e : j.at("errors")) manifest.errors.push_back(e.get<std::string>());
    for (const auto& t : j.at("trials")) {
        TrialRef ref;
        ref.dimension = t.at("dimension").get<int>();
        ref.arch = t.at("arch").get<std::string>();
        ref.seed_index = t.at("seed_index").get<int>();
        ref.trial_seed = t.at("trial_seed").get<std::uint64_t>();
        ref.dataset_seed = t.at("dataset_seed").get<std::uint64_t>();
        ref.file = t.at("file").get<std::string>();
        ref.status = t.at("status").get<std::string>();
        manifest.trials.push_back(std::move(ref));
    }
    return manifest;
}

}  // namespace prunelab
