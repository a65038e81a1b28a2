#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "prunelab/analyze.hpp"
#include "prunelab/dataset_io.hpp"
#include "prunelab/experiment.hpp"
#include "prunelab/fixtures.hpp"
#include "prunelab/runner.hpp"
#include "prunelab/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace prunelab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPartialFailure = 2;

int effective_workers(int requested) {
    int workers = requested;
    if (workers <= 0) {
        workers = static_cast<int>(std::thread::hardware_concurrency());
        if (workers < 1) workers = 1;
    }
    // PRUNELAB_WORKERS caps the pool regardless of the flag.
    if (const char* cap_env = std::getenv("PRUNELAB_WORKERS")) {
        const int cap = std::atoi(cap_env);
        if (cap >= 1) workers = std::min(workers, cap);
    }
    return workers;
}

TaskDatasetSpec dataset_spec_from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    const std::set<std::string> allowed = {"extrinsic_dim", "intrinsic_dim", "task_dim",
                                           "n_train",       "n_test",        "seed",
                                           "embedding"};
    for (const auto& [key, value] : j.items())
        if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "'");

    TaskDatasetSpec spec;
    auto need = [&](const char* key) {
        if (!j.contains(key)) throw ConfigError(std::string("missing required key '") + key + "'");
        return j.at(key);
    };
    spec.extrinsic_dim = need("extrinsic_dim").get<int>();
    spec.intrinsic_dim = need("intrinsic_dim").get<int>();
    spec.task_dim = need("task_dim").get<int>();
    if (j.contains("n_train")) spec.n_train = j.at("n_train").get<long>();
    if (j.contains("n_test")) spec.n_test = j.at("n_test").get<long>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("embedding")) {
        const auto e = j.at("embedding").get<std::string>();
        if (e == "linear")
            spec.embedding = Embedding::linear;
        else if (e == "nonlinear_manifold")
            spec.embedding = Embedding::nonlinear_manifold;
        else
            throw ConfigError("embedding: expected linear or nonlinear_manifold; got '" + e + "'");
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

int cmd_gen(const std::string& config_path, const std::string& out, bool csv,
            std::int64_t seed_override) {
    TaskDatasetSpec spec = dataset_spec_from_file(config_path);
    if (seed_override >= 0) spec.seed = static_cast<std::uint64_t>(seed_override);
    const Dataset ds = spec.embedding == Embedding::linear ? gen_linear_task_dataset(spec)
                                                           : gen_manifold_dataset(spec);
    save_dataset(ds, out);
    std::cout << "wrote " << out << " (" << spec.n_train << " train / " << spec.n_test
              << " test, D=" << spec.extrinsic_dim << ", d=" << spec.intrinsic_dim
              << ", t=" << spec.task_dim << ")\n";
    if (csv) {
        export_dataset_csv(ds, out + ".train.csv", out + ".test.csv");
        std::cout << "wrote " << out << ".train.csv and " << out << ".test.csv\n";
    }
    return kExitOk;
}

int cmd_run(const std::string& config_path, std::int64_t seed_override, int workers,
            const std::string& out_override) {
    ExperimentConfig cfg = load_config(config_path);
    if (seed_override >= 0) cfg.master_seed = static_cast<std::uint64_t>(seed_override);
    if (!out_override.empty()) cfg.output_dir = out_override;

    std::cout << "resolved config:\n" << config_to_json(cfg).dump(2) << "\n";
    const RunManifest manifest = run_experiment(cfg, effective_workers(workers));

    int executed = 0;
    for (const auto& t : manifest.trials) executed += t.executed ? 1 : 0;
    std::cout << "trials: " << manifest.trials.size() << " total, " << executed << " executed, "
              << manifest.n_failed() << " failed\n"
              << "outputs in " << cfg.output_dir << "\n";
    return manifest.n_failed() == 0 ? kExitOk : kExitPartialFailure;
}

int cmd_analyze(const std::string& target, std::int64_t seed_override, std::string out_dir,
                const McConfig& mc_base) {
    McConfig mc = mc_base;
    if (seed_override >= 0) mc.seed = static_cast<std::uint64_t>(seed_override);

    AnalysisResult analysis;
    const auto names = fixture_names();
    if (std::find(names.begin(), names.end(), target) != names.end()) {
        analysis = analyze_table(fixture_table(target), mc);
        if (out_dir.empty()) out_dir = "analysis-" + target;
    } else if (target.size() > 4 && target.substr(target.size() - 4) == ".csv") {
        analysis = analyze_table(load_group_table_csv(target), mc);
        if (out_dir.empty()) out_dir = "analysis";
    } else {
        analysis = analyze_run(target, mc);
        if (out_dir.empty()) out_dir = target + "/analysis";
        emit_plot_data(target);  // curve CSVs alongside the run
    }

    write_analysis(analysis, out_dir);
    std::cout << "rho_mean=" << analysis.report.rho_mean << " rho_std=" << analysis.report.rho_std
              << " (" << analysis.report.samples.size() << " rollouts)\n"
              << "analysis written to " << out_dir << "\n";
    return kExitOk;
}

int cmd_plotdata(const std::string& run_dir, const std::string& out_dir) {
    const auto written = emit_plot_data(run_dir, out_dir);
    for (const auto& path : written) std::cout << path << "\n";
    return kExitOk;
}

int cmd_fixtures(const std::string& out_dir) {
    for (const auto& name : fixture_names()) {
        if (out_dir.empty()) {
            std::cout << "# " << name << "\n";
            std::cout << "group_label,dimension,mean,std\n";
            for (const auto& row : fixture_table(name))
                std::cout << row.group_label << "," << row.dimension_value << "," << row.mean_pct
                          << "," << row.std_pct << "\n";
            std::cout << "\n";
        } else {
            fs::create_directories(out_dir);
            write_group_table_csv(fixture_table(name), out_dir + "/" + name + ".csv");
            std::cout << "wrote " << out_dir << "/" << name << ".csv\n";
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"prunelab: dimensionality vs. prunability experiments"};
    app.set_version_flag("--version", kArtifactVersion);
    app.require_subcommand(1);

    std::string config_path, out, target;
    std::int64_t seed = -1;
    int workers = 0;
    bool csv = false;
    McConfig mc;

    auto* gen = app.add_subcommand("gen", "generate a dataset file from a dataset spec");
    gen->add_option("--config", config_path, "dataset spec JSON")->required();
    gen->add_option("--out", out, "output dataset path")->required();
    gen->add_flag("--csv", csv, "also export train/test CSVs");
    gen->add_option("--seed", seed, "override the spec seed");

    auto* run = app.add_subcommand("run", "execute an experiment sweep");
    run->add_option("--config", config_path, "experiment config JSON")->required();
    run->add_option("--seed", seed, "override the master seed");
    run->add_option("--workers", workers, "worker pool size (default: hardware threads)");
    run->add_option("--out", out, "override the configured output_dir");

    auto* analyze =
        app.add_subcommand("analyze", "correlation report for a run, fixture, or table CSV");
    analyze->add_option("target", target, "run directory, fixture name, or .csv path")->required();
    analyze->add_option("--seed", seed, "Monte Carlo seed");
    analyze->add_option("--out", out, "analysis output directory");
    analyze->add_option("--rollouts", mc.n_rollouts, "rollouts (default 5000)");
    analyze->add_option("--outcomes", mc.n_outcomes, "outcomes per rollout (default 1000)");
    analyze->add_option("--seeds-per-group", mc.seeds_per_group,
                        "seed count behind each std column (default 3; runs use their own)");
    bool per_group = false;
    analyze->add_flag("--per-group", per_group, "independent rollouts per group, averaged");

    auto* plotdata = app.add_subcommand("plotdata", "emit accuracy-vs-weights-remaining curves");
    plotdata->add_option("target", target, "run directory")->required();
    plotdata->add_option("--out", out, "curve output directory (default <run>/curves)");

    auto* fixtures = app.add_subcommand("fixtures", "print or export the bundled tables");
    fixtures->add_option("--out", out, "write CSVs here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_gen(config_path, out, csv, seed);
        if (run->parsed()) return cmd_run(config_path, seed, workers, out);
        if (analyze->parsed()) {
            if (per_group) mc.pooling = McPooling::per_group;
            return cmd_analyze(target, seed, out, mc);
        }
        if (plotdata->parsed()) return cmd_plotdata(target, out);
        if (fixtures->parsed()) return cmd_fixtures(out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
