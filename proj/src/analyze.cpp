#include "prunelab/analyze.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "prunelab/common.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace prunelab {

namespace {

void require_complete(const std::string& run_dir, const RunManifest& manifest) {
    std::vector<std::string> missing;
    for (const auto& ref : manifest.trials)
        if (!fs::exists(run_dir + "/" + ref.file)) missing.push_back(ref.file);
    if (!missing.empty()) {
        std::string msg = "run is incomplete; missing trials:";
        for (const auto& m : missing) msg += "\n  " + m;
        throw std::runtime_error(msg);
    }
}

}  // namespace

AnalysisResult analyze_table(const std::vector<GroupStat>& table, const McConfig& mc) {
    AnalysisResult out;
    out.table = table;
    out.report = mc_correlation(table, mc);
    return out;
}

AnalysisResult analyze_run(const std::string& run_dir, McConfig mc) {
    const RunManifest manifest = load_manifest(run_dir);
    const ExperimentConfig cfg = load_run_config(run_dir);
    if (cfg.dimension_values.size() < 2)
        throw std::invalid_argument(
            "correlation needs at least 2 distinct dimension values; this run swept only " +
            std::to_string(cfg.dimension_values.front()));
    require_complete(run_dir, manifest);
    mc.seeds_per_group = cfg.n_seeds;
    return analyze_table(prunability_table(cfg, run_dir), mc);
}

void write_analysis(const AnalysisResult& analysis, const std::string& out_dir) {
    fs::create_directories(out_dir);

    json jreport{
        {"rho_mean", analysis.report.rho_mean},
        {"rho_std", analysis.report.rho_std},
        {"n_undefined", analysis.report.n_undefined},
        {"config",
         {{"n_outcomes", analysis.report.config.n_outcomes},
          {"n_rollouts", analysis.report.config.n_rollouts},
          {"seed", analysis.report.config.seed},
          {"seeds_per_group", analysis.report.config.seeds_per_group},
          {"pooling",
           analysis.report.config.pooling == McPooling::pooled ? "pooled" : "per_group"}}},
        {"samples", analysis.report.samples},
    };
    {
        std::ofstream os(out_dir + "/report.json");
        if (!os) throw std::runtime_error("cannot write " + out_dir + "/report.json");
        os << jreport.dump(2) << "\n";
    }

    const auto hist = emit_histogram(analysis.report, 40);
    {
        std::ofstream os(out_dir + "/histogram.csv");
        if (!os) throw std::runtime_error("cannot write " + out_dir + "/histogram.csv");
        os << "bin_center,count\n";
        for (const auto& bin : hist) os << format_double(bin.center) << "," << bin.count << "\n";
    }

    write_group_table_csv(analysis.table, out_dir + "/prunability.csv");
}

std::vector<std::string> emit_plot_data(const std::string& run_dir, const std::string& out_dir) {
    const RunManifest manifest = load_manifest(run_dir);
    const ExperimentConfig cfg = load_run_config(run_dir);
    require_complete(run_dir, manifest);

    const std::string dir = out_dir.empty() ? run_dir + "/curves" : out_dir;
    fs::create_directories(dir);

    std::vector<std::string> written;
    for (const auto& arch : cfg.architectures) {
        const std::string name = arch.name();
        for (int dim : cfg.dimension_values) {
            // Accuracies per weights-remaining level, pooled across seeds.
            std::map<double, std::vector<double>, std::greater<double>> by_pct;
            for (const auto& ref : manifest.trials) {
                if (ref.arch != name || ref.dimension != dim) continue;
                const TrialResult trial = load_trial(run_dir + "/" + ref.file);
                for (const auto& level : trial.levels)
                    by_pct[level.weights_remaining_pct].push_back(level.test_accuracy);
            }

            const std::string path = dir + "/" + name + "__" + to_string(cfg.sweep_axis) + "-" +
                                     std::to_string(dim) + ".csv";
            std::ostringstream os;
            os << "weights_remaining_pct,mean_test_accuracy,std_test_accuracy\n";
            for (const auto& [pct, accs] : by_pct) {
                double mean = 0.0;
                for (double a : accs) mean += a;
                mean /= static_cast<double>(accs.size());
                double var = 0.0;
                for (double a : accs) var += (a - mean) * (a - mean);
                var /= static_cast<double>(accs.size());
                os << format_double(pct) << "," << format_double(mean) << ","
                   << format_double(std::sqrt(var)) << "\n";
            }
            std::ofstream file(path);
            if (!file) throw std::runtime_error("cannot write " + path);
            file << os.str();
            written.push_back(path);
        }
    }
    return written;
}

}  // namespace prunelab
