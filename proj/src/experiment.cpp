#include "prunelab/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace prunelab {

using nlohmann::json;

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::extrinsic: return "extrinsic";
        case SweepAxis::intrinsic: return "intrinsic";
        case SweepAxis::task: return "task";
    }
    return "?";
}

TaskDatasetSpec ExperimentConfig::dataset_spec_for(int dimension_value) const {
    TaskDatasetSpec spec;
    spec.extrinsic_dim = sweep_axis == SweepAxis::extrinsic ? dimension_value : fixed_extrinsic;
    spec.intrinsic_dim = sweep_axis == SweepAxis::intrinsic ? dimension_value : fixed_intrinsic;
    spec.task_dim = sweep_axis == SweepAxis::task ? dimension_value : fixed_task;
    spec.n_train = data.n_train;
    spec.n_test = data.n_test;
    spec.embedding = data.embedding;
    return spec;
}

void ExperimentConfig::validate() const {
    if (dimension_values.empty()) throw ConfigError("dimension_values: must be non-empty");
    if (!std::is_sorted(dimension_values.begin(), dimension_values.end()))
        throw ConfigError("dimension_values: must be sorted ascending");
    for (int v : dimension_values)
        if (v < 1) throw ConfigError("dimension_values: entries must be >= 1");
    if (std::set<int>(dimension_values.begin(), dimension_values.end()).size() !=
        dimension_values.size())
        throw ConfigError("dimension_values: entries must be distinct");
    if (architectures.empty()) throw ConfigError("architectures: must be non-empty");
    for (const auto& arch : architectures)
        if (arch.hidden_dims.empty())
            throw ConfigError("architectures: hidden_dims must be non-empty");
    if (n_seeds < 1) throw ConfigError("n_seeds: must be >= 1");
    if (output_dir.empty()) throw ConfigError("output_dir: must be set");

    try {
        imp.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("imp: ") + e.what());
    }
    for (int v : dimension_values) {
        TaskDatasetSpec spec = dataset_spec_for(v);
        try {
            spec.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("dimension_values: value " + std::to_string(v) +
                              " violates a dimension constraint: " + e.what());
        }
    }
    const long total_steps = imp.train.total_steps(data.n_train);
    if (imp.train.rewind_step >= total_steps)
        throw ConfigError("imp.train.rewind_step: must be less than total training steps (" +
                          std::to_string(total_steps) + ")");
}

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& scope) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.contains(key))
            throw ConfigError("unknown key '" + (scope.empty() ? key : scope + "." + key) + "'");
}

template <typename T>
T get_or(const json& obj, const std::string& key, const std::string& scope, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("key '" + (scope.empty() ? key : scope + "." + key) +
                          "' has the wrong type");
    }
}

template <typename T>
T require(const json& obj, const std::string& key, const std::string& scope) {
    if (!obj.contains(key))
        throw ConfigError("missing required key '" + (scope.empty() ? key : scope + "." + key) +
                          "'");
    return get_or<T>(obj, key, scope, T{});
}

SweepAxis parse_axis(const std::string& s) {
    if (s == "extrinsic") return SweepAxis::extrinsic;
    if (s == "intrinsic") return SweepAxis::intrinsic;
    if (s == "task") return SweepAxis::task;
    throw ConfigError("sweep_axis: expected extrinsic, intrinsic, or task; got '" + s + "'");
}

Embedding parse_embedding(const std::string& s) {
    if (s == "linear") return Embedding::linear;
    if (s == "nonlinear_manifold") return Embedding::nonlinear_manifold;
    throw ConfigError("data.embedding: expected linear or nonlinear_manifold; got '" + s + "'");
}

PruneScope parse_scope(const std::string& s) {
    if (s == "global") return PruneScope::global;
    if (s == "per_layer") return PruneScope::per_layer;
    throw ConfigError("imp.scope: expected global or per_layer; got '" + s + "'");
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    reject_unknown_keys(j,
                        {"sweep_axis", "dimension_values", "fixed_dims", "architectures",
                         "n_seeds", "seed", "imp", "data", "output_dir"},
                        "");

    ExperimentConfig cfg;
    cfg.sweep_axis = parse_axis(require<std::string>(j, "sweep_axis", ""));
    cfg.dimension_values = require<std::vector<int>>(j, "dimension_values", "");
    cfg.n_seeds = get_or(j, "n_seeds", "", 3);
    cfg.master_seed = get_or<std::uint64_t>(j, "seed", "", 0);
    cfg.output_dir = require<std::string>(j, "output_dir", "");

    const json fixed = require<json>(j, "fixed_dims", "");
    if (!fixed.is_object()) throw ConfigError("fixed_dims: must be an object");
    std::set<std::string> expected;
    for (const char* axis : {"extrinsic", "intrinsic", "task"})
        if (axis != to_string(cfg.sweep_axis)) expected.insert(axis);
    reject_unknown_keys(fixed, expected, "fixed_dims");
    for (const auto& key : expected)
        if (!fixed.contains(key))
            throw ConfigError("fixed_dims: missing '" + key + "' (the non-swept axes must be fixed)");
    cfg.fixed_extrinsic = get_or(fixed, "extrinsic", "fixed_dims", 0);
    cfg.fixed_intrinsic = get_or(fixed, "intrinsic", "fixed_dims", 0);
    cfg.fixed_task = get_or(fixed, "task", "fixed_dims", 0);

    const json archs = require<json>(j, "architectures", "");
    if (!archs.is_array()) throw ConfigError("architectures: must be an array");
    for (const auto& a : archs) {
        if (!a.is_object()) throw ConfigError("architectures: entries must be objects");
        reject_unknown_keys(a, {"hidden_dims"}, "architectures[]");
        NetworkArch arch;
        arch.hidden_dims = require<std::vector<int>>(a, "hidden_dims", "architectures[]");
        arch.output_dim = 2;
        cfg.architectures.push_back(std::move(arch));
    }

    if (j.contains("data")) {
        const json& d = j.at("data");
        reject_unknown_keys(d, {"n_train", "n_test", "embedding"}, "data");
        cfg.data.n_train = get_or<long>(d, "n_train", "data", cfg.data.n_train);
        cfg.data.n_test = get_or<long>(d, "n_test", "data", cfg.data.n_test);
        cfg.data.embedding = parse_embedding(get_or<std::string>(d, "embedding", "data", "linear"));
    }

    bool rewind_given = false;
    if (j.contains("imp")) {
        const json& imp = j.at("imp");
        reject_unknown_keys(imp, {"prune_fraction_per_iter", "n_iterations", "scope",
                                  "prune_biases", "train"},
                            "imp");
        cfg.imp.prune_fraction_per_iter =
            get_or(imp, "prune_fraction_per_iter", "imp", cfg.imp.prune_fraction_per_iter);
        cfg.imp.n_iterations = get_or(imp, "n_iterations", "imp", cfg.imp.n_iterations);
        cfg.imp.scope = parse_scope(get_or<std::string>(imp, "scope", "imp", "global"));
        cfg.imp.prune_biases = get_or(imp, "prune_biases", "imp", false);
        if (imp.contains("train")) {
            const json& t = imp.at("train");
            reject_unknown_keys(
                t, {"learning_rate", "batch_size", "epochs", "rewind_step"}, "imp.train");
            cfg.imp.train.learning_rate =
                get_or(t, "learning_rate", "imp.train", cfg.imp.train.learning_rate);
            cfg.imp.train.batch_size = get_or(t, "batch_size", "imp.train", cfg.imp.train.batch_size);
            cfg.imp.train.epochs = get_or(t, "epochs", "imp.train", cfg.imp.train.epochs);
            if (t.contains("rewind_step")) {
                cfg.imp.train.rewind_step = get_or<long>(t, "rewind_step", "imp.train", 0);
                rewind_given = true;
            }
        }
    }
    // Default rewind point: end of the first epoch.
    if (!rewind_given) {
        if (cfg.imp.train.batch_size < 1) throw ConfigError("imp.train.batch_size: must be >= 1");
        cfg.imp.train.rewind_step = cfg.imp.train.steps_per_epoch(cfg.data.n_train);
    }

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const ExperimentConfig& cfg) {
    json fixed = json::object();
    if (cfg.sweep_axis != SweepAxis::extrinsic) fixed["extrinsic"] = cfg.fixed_extrinsic;
    if (cfg.sweep_axis != SweepAxis::intrinsic) fixed["intrinsic"] = cfg.fixed_intrinsic;
    if (cfg.sweep_axis != SweepAxis::task) fixed["task"] = cfg.fixed_task;

    json archs = json::array();
    for (const auto& a : cfg.architectures) archs.push_back({{"hidden_dims", a.hidden_dims}});

    return json{
        {"sweep_axis", to_string(cfg.sweep_axis)},
        {"dimension_values", cfg.dimension_values},
        {"fixed_dims", fixed},
        {"architectures", archs},
        {"n_seeds", cfg.n_seeds},
        {"seed", cfg.master_seed},
        {"imp",
         {{"prune_fraction_per_iter", cfg.imp.prune_fraction_per_iter},
          {"n_iterations", cfg.imp.n_iterations},
          {"scope", cfg.imp.scope == PruneScope::global ? "global" : "per_layer"},
          {"prune_biases", cfg.imp.prune_biases},
          {"train",
           {{"learning_rate", cfg.imp.train.learning_rate},
            {"batch_size", cfg.imp.train.batch_size},
            {"epochs", cfg.imp.train.epochs},
            {"rewind_step", cfg.imp.train.rewind_step}}}}},
        {"data",
         {{"n_train", cfg.data.n_train},
          {"n_test", cfg.data.n_test},
          {"embedding",
           cfg.data.embedding == Embedding::linear ? "linear" : "nonlinear_manifold"}}},
        {"output_dir", cfg.output_dir},
    };
}

}  // namespace prunelab
