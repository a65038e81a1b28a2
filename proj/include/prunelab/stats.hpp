#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace prunelab {

/// One aggregated pruning result: the minimum matching weights-remaining
/// percentage (mean/std over seeds) observed for one model at one value of a
/// data-dimensionality axis.
struct GroupStat {
    std::string group_label;  // e.g. "mlp-256-128"
    int dimension_value = 0;  // the varied dimensionality (D, d, or t)
    double mean_pct = 0.0;
    double std_pct = 0.0;
};

enum class McPooling {
    pooled,     // one Monte Carlo run over all rows
    per_group,  // independent runs per group_label, coefficients averaged
};

struct McConfig {
    int n_outcomes = 1000;  // simulated outcomes per rollout
    int n_rollouts = 5000;
    std::uint64_t seed = 0;
    // std_pct columns are spreads over this many repeated runs; rollouts
    // perturb each group mean by its standard error (std_pct / sqrt(n)).
    // Set to 1 to sample with the raw per-run spread instead.
    int seeds_per_group = 3;
    McPooling pooling = McPooling::pooled;
};

struct CorrelationReport {
    double rho_mean = 0.0;
    double rho_std = 0.0;
    std::vector<double> samples;  // one coefficient per rollout
    int n_undefined = 0;          // rollouts dropped because a rank vector was constant
    McConfig config;
};

/// Ascending 1-based ranks; tied values get the average of their positions.
std::vector<double> rank_with_ties(std::span<const double> values);

/// Spearman rank correlation: Pearson correlation of the two rank vectors.
/// Empty result when either rank vector is constant (correlation undefined).
std::optional<double> spearman_rho(std::span<const double> xs, std::span<const double> ys);

/// Monte Carlo distribution of the rank correlation between dimensionality
/// and weights-remaining. Each rollout draws cfg.n_outcomes (dimension, value)
/// pairs by picking a row uniformly with replacement and sampling
/// value ~ Normal(mean_pct, std_pct / sqrt(seeds_per_group)), then computes
/// one Spearman coefficient. Deterministic per seed; rollout r uses the
/// sub-seed mix_seed(cfg.seed, r), so rollouts are order-independent.
CorrelationReport mc_correlation(const std::vector<GroupStat>& groups, const McConfig& cfg = {});

struct HistogramBin {
    double center = 0.0;
    long count = 0;
};

/// Fixed-width histogram of report.samples over [-1, 1].
std::vector<HistogramBin> emit_histogram(const CorrelationReport& report, int bins);

}  // namespace prunelab
