#pragma once

#include <string>
#include <vector>

#include "prunelab/runner.hpp"
#include "prunelab/stats.hpp"

namespace prunelab {

struct AnalysisResult {
    std::vector<GroupStat> table;
    CorrelationReport report;
};

/// Correlation analysis of a completed run: rebuilds the prunability table
/// from the trial files, runs the Monte Carlo correlation (seeds_per_group
/// taken from the run's n_seeds), and fails with the missing-cell list if any
/// trial file is absent.
AnalysisResult analyze_run(const std::string& run_dir, McConfig mc = {});

/// Same analysis on a bundled table (fixtures.hpp) or a GroupStat CSV.
AnalysisResult analyze_table(const std::vector<GroupStat>& table, const McConfig& mc = {});

/// Writes report.json, histogram.csv (40 bins), and the analyzed table to
/// out_dir.
void write_analysis(const AnalysisResult& analysis, const std::string& out_dir);

/// One accuracy-vs-weights-remaining curve CSV per (architecture, dimension)
/// cell, columns weights_remaining_pct, mean_test_accuracy,
/// std_test_accuracy, rows sorted by descending percentage. Files land in
/// out_dir (default: <run_dir>/curves). Returns the written paths.
std::vector<std::string> emit_plot_data(const std::string& run_dir,
                                        const std::string& out_dir = "");

}  // namespace prunelab
