#include "prunelab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "prunelab/common.hpp"

namespace prunelab {

std::vector<double> rank_with_ties(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("rank_with_ties: empty input");
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // positions i..j (0-based) share the average of ranks i+1..j+1
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

std::optional<double> spearman_rho(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("spearman_rho: length mismatch");
    if (xs.size() < 2) throw std::invalid_argument("spearman_rho: need at least 2 points");

    const std::vector<double> rx = rank_with_ties(xs);
    const std::vector<double> ry = rank_with_ties(ys);
    const double n = static_cast<double>(rx.size());

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

CorrelationReport mc_correlation(const std::vector<GroupStat>& groups, const McConfig& cfg) {
    if (cfg.n_outcomes < 2) throw std::invalid_argument("mc_correlation: n_outcomes must be >= 2");
    if (cfg.n_rollouts < 1) throw std::invalid_argument("mc_correlation: n_rollouts must be >= 1");
    if (cfg.seeds_per_group < 1) throw std::invalid_argument("mc_correlation: seeds_per_group must be >= 1");
    std::set<int> dims;
    for (const auto& g : groups) dims.insert(g.dimension_value);
    if (dims.size() < 2)
        throw std::invalid_argument("mc_correlation: need at least 2 distinct dimension values");

    std::vector<std::vector<GroupStat>> pools;
    if (cfg.pooling == McPooling::pooled) {
        pools.push_back(groups);
    } else {
        std::map<std::string, std::vector<GroupStat>> by_label;
        for (const auto& g : groups) by_label[g.group_label].push_back(g);
        for (auto& [label, rows] : by_label) pools.push_back(std::move(rows));
    }

    const double sem_scale = 1.0 / std::sqrt(static_cast<double>(cfg.seeds_per_group));

    CorrelationReport report;
    report.config = cfg;
    report.samples.reserve(static_cast<std::size_t>(cfg.n_rollouts) * pools.size());

    for (std::size_t pool_idx = 0; pool_idx < pools.size(); ++pool_idx) {
        const auto& rows = pools[pool_idx];
        std::vector<double> dim_buf(static_cast<std::size_t>(cfg.n_outcomes));
        std::vector<double> val_buf(static_cast<std::size_t>(cfg.n_outcomes));
        for (int r = 0; r < cfg.n_rollouts; ++r) {
            std::mt19937_64 rng(mix_seed(cfg.seed, pool_idx, static_cast<std::uint64_t>(r)));
            std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
            std::normal_distribution<double> unit;
            for (int k = 0; k < cfg.n_outcomes; ++k) {
                const GroupStat& row = rows[pick(rng)];
                dim_buf[static_cast<std::size_t>(k)] = static_cast<double>(row.dimension_value);
                val_buf[static_cast<std::size_t>(k)] =
                    row.mean_pct + row.std_pct * sem_scale * unit(rng);
            }
            const auto rho = spearman_rho(dim_buf, val_buf);
            if (rho)
                report.samples.push_back(*rho);
            else
                ++report.n_undefined;
        }
    }

    if (report.samples.empty())
        throw std::runtime_error("mc_correlation: every rollout had a constant rank vector");

    double mean = 0.0;
    for (double s : report.samples) mean += s;
    mean /= static_cast<double>(report.samples.size());
    double var = 0.0;
    for (double s : report.samples) var += (s - mean) * (s - mean);
    var /= static_cast<double>(report.samples.size());

    report.rho_mean = mean;
    report.rho_std = std::sqrt(var);
    return report;
}

std::vector<HistogramBin> emit_histogram(const CorrelationReport& report, int bins) {
    if (bins < 1) throw std::invalid_argument("emit_histogram: bins must be >= 1");
    std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
    const double width = 2.0 / bins;
    for (int b = 0; b < bins; ++b)
        out[static_cast<std::size_t>(b)].center = -1.0 + width * (b + 0.5);
    for (double s : report.samples) {
        int b = static_cast<int>((s + 1.0) / width);
        b = std::clamp(b, 0, bins - 1);  // s == 1.0 lands in the top bin
        ++out[static_cast<std::size_t>(b)].count;
    }
    return out;
}

}  // namespace prunelab
