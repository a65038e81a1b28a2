#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "prunelab/fixtures.hpp"
#include "prunelab/stats.hpp"

using namespace prunelab;

TEST_CASE("rank_with_ties basic orderings") {
    CHECK(rank_with_ties(std::vector<double>{10, 20, 30}) == std::vector<double>{1, 2, 3});
    CHECK(rank_with_ties(std::vector<double>{5, 5}) == std::vector<double>{1.5, 1.5});
    CHECK(rank_with_ties(std::vector<double>{3, 1, 3, 2}) == std::vector<double>{3.5, 1, 3.5, 2});
    CHECK(rank_with_ties(std::vector<double>{7}) == std::vector<double>{1});
    CHECK_THROWS_AS(rank_with_ties(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("spearman_rho on monotone pairs") {
    std::vector<double> xs{1, 2, 3, 4, 5};
    std::vector<double> squares{1, 4, 9, 16, 25};
    CHECK(*spearman_rho(xs, squares) == doctest::Approx(1.0));

    std::vector<double> reversed{5, 4, 3, 2, 1};
    CHECK(*spearman_rho(xs, reversed) == doctest::Approx(-1.0));
}

TEST_CASE("spearman_rho hand-computed fixture") {
    std::vector<double> xs{1, 2, 3, 4};
    std::vector<double> ys{2, 1, 4, 3};
    CHECK(*spearman_rho(xs, ys) == doctest::Approx(0.6));
}

TEST_CASE("spearman_rho error and undefined cases") {
    std::vector<double> xs{1, 2, 3};
    CHECK_THROWS_AS(spearman_rho(xs, std::vector<double>{1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(spearman_rho(std::vector<double>{1}, std::vector<double>{1}),
                    std::invalid_argument);
    CHECK_FALSE(spearman_rho(std::vector<double>{7, 7, 7}, xs).has_value());
}

TEST_CASE("spearman_rho is invariant under strictly increasing transforms") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_int_distribution<int> tie(0, 3);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> xs(20), ys(20);
        for (auto& x : xs) x = std::floor(u(rng)) + tie(rng);  // include ties
        for (auto& y : ys) y = u(rng);
        auto base = spearman_rho(xs, ys);
        REQUIRE(base.has_value());
        CHECK(std::abs(*base) <= 1.0 + 1e-12);

        std::vector<double> tx(20), ty(20);
        for (std::size_t i = 0; i < 20; ++i) {
            tx[i] = xs[i] * xs[i] * xs[i] + 2.0 * xs[i];  // strictly increasing
            ty[i] = std::exp(0.3 * ys[i]);
        }
        CHECK(*spearman_rho(tx, ty) == doctest::Approx(*base).epsilon(1e-12));
    }
}

TEST_CASE("mc_correlation noiseless monotone means give rho exactly 1") {
    std::vector<GroupStat> groups{
        {"m", 16, 5.0, 0.0}, {"m", 32, 6.0, 0.0}, {"m", 64, 7.0, 0.0}, {"m", 128, 8.0, 0.0}};
    McConfig cfg;
    cfg.n_rollouts = 50;
    cfg.n_outcomes = 200;
    const auto report = mc_correlation(groups, cfg);
    for (double s : report.samples) CHECK(s == doctest::Approx(1.0));
    CHECK(report.rho_std == doctest::Approx(0.0));
    CHECK(report.n_undefined == 0);
}

TEST_CASE("mc_correlation is deterministic per seed") {
    const auto& table = fixture_table("table1");
    McConfig cfg;
    cfg.n_rollouts = 20;
    cfg.seed = 42;
    const auto a = mc_correlation(table, cfg);
    const auto b = mc_correlation(table, cfg);
    CHECK(a.samples == b.samples);
    cfg.seed = 43;
    const auto c = mc_correlation(table, cfg);
    CHECK(a.samples != c.samples);
}

TEST_CASE("mc_correlation requires two distinct dimension values") {
    std::vector<GroupStat> one_dim{{"a", 16, 5.0, 0.1}, {"b", 16, 6.0, 0.1}};
    CHECK_THROWS_AS(mc_correlation(one_dim), std::invalid_argument);
}

TEST_CASE("mc_correlation samples stay in [-1, 1]") {
    const auto& table = fixture_table("table2");
    McConfig cfg;
    cfg.n_rollouts = 100;
    cfg.n_outcomes = 300;
    const auto report = mc_correlation(table, cfg);
    for (double s : report.samples) CHECK(std::abs(s) <= 1.0 + 1e-12);
}

// Reduced-rollout versions of the reference-table checks; the acceptance
// suite runs them at the full 1000x5000 defaults.
TEST_CASE("mc_correlation reproduces the reference coefficients") {
    McConfig cfg;
    cfg.n_rollouts = 1500;
    cfg.seed = 7;

    const auto t1 = mc_correlation(fixture_table("table1"), cfg);
    CHECK(std::abs(t1.rho_mean - (-0.22)) <= 0.05);
    CHECK(std::abs(t1.rho_std - 0.03) <= 0.03);

    const auto t2 = mc_correlation(fixture_table("table2"), cfg);
    CHECK(std::abs(t2.rho_mean - 0.74) <= 0.05);

    const auto t3 = mc_correlation(fixture_table("table3"), cfg);
    CHECK(std::abs(t3.rho_mean - 0.01) <= 0.05);
}

TEST_CASE("per-group pooling averages the per-model coefficients") {
    McConfig cfg;
    cfg.n_rollouts = 300;
    cfg.pooling = McPooling::per_group;
    const auto report = mc_correlation(fixture_table("table2"), cfg);
    CHECK(report.samples.size() == 3 * 300);  // three models
    CHECK(report.rho_mean > 0.5);             // strongly positive in every group
}

TEST_CASE("emit_histogram puts a point mass in the top bin") {
    CorrelationReport report;
    report.samples = std::vector<double>(17, 1.0);
    const auto hist = emit_histogram(report, 4);
    REQUIRE(hist.size() == 4);
    CHECK(hist[3].count == 17);
    CHECK(hist[0].count + hist[1].count + hist[2].count == 0);
    CHECK(hist[0].center == doctest::Approx(-0.75));
    CHECK(hist[3].center == doctest::Approx(0.75));
}

TEST_CASE("emit_histogram conserves the rollout count") {
    McConfig cfg;
    cfg.n_rollouts = 500;
    const auto report = mc_correlation(fixture_table("table3"), cfg);
    const auto hist = emit_histogram(report, 13);
    long total = 0;
    for (const auto& bin : hist) total += bin.count;
    CHECK(total == 500);
    CHECK_THROWS_AS(emit_histogram(report, 0), std::invalid_argument);
}

TEST_CASE("table1 histogram mass sits near the reported mean") {
    McConfig cfg;
    cfg.n_rollouts = 800;
    const auto report = mc_correlation(fixture_table("table1"), cfg);
    const auto hist = emit_histogram(report, 40);  // bins of width 0.05
    long near = 0, total = 0;
    for (const auto& bin : hist) {
        total += bin.count;
        if (std::abs(bin.center - (-0.22)) <= 0.1) near += bin.count;
    }
    CHECK(near > total * 9 / 10);
}
