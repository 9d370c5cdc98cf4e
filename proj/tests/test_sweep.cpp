#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "klrhop/io.hpp"
#include "klrhop/stats.hpp"
#include "klrhop/sweep.hpp"

namespace klrhop {
namespace {

TrainConfig quick() {
  TrainConfig tc;
  tc.max_epochs = 300;
  return tc;
}

GridSpec small_grid() {
  GridSpec g;
  g.gamma_values = {0.01, 0.1};
  g.load_values = {0.1, 0.2, 0.3};
  g.n_neurons = 30;
  g.base_seed = 5;
  g.train_config = quick();
  return g;
}

CellRecord plain(double gamma, double load, double sharpness, double sr) {
  CellRecord r;
  r.gamma = gamma;
  r.load = load;
  r.sharpness = sharpness;
  r.stable_rank = sr;
  return r;
}

TEST(RunCell, FiniteMeasurementsAtTwoPatterns) {
  const CellRecord r = run_cell(50, 0.1, 2, 1, TrainConfig{});
  ASSERT_FALSE(r.failed);
  EXPECT_TRUE(std::isfinite(r.sharpness));
  EXPECT_NEAR(r.log10_sharpness, std::log10(r.sharpness), 1e-15);
  EXPECT_GE(r.stable_rank, 1.0);
  EXPECT_LE(r.stable_rank, 2.0);
  EXPECT_FALSE(r.spectrum_class.has_value());
  EXPECT_DOUBLE_EQ(r.load, 0.04);
  EXPECT_EQ(r.trials.size(), 1U);
}

TEST(RunCell, BitwiseDeterministic) {
  const CellRecord a = run_cell(30, 0.03, 6, 99, quick(), 2);
  const CellRecord b = run_cell(30, 0.03, 6, 99, quick(), 2);
  EXPECT_EQ(records_to_csv({a}), records_to_csv({b}));
  EXPECT_EQ(a.trials[1].seed, trial_seed(99, 1));
  EXPECT_NE(a.trials[0].seed, a.trials[1].seed);
}

TEST(RunCell, AveragesOverTrials) {
  const CellRecord r = run_cell(30, 0.03, 6, 7, quick(), 3);
  double m = 0.0;
  for (const auto& t : r.trials) m += t.sharpness;
  EXPECT_NEAR(r.sharpness, m / 3.0, 1e-12 * r.sharpness);
  EXPECT_THROW((void)run_cell(30, 0.03, 6, 7, quick(), 0), ParameterError);
}

TEST(RunGrid, RowMajorRecords) {
  const GridSpec g = small_grid();
  const auto records = run_grid(g, 1);
  ASSERT_EQ(records.size(), 6U);
  for (std::size_t gi = 0; gi < 2; ++gi) {
    for (std::size_t li = 0; li < 3; ++li) {
      const CellRecord& r = records[gi * 3 + li];
      EXPECT_EQ(r.gamma, g.gamma_values[gi]);
      EXPECT_EQ(r.load, g.load_values[li]);
      EXPECT_EQ(r.p_patterns, g.patterns_for(g.load_values[li]));
      EXPECT_EQ(r.seed, cell_seed(g.base_seed, gi, li));
    }
  }
}

TEST(RunGrid, IndependentOfWorkerCount) {
  const GridSpec g = small_grid();
  const std::string one = records_to_csv(run_grid(g, 1));
  EXPECT_EQ(one, records_to_csv(run_grid(g, 3)));
  EXPECT_EQ(one, records_to_csv(run_grid(g, 16)));
}

TEST(RunGrid, RecordSeedRegeneratesCell) {
  const GridSpec g = small_grid();
  const auto records = run_grid(g);
  const CellRecord& r = records[4];
  const CellRecord again = run_cell(g.n_neurons, r.gamma, r.p_patterns, r.seed, g.train_config, g.trials_per_cell);
  EXPECT_EQ(again.sharpness, r.sharpness);
  EXPECT_EQ(again.stable_rank, r.stable_rank);
}

TEST(RunGrid, RejectsBadAxes) {
  GridSpec g = small_grid();
  g.load_values = {0.2, 0.1};
  EXPECT_THROW((void)run_grid(g), ParameterError);
  g = small_grid();
  g.gamma_values = {};
  EXPECT_THROW((void)run_grid(g), ParameterError);
  g = small_grid();
  g.load_values = {0.001};
  EXPECT_THROW((void)run_grid(g), ParameterError);
  g = small_grid();
  g.gamma_values = {-1.0};
  EXPECT_THROW((void)run_grid(g), ParameterError);
}

TEST(WorkerCount, ReadsEnvironment) {
  ::setenv(kWorkersEnv, "3", 1);
  EXPECT_EQ(worker_count(), 3U);
  ::setenv(kWorkersEnv, "zero", 1);
  EXPECT_GE(worker_count(), 1U);
  ::unsetenv(kWorkersEnv);
}

TEST(CrossSection, SingleGammaOrderedByLoad) {
  GridSpec g = small_grid();
  EXPECT_THROW((void)cross_section(g), ParameterError);
  g.gamma_values = {0.01};
  const auto records = cross_section(g, 2);
  ASSERT_EQ(records.size(), 3U);
  EXPECT_LT(records[0].load, records[1].load);
  EXPECT_LT(records[1].load, records[2].load);
}

TEST(LocateRidge, ArgmaxAndQuantile) {
  std::vector<CellRecord> rs = {plain(0.1, 0.1, 1.0, 3.0), plain(0.1, 0.2, 9.0, 1.5), plain(0.2, 0.1, 4.0, 2.0),
                                plain(0.2, 0.2, 2.0, 1.2)};
  const RidgeReport r = locate_ridge(rs);
  EXPECT_EQ(r.index, 1U);
  EXPECT_EQ(r.sharpness, 9.0);
  EXPECT_EQ(r.usable_cells, 4U);
  EXPECT_DOUBLE_EQ(r.stable_rank_quantile, 0.25);

  rs[3].sharpness = 9.0;  // tie keeps the earlier cell
  EXPECT_EQ(locate_ridge(rs).index, 1U);

  rs[1].failed = true;
  EXPECT_THROW((void)locate_ridge(rs), ParameterError);
  for (auto& c : rs) c.failed = true;
  EXPECT_THROW((void)locate_ridge(rs), EmptyResultError);
  EXPECT_THROW((void)locate_ridge({}), EmptyResultError);
}

TEST(Spacing, Endpoints) {
  const auto g = log_space(1e-3, 1.0, 4);
  ASSERT_EQ(g.size(), 4U);
  EXPECT_EQ(g.front(), 1e-3);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_NEAR(g[1], 1e-2, 1e-15);
  const auto l = linear_space(0.25, 2.0, 8);
  EXPECT_EQ(l.back(), 2.0);
  EXPECT_NEAR(l[1], 0.5, 1e-15);
  EXPECT_THROW((void)log_space(0.0, 1.0, 3), ParameterError);
}

TEST(Stats, RankCorrelations) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> y = {2, 4, 9, 16, 100};
  const std::vector<double> z = {5, 4, 3, 2, 1};
  EXPECT_DOUBLE_EQ(spearman_correlation(x, y), 1.0);
  EXPECT_DOUBLE_EQ(spearman_correlation(x, z), -1.0);
  EXPECT_LT(pearson_correlation(x, y), 1.0);
  const std::vector<double> ties = {1, 2, 2, 3};
  const auto ranks = average_ranks(ties);
  EXPECT_DOUBLE_EQ(ranks[1], 2.5);
  EXPECT_DOUBLE_EQ(ranks[2], 2.5);
  // scipy.stats.spearmanr([1,2,3,4],[1,3,2,2]) = 0.316227766016838
  const std::vector<double> a = {1, 2, 3, 4};
  const std::vector<double> b = {1, 3, 2, 2};
  EXPECT_NEAR(spearman_correlation(a, b), 0.316227766016838, 1e-12);
}

}  // namespace
}  // namespace klrhop
