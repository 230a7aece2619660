// Copyright 2026 The qbattery Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "qbattery/sweep.hpp"

namespace qbattery {
namespace {

namespace fs = std::filesystem;

SweepConfig parse(const std::string& text, Index max_dim = 200) {
  std::istringstream in(text);
  return parse_sweep_config(in, max_dim);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

GridSettings short_grid(double t_end = 3.0) {
  GridSettings g;
  g.t_end = t_end;
  g.sample_interval = 0.01;
  return g;
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("qbattery_sweep_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

TEST(SweepConfig, ParsesAllKeys) {
  const SweepConfig cfg = parse(
      "# comment line\n"
      "n_b_list = 1, 2\n"
      "r_list = 1,5   # inline comment\n"
      "temperature_list = 0, 0.5\n"
      "omega = 2\n"
      "gamma = 0.5\n"
      "t_end = 10\n"
      "sample_interval = 0.02\n"
      "ss_tolerance = 1e-9\n"
      "out_dir = results\n");
  EXPECT_EQ(cfg.n_b_list, (std::vector<int>{1, 2}));
  EXPECT_EQ(cfg.r_list, (std::vector<int>{1, 5}));
  EXPECT_EQ(cfg.temperature_list, (std::vector<double>{0.0, 0.5}));
  EXPECT_EQ(cfg.omega, 2.0);
  EXPECT_EQ(cfg.gamma, 0.5);
  EXPECT_EQ(cfg.grid.t_end, 10.0);
  EXPECT_EQ(cfg.grid.sample_interval, 0.02);
  EXPECT_EQ(cfg.grid.ss_tolerance, 1e-9);
  EXPECT_EQ(cfg.out_dir, "results");
}

TEST(SweepConfig, RejectsMalformedInput) {
  const std::string base = "n_b_list = 1\nr_list = 1\ntemperature_list = 0\n";
  EXPECT_NO_THROW(parse(base));
  EXPECT_THROW(parse(base + "colour = red\n"), std::invalid_argument);
  EXPECT_THROW(parse(base + "r_list = 2\n"), std::invalid_argument);
  EXPECT_THROW(parse("n_b_list = \nr_list = 1\ntemperature_list = 0\n"), std::invalid_argument);
  EXPECT_THROW(parse("n_b_list = 1\nr_list = 2.5\ntemperature_list = 0\n"), std::invalid_argument);
  EXPECT_THROW(parse("n_b_list = 1\nr_list = 0\ntemperature_list = 0\n"), std::invalid_argument);
  EXPECT_THROW(parse("n_b_list = 1\nr_list = 1\ntemperature_list = -1\n"), std::invalid_argument);
  EXPECT_THROW(parse("n_b_list = 1\nr_list = 1\ntemperature_list = warm\n"),
               std::invalid_argument);
  EXPECT_THROW(parse(base + "just some words\n"), std::invalid_argument);
}

TEST(SweepConfig, DimensionCap) {
  // n_b = 4, R = 10 gives (41)(5) = 205.
  const std::string text = "n_b_list = 4\nr_list = 10\ntemperature_list = 0\n";
  EXPECT_THROW(parse(text), std::invalid_argument);
  EXPECT_NO_THROW(parse(text, 205));
}

TEST(LocatePeak, InteriorMaximum) {
  const auto p = locate_peak({0, 1, 2, 3, 4}, {0.0, 1.0, 3.0, 2.0, 0.5});
  EXPECT_EQ(p.t, 2.0);
  EXPECT_EQ(p.value, 3.0);
  EXPECT_FALSE(p.boundary);
}

TEST(LocatePeak, PicksLargestOfSeveral) {
  const auto p = locate_peak({0, 1, 2, 3, 4, 5, 6}, {0.0, 2.0, 1.0, 4.0, 1.0, 3.0, 0.0});
  EXPECT_EQ(p.t, 3.0);
}

TEST(LocatePeak, PlateauReportsFirstSample) {
  const auto p = locate_peak({0, 1, 2, 3, 4}, {0.0, 2.0, 2.0, 2.0, 1.0});
  EXPECT_EQ(p.t, 1.0);
  EXPECT_FALSE(p.boundary);
}

TEST(LocatePeak, MonotoneSeriesFallsBackToBoundary) {
  const auto up = locate_peak({0, 1, 2, 3}, {0.0, 1.0, 2.0, 3.0});
  EXPECT_TRUE(up.boundary);
  EXPECT_EQ(up.t, 3.0);
  const auto down = locate_peak({0, 1, 2, 3}, {3.0, 2.0, 1.0, 0.0});
  EXPECT_TRUE(down.boundary);
  EXPECT_EQ(down.t, 0.0);
  EXPECT_THROW(locate_peak({0, 1}, {0.0, 1.0}), std::invalid_argument);
}

TEST(ScalingFit, ExactLine) {
  const auto fit = scaling_fit({1, 2, 3, 4}, {2.5, 4.0, 5.5, 7.0});
  EXPECT_NEAR(fit.slope, 1.5, 1e-14);
  EXPECT_NEAR(fit.intercept, 1.0, 1e-14);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-14);
}

TEST(ScalingFit, NoisyData) {
  // Hand-computed: x̄ = 2, ȳ = 2, Sxx = 2, Sxy = 1.5, Syy = 1.5.
  const auto fit = scaling_fit({1, 2, 3}, {0.5, 3.0, 2.5});
  EXPECT_NEAR(fit.slope, 1.0, 1e-14);
  EXPECT_NEAR(fit.intercept, 0.0, 1e-14);
  EXPECT_NEAR(fit.r_squared, 1.0 - (0.25 + 1.0 + 0.25) / 3.5, 1e-14);
}

TEST(ScalingFit, RejectsDegenerateInput) {
  EXPECT_THROW(scaling_fit({1, 2}, {1, 2}), std::invalid_argument);
  EXPECT_THROW(scaling_fit({2, 2, 2}, {1, 2, 3}), std::invalid_argument);
  EXPECT_THROW(scaling_fit({1, 2, 3}, {1, 2}), std::invalid_argument);
}

TEST(RunPoint, TwoSpinZeroTemperature) {
  const PointResult res = run_point(1, 1, Temperature{0.0}, 1.0, 1.0, short_grid());
  EXPECT_TRUE(res.row.converged);
  EXPECT_NEAR(res.row.e_ss, 0.25, 1e-9);
  EXPECT_NEAR(res.row.capacity, 0.25, 1e-9);
  EXPECT_NEAR(res.row.s_ss, std::log2(0.5 + 1.0 / std::sqrt(2.0)), 1e-8);
  EXPECT_NEAR(res.row.w_open_ss, res.row.e_ss, 1e-15);
  EXPECT_EQ(res.row.n_c, 1);
  EXPECT_LT(res.max_trace_error, 1e-9);
  EXPECT_GT(res.min_eigenvalue, -1e-8);
  EXPECT_EQ(res.records.size(), 301u);
}

TEST(RunPoint, RatioFiveSingleBatterySpin) {
  const PointResult res = run_point(1, 5, Temperature{0.0}, 1.0, 1.0, short_grid());
  EXPECT_TRUE(res.row.converged);
  EXPECT_NEAR(res.row.e_ss, 25.0 / 36.0, 1e-8);
  EXPECT_NEAR(res.row.t_p_max, 0.22, 0.011);
  EXPECT_FALSE(res.row.p_peak_boundary);
  EXPECT_GT(res.row.lag, 0.0);
  EXPECT_NEAR(res.row.lag, res.row.t_sdot_max - res.row.t_p_max, 1e-15);
}

TEST(RunPoint, HotReservoirHalfFillsBattery) {
  const PointResult res = run_point(1, 4, Temperature{100.0}, 1.0, 1.0, short_grid(1.0));
  EXPECT_TRUE(res.row.converged);
  EXPECT_NEAR(res.row.e_ss, 0.4975, 1e-3);
  EXPECT_NEAR(res.row.nbar, thermal_occupation(1.0, 100.0), 1e-12);
}

TEST(RunPoint, EnforcesDimensionCap) {
  EXPECT_THROW(run_point(4, 10, Temperature{0.0}, 1.0, 1.0, short_grid()), std::invalid_argument);
  EXPECT_THROW(run_point(0, 1, Temperature{0.0}, 1.0, 1.0, short_grid()), std::invalid_argument);
}

TEST(RunPoint, ChargerEnergyFallsAtZeroTemperature) {
  const PointResult res = run_point(2, 3, Temperature{0.0}, 1.0, 1.0, short_grid());
  for (std::size_t k = 1; k < res.records.size(); ++k) {
    EXPECT_LE(res.records[k].e_c, res.records[k - 1].e_c + 1e-12);
  }
}

TEST(Csv, HeadersAndFormatting) {
  std::ostringstream os;
  ObservableRecord r;
  r.t = 0.1;
  r.e_b = 1.0 / 3.0;
  write_trajectory_csv(os, {r});
  EXPECT_EQ(os.str(),
            "t,e_c,e_b,p_b,s_b,sdot_b,w_closed,w_open\n"
            "0.10000000000000001,0,0.33333333333333331,0,0,0,0,0\n");
  EXPECT_EQ(trajectory_file_name(2, 5, 0.5), "trajectory_nb2_r5_T0.5.csv");
}

TEST(RunSweep, WritesFilesDeterministically) {
  TempDir tmp;
  SweepConfig cfg;
  cfg.n_b_list = {1, 2};
  cfg.r_list = {1, 2};
  cfg.temperature_list = {0.0, 1.0};
  cfg.grid = short_grid(1.0);
  cfg.out_dir = (tmp.path() / "a").string();
  const SweepReport first = run_sweep(cfg);
  EXPECT_EQ(first.failures, 0u);
  ASSERT_EQ(first.rows.size(), 8u);
  ASSERT_EQ(first.trajectory_files.size(), 8u);
  EXPECT_EQ(first.rows[0].n_b, 1);
  EXPECT_EQ(first.rows[7].n_b, 2);
  EXPECT_EQ(first.rows[1].temperature, 1.0);

  cfg.out_dir = (tmp.path() / "b").string();
  cfg.jobs = 3;
  const SweepReport second = run_sweep(cfg);
  EXPECT_EQ(slurp(first.summary_file), slurp(second.summary_file));
  for (std::size_t k = 0; k < first.trajectory_files.size(); ++k) {
    EXPECT_EQ(slurp(first.trajectory_files[k]), slurp(second.trajectory_files[k]));
  }
  const std::string summary = slurp(first.summary_file);
  EXPECT_EQ(summary.substr(0, summary.find('\n')), summary_csv_header());
}

TEST(RunSweep, ScalingFitByRatioGroupsRows) {
  std::vector<SweepRow> rows;
  for (int n : {1, 2, 3}) {
    SweepRow a;
    a.n_b = n;
    a.r = 5;
    a.p_max = 1.5 * n + 0.1;
    rows.push_back(a);
    SweepRow b = a;
    b.r = 10;
    b.p_max = 2.0 * n;
    rows.push_back(b);
  }
  const auto fits = scaling_fit_by_ratio(rows);
  ASSERT_EQ(fits.size(), 2u);
  EXPECT_NEAR(fits.at(5).slope, 1.5, 1e-14);
  EXPECT_NEAR(fits.at(10).slope, 2.0, 1e-14);
}

}  // namespace
}  // namespace qbattery
