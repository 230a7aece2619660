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

#pragma once

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbattery/dynamics.hpp"
#include "qbattery/lindblad.hpp"
#include "qbattery/observables.hpp"

namespace qbattery {

struct GridSettings {
  double t_end = 50.0;
  double sample_interval = 0.01;
  double ss_tolerance = 1e-10;
  double t_cap = 200.0;
};

struct SweepConfig {
  std::vector<int> n_b_list;
  std::vector<int> r_list;
  std::vector<double> temperature_list;
  double omega = 1.0;
  double gamma = 1.0;
  GridSettings grid;
  std::string out_dir = ".";
  Index max_dim = 200;
  unsigned jobs = 1;

  void validate() const {
    if (n_b_list.empty()) throw std::invalid_argument("sweep config: n_b_list is empty");
    if (r_list.empty()) throw std::invalid_argument("sweep config: r_list is empty");
    if (temperature_list.empty()) {
      throw std::invalid_argument("sweep config: temperature_list is empty");
    }
    for (int n : n_b_list) {
      if (n < 1) throw std::invalid_argument("sweep config: n_b values must be >= 1");
    }
    for (int r : r_list) {
      if (r < 1) throw std::invalid_argument("sweep config: r values must be >= 1");
    }
    for (double t : temperature_list) {
      if (!(t >= 0.0) || !std::isfinite(t)) {
        throw std::invalid_argument("sweep config: temperatures must be finite and >= 0");
      }
    }
    if (!(omega > 0.0) || !(gamma > 0.0)) {
      throw std::invalid_argument("sweep config: omega and gamma must be > 0");
    }
    if (!(grid.t_end > 0.0) || !(grid.sample_interval > 0.0) || !(grid.ss_tolerance > 0.0) ||
        !(grid.t_cap > 0.0)) {
      throw std::invalid_argument("sweep config: grid settings must be > 0");
    }
    if (grid.t_end / grid.sample_interval < 2.0) {
      throw std::invalid_argument("sweep config: need at least 3 samples per trajectory");
    }
    for (int n : n_b_list) {
      for (int r : r_list) {
        const Index d = static_cast<Index>(r * n + 1) * (n + 1);
        if (d > max_dim) {
          throw std::invalid_argument("sweep config: n_b=" + std::to_string(n) +
                                      ", r=" + std::to_string(r) + " gives dimension " +
                                      std::to_string(d) + " above the cap " +
                                      std::to_string(max_dim));
        }
      }
    }
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
    throw std::invalid_argument("sweep config: '" + key + "' expects a number, got '" + t + "'");
  }
  return v;
}

inline int parse_int(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE ||
      v > std::numeric_limits<int>::max() || v < std::numeric_limits<int>::min()) {
    throw std::invalid_argument("sweep config: '" + key + "' expects integers, got '" + t + "'");
  }
  return static_cast<int>(v);
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

/// Reads `key = value` lines; `#` starts a comment and lists are comma
/// separated. Unknown or repeated keys are errors.
inline SweepConfig parse_sweep_config(std::istream& in, Index max_dim = 200) {
  SweepConfig cfg;
  cfg.max_dim = max_dim;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("sweep config line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw std::invalid_argument("sweep config: duplicate key '" + key + "'");
    }
    if (key == "n_b_list") {
      for (const auto& item : detail::split_list(value)) {
        cfg.n_b_list.push_back(detail::parse_int(item, key));
      }
    } else if (key == "r_list") {
      for (const auto& item : detail::split_list(value)) {
        cfg.r_list.push_back(detail::parse_int(item, key));
      }
    } else if (key == "temperature_list") {
      for (const auto& item : detail::split_list(value)) {
        cfg.temperature_list.push_back(detail::parse_double(item, key));
      }
    } else if (key == "omega") {
      cfg.omega = detail::parse_double(value, key);
    } else if (key == "gamma") {
      cfg.gamma = detail::parse_double(value, key);
    } else if (key == "t_end") {
      cfg.grid.t_end = detail::parse_double(value, key);
    } else if (key == "sample_interval") {
      cfg.grid.sample_interval = detail::parse_double(value, key);
    } else if (key == "ss_tolerance") {
      cfg.grid.ss_tolerance = detail::parse_double(value, key);
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else {
      throw std::invalid_argument("sweep config: unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

inline SweepConfig load_sweep_config(const std::filesystem::path& path, Index max_dim = 200) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sweep config " + path.string());
  return parse_sweep_config(in, max_dim);
}

struct Peak {
  double t = 0.0;
  double value = 0.0;
  bool boundary = false;  // no interior local maximum existed
};

/// Largest interior local maximum (earliest on ties). A plateau counts once,
/// at its first sample. Without any local maximum the global maximum is
/// returned with `boundary` set.
inline Peak locate_peak(const std::vector<double>& times, const std::vector<double>& values) {
  if (times.size() != values.size()) throw std::invalid_argument("locate_peak: length mismatch");
  if (values.size() < 3) throw std::invalid_argument("locate_peak: need at least 3 samples");
  std::size_t best = values.size();
  for (std::size_t k = 1; k + 1 < values.size(); ++k) {
    if (values[k] > values[k - 1] && values[k] >= values[k + 1]) {
      if (best == values.size() || values[k] > values[best]) best = k;
    }
  }
  if (best != values.size()) return {times[best], values[best], false};
  const auto it = std::max_element(values.begin(), values.end());
  const auto k = static_cast<std::size_t>(it - values.begin());
  return {times[k], values[k], true};
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y ≈ slope·x + intercept.
inline LinearFit scaling_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("scaling_fit: length mismatch");
  if (x.size() < 3) throw std::invalid_argument("scaling_fit: need at least 3 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("scaling_fit: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - (fit.slope * x[k] + fit.intercept);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
  return fit;
}

struct SweepRow {
  int n_b = 0;
  int n_c = 0;
  int r = 0;
  double temperature = 0.0;
  double nbar = 0.0;
  double e_ss = 0.0;
  double capacity = 0.0;
  double p_max = 0.0;
  double t_p_max = 0.0;
  double s_ss = 0.0;
  double sdot_max = 0.0;
  double t_sdot_max = 0.0;
  double lag = 0.0;  // t(Ṡ_max) − t(P_max)
  double w_closed_ss = 0.0;
  double w_open_ss = 0.0;
  bool converged = false;
  bool p_peak_boundary = false;
  bool sdot_peak_boundary = false;
  std::string error;
};

/// Fits p_max against n_b separately for every R present in `rows`.
inline std::map<int, LinearFit> scaling_fit_by_ratio(const std::vector<SweepRow>& rows) {
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& row : rows) {
    groups[row.r].first.push_back(row.n_b);
    groups[row.r].second.push_back(row.p_max);
  }
  std::map<int, LinearFit> out;
  for (const auto& [r, xy] : groups) out[r] = scaling_fit(xy.first, xy.second);
  return out;
}

struct PointResult {
  SystemSpec spec;
  std::vector<ObservableRecord> records;
  SweepRow row;
  double max_trace_error = 0.0;
  double min_eigenvalue = 0.0;
  bool truncated = false;
};

inline SystemSpec point_spec(int n_b, int r, ThermalSpec thermal, double omega, double gamma) {
  if (n_b < 1 || r < 1) throw std::invalid_argument("run_point: n_b and r must be >= 1");
  SystemSpec spec;
  spec.n_b = n_b;
  spec.n_c = r * n_b;
  spec.omega = omega;
  spec.gamma = gamma;
  spec.thermal = thermal;
  spec.validate();
  return spec;
}

/// Trajectory observables plus the summary row for one (n_b, R, T) point.
/// Steady-state columns come from a converged steady_state call, not from
/// the last trajectory sample.
inline PointResult run_point(int n_b, int r, ThermalSpec thermal, double omega, double gamma,
                             const GridSettings& grid, Index max_dim = 200) {
  PointResult out;
  out.spec = point_spec(n_b, r, thermal, omega, gamma);
  const Index d = static_cast<Index>(out.spec.n_c + 1) * (out.spec.n_b + 1);
  if (d > max_dim) {
    throw std::invalid_argument("run_point: dimension " + std::to_string(d) +
                                " exceeds the cap " + std::to_string(max_dim));
  }
  const Generator gen(out.spec);
  const DensityMatrix rho0 = initial_state(out.spec);

  const Trajectory traj = evolve(gen, rho0, grid.t_end, grid.sample_interval);
  out.records = observe_trajectory(gen, traj);
  out.max_trace_error = traj.max_trace_error();
  out.min_eigenvalue = traj.min_eigenvalue();
  out.truncated = traj.truncated;

  const SteadyStateResult ss = steady_state(gen, rho0, grid.ss_tolerance, grid.t_cap);

  SweepRow& row = out.row;
  row.n_b = out.spec.n_b;
  row.n_c = out.spec.n_c;
  row.r = r;
  row.temperature = out.spec.temperature();
  row.nbar = out.spec.nbar();
  row.e_ss = energy_density(ss.rho_ss, Subsystem::kBattery, out.spec);
  row.capacity = capacity(ss.rho_ss, out.spec);
  row.s_ss = log_negativity(ss.rho_ss, out.spec);
  row.w_closed_ss = ergotropy_density(ss.rho_ss, out.spec);
  row.w_open_ss = work_open(ss.rho_ss, out.spec);
  row.converged = ss.converged && !traj.truncated;
  if (traj.truncated) row.error = traj.message;
  else if (!ss.converged) row.error = "steady state not converged by t_cap";

  if (out.records.size() >= 3) {
    std::vector<double> t, p, sdot;
    for (const auto& rec : out.records) {
      t.push_back(rec.t);
      p.push_back(rec.p_b);
      sdot.push_back(rec.sdot_b);
    }
    const Peak p_peak = locate_peak(t, p);
    const Peak s_peak = locate_peak(t, sdot);
    row.p_max = p_peak.value;
    row.t_p_max = p_peak.t;
    row.p_peak_boundary = p_peak.boundary;
    row.sdot_max = s_peak.value;
    row.t_sdot_max = s_peak.t;
    row.sdot_peak_boundary = s_peak.boundary;
    row.lag = row.t_sdot_max - row.t_p_max;
  }
  return out;
}

inline const char* trajectory_csv_header() { return "t,e_c,e_b,p_b,s_b,sdot_b,w_closed,w_open"; }

inline const char* summary_csv_header() {
  return "n_b,n_c,r,temperature,nbar,e_ss,capacity,p_max,t_p_max,s_ss,sdot_max,t_sdot_max,lag,"
         "w_closed_ss,w_open_ss,converged";
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_trajectory_csv(std::ostream& out, const std::vector<ObservableRecord>& records) {
  out << trajectory_csv_header() << '\n';
  for (const auto& r : records) {
    out << format_number(r.t) << ',' << format_number(r.e_c) << ',' << format_number(r.e_b) << ','
        << format_number(r.p_b) << ',' << format_number(r.s_b) << ',' << format_number(r.sdot_b)
        << ',' << format_number(r.w_closed) << ',' << format_number(r.w_open) << '\n';
  }
}

inline void write_summary_row(std::ostream& out, const SweepRow& r) {
  out << r.n_b << ',' << r.n_c << ',' << r.r << ',' << format_number(r.temperature) << ','
      << format_number(r.nbar) << ',' << format_number(r.e_ss) << ','
      << format_number(r.capacity) << ',' << format_number(r.p_max) << ','
      << format_number(r.t_p_max) << ',' << format_number(r.s_ss) << ','
      << format_number(r.sdot_max) << ',' << format_number(r.t_sdot_max) << ','
      << format_number(r.lag) << ',' << format_number(r.w_closed_ss) << ','
      << format_number(r.w_open_ss) << ',' << (r.converged ? 1 : 0) << '\n';
}

inline void write_summary_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << summary_csv_header() << '\n';
  for (const auto& r : rows) write_summary_row(out, r);
}

inline std::string trajectory_file_name(int n_b, int r, double temperature) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "trajectory_nb%d_r%d_T%.12g.csv", n_b, r, temperature);
  return buf;
}

struct SweepReport {
  std::vector<SweepRow> rows;
  std::vector<std::filesystem::path> trajectory_files;
  std::filesystem::path summary_file;
  std::size_t failures = 0;
};

/// Runs every (n_b, R, T) combination in that nesting order, writes one
/// trajectory CSV per point and summary.csv. Points are independent and run
/// on up to `config.jobs` threads; files are written afterwards in a fixed
/// order. A failing point is recorded as an unconverged row.
inline SweepReport run_sweep(const SweepConfig& config) {
  config.validate();
  namespace fs = std::filesystem;
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);

  struct Task {
    int n_b, r;
    double temperature;
  };
  std::vector<Task> tasks;
  for (int n_b : config.n_b_list) {
    for (int r : config.r_list) {
      for (double temp : config.temperature_list) tasks.push_back({n_b, r, temp});
    }
  }

  auto run_task = [&config](const Task& task) {
    try {
      return run_point(task.n_b, task.r, Temperature{task.temperature}, config.omega,
                       config.gamma, config.grid, config.max_dim);
    } catch (const std::exception& e) {
      PointResult failed;
      failed.row.n_b = task.n_b;
      failed.row.n_c = task.r * task.n_b;
      failed.row.r = task.r;
      failed.row.temperature = task.temperature;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      failed.row.nbar = failed.row.e_ss = failed.row.capacity = failed.row.p_max = nan;
      failed.row.t_p_max = failed.row.s_ss = failed.row.sdot_max = failed.row.t_sdot_max = nan;
      failed.row.lag = failed.row.w_closed_ss = failed.row.w_open_ss = nan;
      failed.row.converged = false;
      failed.row.error = e.what();
      return failed;
    }
  };

  std::vector<PointResult> results(tasks.size());
  const std::size_t jobs = std::max(1u, config.jobs);
  for (std::size_t start = 0; start < tasks.size(); start += jobs) {
    const std::size_t stop = std::min(tasks.size(), start + jobs);
    if (jobs == 1) {
      results[start] = run_task(tasks[start]);
      continue;
    }
    std::vector<std::future<PointResult>> pending;
    for (std::size_t k = start; k < stop; ++k) {
      pending.push_back(std::async(std::launch::async, run_task, tasks[k]));
    }
    for (std::size_t k = start; k < stop; ++k) results[k] = pending[k - start].get();
  }

  SweepReport report;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const auto& res = results[k];
    report.rows.push_back(res.row);
    if (!res.row.error.empty() && res.records.empty()) {
      ++report.failures;
      continue;
    }
    if (!res.row.converged) ++report.failures;
    const fs::path file =
        dir / trajectory_file_name(tasks[k].n_b, tasks[k].r, tasks[k].temperature);
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    write_trajectory_csv(out, res.records);
    if (!out) throw std::runtime_error("write failed for " + file.string());
    report.trajectory_files.push_back(file);
  }
  report.summary_file = dir / "summary.csv";
  std::ofstream summary(report.summary_file, std::ios::binary);
  if (!summary) throw std::runtime_error("cannot write " + report.summary_file.string());
  write_summary_csv(summary, report.rows);
  if (!summary) throw std::runtime_error("write failed for " + report.summary_file.string());
  return report;
}

}  // namespace qbattery
