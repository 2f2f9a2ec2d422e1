#pragma once

#include <string>
#include <utility>
#include <vector>

#include "netdep/graph_model.hpp"
#include "netdep/permtest.hpp"

namespace netdep {

struct ExperimentGrid {
  ScenarioSpec base;              // template: scenario, n, p, d and seed
  std::vector<double> s_values;   // level experiments use {0}
  std::vector<int> n_values;      // empty: use base.n
  std::vector<int> p_values;      // empty: use base.p
  std::vector<TestMethod> methods;
  int mc_reps = 200;
  int n_perm = 50;
  double alpha = 0.05;
  std::uint64_t master_seed = 0;
  int threads = 1;
  StatOptions stat_options;
  bool keep_p_values = false;

  void validate() const;
};

/// One Monte Carlo cell: rejection rate with a 99% Wald interval
/// (z = 2.576), replicates that errored counted separately and excluded
/// from the rate, and the mean wall-clock seconds of a single observed fit.
struct RejectionRow {
  TestMethod method = TestMethod::Cca;
  Scenario scenario = Scenario::NoSparsity;
  double s = 0.0;
  int n = 0;
  int p = 0;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int mc_reps = 0;
  int errors = 0;
  double mean_fit_seconds = 0.0;
};

struct PowerDiagnostic {
  TestMethod method = TestMethod::Cca;
  int n = 0;
  int p = 0;
  double max_isotonic_deviation = 0.0;  // vs a monotone fit of rate over s
};

struct RejectionTable {
  std::vector<RejectionRow> rows;
  std::vector<PowerDiagnostic> diagnostics;       // power runs only
  std::vector<std::vector<double>> cell_p_values;  // parallel to rows when kept
};

/// All five statistics evaluated against the same draws; p-values collected
/// when keep_p_values is set (used for QQ data).
struct CellResult {
  RejectionRow row;
  std::vector<double> p_values;  // only successful replicates, in rep order
};

CellResult run_cell(const ScenarioSpec& spec, TestMethod method, int mc_reps,
                    int n_perm, double alpha, std::uint64_t cell_seed,
                    int threads, const StatOptions& stat_options,
                    bool keep_p_values = false);

RejectionTable run_level_experiment(const ExperimentGrid& grid);
RejectionTable run_power_curve(const ExperimentGrid& grid);

/// Sorted pairs ((i - 0.5)/N, p_(i)) for QQ plots against Uniform[0,1].
std::vector<std::pair<double, double>> qq_data(std::vector<double> p_values);

/// One-sample Kolmogorov-Smirnov distance to Uniform[0,1].
double ks_distance_uniform(std::vector<double> values);

/// Pool-adjacent-violators fit of an increasing sequence (least squares).
std::vector<double> isotonic_increasing_fit(const std::vector<double>& values);

std::string format_rejection_table(const RejectionTable& table);
std::string rejection_table_csv(const RejectionTable& table);
std::string timing_csv(const RejectionTable& table);
std::string diagnostics_csv(const RejectionTable& table);

struct BenchPreset {
  int mc_reps;
  int n_perm;
};

/// paper: 1000 replicates, 100 permutations. quick: 200 replicates, 50
/// permutations, checked against widened confidence bands.
BenchPreset bench_preset(const std::string& name);

}  // namespace netdep
