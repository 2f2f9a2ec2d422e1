#include "netdep/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "netdep/embedding.hpp"
#include "netdep/threads.hpp"

namespace netdep {

namespace {

constexpr double kZ99 = 2.576;

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t x = base ^ (salt * 0x9e3779b97f4a7c15ULL + 0x7f4a7c15ULL);
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

/// Cell salt from the cell's content, so identical cells (e.g. the s = 0
/// point of a power grid vs. a level run) share their replicate streams.
std::uint64_t cell_salt(TestMethod method, const ScenarioSpec& spec) {
  std::uint64_t s_bits;
  static_assert(sizeof(s_bits) == sizeof(spec.s));
  std::memcpy(&s_bits, &spec.s, sizeof(s_bits));
  std::uint64_t salt = static_cast<std::uint64_t>(method) + 1;
  salt = salt * 1000003ULL + static_cast<std::uint64_t>(spec.scenario);
  salt = salt * 1000003ULL + static_cast<std::uint64_t>(spec.n);
  salt = salt * 1000003ULL + static_cast<std::uint64_t>(spec.p);
  salt = salt * 1000003ULL + static_cast<std::uint64_t>(spec.d);
  salt ^= s_bits;
  return salt;
}

struct RepOutcome {
  int status = 0;  // 0 pending, 1 ok, 2 error
  bool rejected = false;
  double p_value = 1.0;
  double fit_seconds = 0.0;
};

}  // namespace

void ExperimentGrid::validate() const {
  base.validate();
  if (mc_reps < 1) {
    throw NetdepError(ErrorCode::InvalidConfig, "mc_reps must be >= 1");
  }
  if (n_perm < 1) {
    throw NetdepError(ErrorCode::InvalidConfig, "n_perm must be >= 1");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw NetdepError(ErrorCode::InvalidConfig, "alpha must be in (0,1)");
  }
  if (methods.empty()) {
    throw NetdepError(ErrorCode::InvalidConfig, "no methods selected");
  }
  if (s_values.empty()) {
    throw NetdepError(ErrorCode::InvalidConfig, "no s values");
  }
}

CellResult run_cell(const ScenarioSpec& spec, TestMethod method, int mc_reps,
                    int n_perm, double alpha, std::uint64_t cell_seed,
                    int threads, const StatOptions& stat_options,
                    bool keep_p_values) {
  spec.validate();
  std::vector<RepOutcome> outcomes(mc_reps);

  parallel_for(mc_reps, threads, [&](int rep) {
    RepOutcome& out = outcomes[rep];
    try {
      RngStream draw_rng(derive_seed(cell_seed, 2 * rep), 0);
      const ScenarioDraw draw = generate_scenario(spec, draw_rng);

      PermutationOptions perm;
      perm.n_perm = n_perm;
      perm.seed = derive_seed(cell_seed, 2 * rep + 1);
      perm.threads = 1;  // parallelism lives at the replicate level here

      TestOutcome result;
      if (method == TestMethod::NetCca) {
        result = permutation_test(
            method, make_netcca_statistic(draw.graph, draw.covariates,
                                          stat_options),
            spec.n, perm);
      } else {
        const Embedding embedding = ase(draw.graph, spec.d);
        const Matrix& xhat = embedding.positions;
        switch (method) {
          case TestMethod::Ridge:
            result = permutation_test(
                method, make_ridge_statistic(xhat, draw.covariates,
                                             stat_options),
                spec.n, perm);
            break;
          case TestMethod::GroupLasso:
            result = permutation_test(
                method, make_glasso_statistic(xhat, draw.covariates,
                                              stat_options),
                spec.n, perm);
            break;
          case TestMethod::Lasso:
            result = permutation_test_per_dim(
                method, make_lasso_statistic(xhat, draw.covariates,
                                             stat_options),
                spec.n, perm);
            break;
          case TestMethod::Cca:
            result = permutation_test(
                method, make_cca_statistic(xhat, draw.covariates,
                                           stat_options),
                spec.n, perm);
            break;
          default:
            break;
        }
      }
      out.p_value = result.p_value;
      out.rejected = result.p_value <= alpha;
      out.fit_seconds = result.observed_seconds;
      out.status = 1;
    } catch (const NetdepError&) {
      out.status = 2;
    }
  });

  CellResult cell;
  cell.row.method = method;
  cell.row.scenario = spec.scenario;
  cell.row.s = spec.s;
  cell.row.n = spec.n;
  cell.row.p = spec.p;
  cell.row.mc_reps = mc_reps;

  int ok = 0;
  int rejections = 0;
  double fit_seconds = 0.0;
  for (const RepOutcome& out : outcomes) {
    if (out.status == 2) {
      ++cell.row.errors;
      continue;
    }
    ++ok;
    rejections += out.rejected ? 1 : 0;
    fit_seconds += out.fit_seconds;
    if (keep_p_values) cell.p_values.push_back(out.p_value);
  }
  if (ok > 0) {
    cell.row.rate = static_cast<double>(rejections) / ok;
    const double half =
        kZ99 * std::sqrt(cell.row.rate * (1.0 - cell.row.rate) / ok);
    cell.row.ci_low = cell.row.rate - half;
    cell.row.ci_high = cell.row.rate + half;
    cell.row.mean_fit_seconds = fit_seconds / ok;
  }
  return cell;
}

namespace {

std::vector<int> sizes_or_base(const std::vector<int>& values, int base) {
  return values.empty() ? std::vector<int>{base} : values;
}

}  // namespace

RejectionTable run_level_experiment(const ExperimentGrid& grid) {
  grid.validate();
  for (double s : grid.s_values) {
    if (s != 0.0) {
      throw NetdepError(ErrorCode::InvalidConfig,
                        "level experiments require s = 0");
    }
  }
  RejectionTable table;
  for (TestMethod method : grid.methods) {
    for (int n : sizes_or_base(grid.n_values, grid.base.n)) {
      for (int p : sizes_or_base(grid.p_values, grid.base.p)) {
        ScenarioSpec spec = grid.base;
        spec.s = 0.0;
        spec.n = n;
        spec.p = p;
        const CellResult cell =
            run_cell(spec, method, grid.mc_reps, grid.n_perm, grid.alpha,
                     derive_seed(grid.master_seed, cell_salt(method, spec)),
                     grid.threads, grid.stat_options, grid.keep_p_values);
        table.rows.push_back(cell.row);
        if (grid.keep_p_values) table.cell_p_values.push_back(cell.p_values);
      }
    }
  }
  return table;
}

RejectionTable run_power_curve(const ExperimentGrid& grid) {
  grid.validate();
  RejectionTable table;
  for (TestMethod method : grid.methods) {
    for (int n : sizes_or_base(grid.n_values, grid.base.n)) {
      for (int p : sizes_or_base(grid.p_values, grid.base.p)) {
        std::vector<double> rates;
        for (double s : grid.s_values) {
          ScenarioSpec spec = grid.base;
          spec.s = s;
          spec.n = n;
          spec.p = p;
          const CellResult cell = run_cell(
              spec, method, grid.mc_reps, grid.n_perm, grid.alpha,
              derive_seed(grid.master_seed, cell_salt(method, spec)),
              grid.threads, grid.stat_options, grid.keep_p_values);
          table.rows.push_back(cell.row);
          if (grid.keep_p_values) table.cell_p_values.push_back(cell.p_values);
          rates.push_back(cell.row.rate);
        }
        const std::vector<double> fit = isotonic_increasing_fit(rates);
        double deviation = 0.0;
        for (std::size_t i = 0; i < rates.size(); ++i) {
          deviation = std::max(deviation, std::abs(rates[i] - fit[i]));
        }
        table.diagnostics.push_back(PowerDiagnostic{method, n, p, deviation});
      }
    }
  }
  return table;
}

std::string diagnostics_csv(const RejectionTable& table) {
  std::ostringstream out;
  out << "method,n,p,max_isotonic_deviation\n";
  for (const PowerDiagnostic& diag : table.diagnostics) {
    out << test_method_name(diag.method) << ',' << diag.n << ',' << diag.p
        << ',' << diag.max_isotonic_deviation << '\n';
  }
  return out.str();
}

std::vector<std::pair<double, double>> qq_data(std::vector<double> p_values) {
  if (p_values.empty()) {
    throw NetdepError(ErrorCode::InvalidConfig, "no p-values");
  }
  std::sort(p_values.begin(), p_values.end());
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(p_values.size());
  const double n = static_cast<double>(p_values.size());
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    pairs.emplace_back((static_cast<double>(i) + 0.5) / n, p_values[i]);
  }
  return pairs;
}

double ks_distance_uniform(std::vector<double> values) {
  if (values.empty()) {
    throw NetdepError(ErrorCode::InvalidConfig, "no values");
  }
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::clamp(values[i], 0.0, 1.0);
    d = std::max(d, (static_cast<double>(i) + 1.0) / n - v);
    d = std::max(d, v - static_cast<double>(i) / n);
  }
  return d;
}

std::vector<double> isotonic_increasing_fit(const std::vector<double>& values) {
  // Pool adjacent violators with unit weights.
  std::vector<double> level;
  std::vector<int> count;
  for (double v : values) {
    level.push_back(v);
    count.push_back(1);
    while (level.size() > 1 &&
           level[level.size() - 2] > level[level.size() - 1]) {
      const double merged =
          (level[level.size() - 2] * count[count.size() - 2] +
           level[level.size() - 1] * count[count.size() - 1]) /
          (count[count.size() - 2] + count[count.size() - 1]);
      count[count.size() - 2] += count[count.size() - 1];
      level[level.size() - 2] = merged;
      level.pop_back();
      count.pop_back();
    }
  }
  std::vector<double> fit;
  fit.reserve(values.size());
  for (std::size_t block = 0; block < level.size(); ++block) {
    for (int i = 0; i < count[block]; ++i) fit.push_back(level[block]);
  }
  return fit;
}

std::string format_rejection_table(const RejectionTable& table) {
  std::ostringstream out;
  out << "method   scenario            s      n     p    rate    lb      ub      errs  fit_s\n";
  char line[256];
  for (const RejectionRow& row : table.rows) {
    std::snprintf(line, sizeof(line),
                  "%-8s %-18s %5.2f %6d %5d  %6.3f  %6.3f  %6.3f  %4d  %.4f\n",
                  test_method_name(row.method), scenario_name(row.scenario),
                  row.s, row.n, row.p, row.rate, row.ci_low, row.ci_high,
                  row.errors, row.mean_fit_seconds);
    out << line;
  }
  return out.str();
}

std::string rejection_table_csv(const RejectionTable& table) {
  std::ostringstream out;
  out << "method,scenario,s,n,p,rate,ci_low,ci_high,mc_reps,errors\n";
  for (const RejectionRow& row : table.rows) {
    out << test_method_name(row.method) << ',' << scenario_name(row.scenario)
        << ',' << row.s << ',' << row.n << ',' << row.p << ',' << row.rate
        << ',' << row.ci_low << ',' << row.ci_high << ',' << row.mc_reps << ','
        << row.errors << '\n';
  }
  return out.str();
}

std::string timing_csv(const RejectionTable& table) {
  std::ostringstream out;
  out << "method,scenario,s,n,p,mean_fit_seconds\n";
  for (const RejectionRow& row : table.rows) {
    out << test_method_name(row.method) << ',' << scenario_name(row.scenario)
        << ',' << row.s << ',' << row.n << ',' << row.p << ','
        << row.mean_fit_seconds << '\n';
  }
  return out.str();
}

BenchPreset bench_preset(const std::string& name) {
  if (name == "paper") return BenchPreset{1000, 100};
  if (name == "quick") return BenchPreset{200, 50};
  throw NetdepError(ErrorCode::InvalidConfig,
                    "unknown preset '" + name + "' (use paper or quick)");
}

}  // namespace netdep
