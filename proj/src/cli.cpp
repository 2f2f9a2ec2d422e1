#include "netdep/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <random>

#include "netdep/bench.hpp"
#include "netdep/cca.hpp"
#include "netdep/embedding.hpp"
#include "netdep/io_formats.hpp"
#include "netdep/threads.hpp"

namespace netdep {

namespace {

using nlohmann::json;

constexpr int kExitInvalidConfig = 2;
constexpr int kExitGenerationError = 3;
constexpr int kExitStatisticError = 4;
constexpr int kExitPartialFailure = 5;

int env_default_threads() {
  if (const char* env = std::getenv("NETDEP_THREADS")) {
    const int value = std::atoi(env);
    if (value > 0) return value;
  }
  return default_thread_count();
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  std::stringstream list(text);
  std::string token;
  while (std::getline(list, token, ',')) values.push_back(std::stoi(token));
  return values;
}

/// "auto" maps to -1; anything else must be a positive integer.
int parse_dim(const std::string& text) {
  if (text == "auto") return -1;
  try {
    const int value = std::stoi(text);
    if (value < 1) throw std::invalid_argument("dim");
    return value;
  } catch (const std::exception&) {
    throw NetdepError(ErrorCode::InvalidConfig,
                      "--dim must be 'auto' or a positive integer, got '" +
                          text + "'");
  }
}

std::uint64_t resolve_seed(bool seed_given, std::uint64_t seed) {
  if (seed_given) return seed;
  std::random_device entropy;
  const std::uint64_t drawn =
      (static_cast<std::uint64_t>(entropy()) << 32) ^ entropy();
  std::cout << "seed " << drawn << " (drawn from OS entropy)\n";
  return drawn;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::string> index_node_ids(int n) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (int i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  return ids;
}

void write_matrix_csv(const Matrix& m, const std::string& path) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  write_text_file(path, out);
}

struct SimulateArgs {
  std::string scenario = "i";
  int n = 100, p = 200, d = 4;
  double s = 0.0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_prefix = "draw";
};

int cmd_simulate(const SimulateArgs& args) {
  ScenarioSpec spec;
  try {
    spec.scenario = parse_scenario(args.scenario);
    spec.n = args.n;
    spec.p = args.p;
    spec.d = args.d;
    spec.s = args.s;
    spec.seed = resolve_seed(args.seed_given, args.seed);
    spec.validate();
  } catch (const NetdepError& err) {
    std::cerr << err.what() << '\n';
    return kExitInvalidConfig;
  }
  try {
    RngStream rng(spec.seed, 1);
    const ScenarioDraw draw = generate_scenario(spec, rng);

    save_edge_list(draw.graph, args.out_prefix + ".edges");

    Covariates covariates;
    covariates.values = draw.covariates;
    for (int j = 0; j < spec.p; ++j) {
      covariates.column_names.push_back("z" + std::to_string(j + 1));
    }
    save_covariates_csv(covariates, index_node_ids(spec.n),
                        args.out_prefix + ".cov.csv");

    json truth;
    truth["config"] = {{"scenario", scenario_name(spec.scenario)},
                       {"n", spec.n},       {"p", spec.p},
                       {"d", spec.d},       {"s", spec.s},
                       {"seed", spec.seed}, {"kind",
                        draw.graph.kind == GraphKind::Binary ? "binary"
                                                             : "weighted"}};
    truth["latent"] = matrix_to_json(draw.latent.values);
    truth["coefficients"] = matrix_to_json(draw.coefficients);
    truth["groups"] = draw.groups.has_value() ? json(*draw.groups) : json();
    write_text_file(args.out_prefix + ".truth.json", truth.dump(2) + "\n");
    return 0;
  } catch (const NetdepError& err) {
    std::cerr << err.what() << '\n';
    return kExitGenerationError;
  }
}

struct EmbedArgs {
  std::string graph;
  bool weighted = false;
  std::string dim = "auto";
  int d_max = 20;
  std::string out_prefix = "embedding";
};

int cmd_embed(const EmbedArgs& args) {
  try {
    const int dim_request = parse_dim(args.dim);
    const EdgeListResult loaded = load_edge_list(args.graph, args.weighted,
                                                 /*symmetrize=*/true);
    const int n = loaded.graph.n();
    int d;
    Embedding full = ase(loaded.graph, 1);
    if (dim_request < 0) {
      d = select_dimension(full.full_spectrum, std::min(args.d_max, n - 1));
      std::cout << "selected dimension " << d << " (spectrum: "
                << args.out_prefix << ".spectrum.csv)\n";
    } else {
      d = dim_request;
    }
    const Embedding embedding = ase(loaded.graph, d);
    write_matrix_csv(embedding.positions, args.out_prefix + ".embedding.csv");
    write_matrix_csv(embedding.full_spectrum,
                     args.out_prefix + ".spectrum.csv");
    json config;
    config["command"] = "embed";
    config["graph"] = args.graph;
    config["weighted"] = args.weighted;
    config["dim_requested"] = args.dim;
    config["dim"] = d;
    config["d_max"] = args.d_max;
    config["n"] = n;
    config["self_loops_dropped"] = loaded.self_loops_dropped;
    write_text_file(args.out_prefix + ".config.json", config.dump(2) + "\n");
    return 0;
  } catch (const NetdepError& err) {
    std::cerr << err.what() << '\n';
    return err.code() == ErrorCode::NonPositiveEigenvalue
               ? kExitStatisticError
               : kExitInvalidConfig;
  }
}

struct TestArgs {
  std::string graph;
  std::string cov;
  bool weighted = false;
  std::string method = "glasso";
  std::string dim = "auto";
  int d_max = 20;
  int n_perm = 100;
  double tau = -1.0;
  double gamma = -1.0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string json_out;
  bool no_replicates = false;
  bool standardize = false;
  bool freeze_ridge_cv = false;
  std::string directions_out;  // cca/netcca: canonical direction CSVs
  int threads = 0;
};

int cmd_test(const TestArgs& args) {
  TestMethod method;
  EdgeListResult loaded{Graph{}, {}, 0};
  Covariates covariates;
  std::uint64_t seed = 0;
  int dim_request = -1;
  try {
    method = parse_test_method(args.method);
    dim_request = parse_dim(args.dim);
    loaded = load_edge_list(args.graph, args.weighted, /*symmetrize=*/true);
    covariates = load_covariates_csv(args.cov, loaded.node_ids);
    seed = resolve_seed(args.seed_given, args.seed);
  } catch (const NetdepError& err) {
    std::cerr << err.what() << '\n';
    return kExitInvalidConfig;
  }

  const int n = loaded.graph.n();
  const int threads = args.threads > 0 ? args.threads : env_default_threads();

  StatOptions stat_options;
  stat_options.gamma = args.gamma;
  stat_options.tau = args.tau;
  stat_options.standardize_z = args.standardize;
  stat_options.rerun_cv = !args.freeze_ridge_cv;
  stat_options.observed_details = std::make_shared<std::string>();

  json config;
  config["command"] = "test";
  config["graph"] = args.graph;
  config["cov"] = args.cov;
  config["method"] = args.method;
  config["n"] = n;
  config["p"] = static_cast<int>(covariates.values.cols());
  config["n_perm"] = args.n_perm;
  config["seed"] = seed;
  config["threads"] = threads;
  config["standardize"] = args.standardize;
  config["tau"] =
      args.tau > 0.0 ? args.tau : default_network_tau(n);
  config["gamma"] = args.gamma >= 0.0 ? json(args.gamma) : json("auto");

  try {
    int d = 0;
    Matrix xhat;
    if (method != TestMethod::NetCca) {
      // netcca works on the adjacency directly and skips the embedding.
      const Embedding probe = ase(loaded.graph, 1);
      if (dim_request < 0) {
        d = select_dimension(probe.full_spectrum, std::min(args.d_max, n - 1));
        const std::string spectrum_path =
            (args.json_out.empty() ? std::string("spectrum.csv")
                                   : args.json_out + ".spectrum.csv");
        write_matrix_csv(probe.full_spectrum, spectrum_path);
        std::cout << "selected dimension " << d << " (spectrum: "
                  << spectrum_path << ")\n";
      } else {
        d = dim_request;
      }
      xhat = ase(loaded.graph, d).positions;
      config["dim"] = d;
    } else {
      config["dim"] = nullptr;
    }

    PermutationOptions perm;
    perm.n_perm = args.n_perm;
    perm.seed = seed;
    perm.threads = threads;
    perm.config_echo = config.dump();

    TestOutcome outcome;
    switch (method) {
      case TestMethod::Ridge:
        outcome = permutation_test(
            method, make_ridge_statistic(xhat, covariates.values, stat_options),
            n, perm);
        break;
      case TestMethod::GroupLasso:
        outcome = permutation_test(
            method,
            make_glasso_statistic(xhat, covariates.values, stat_options), n,
            perm);
        break;
      case TestMethod::Lasso:
        outcome = permutation_test_per_dim(
            method, make_lasso_statistic(xhat, covariates.values, stat_options),
            n, perm);
        break;
      case TestMethod::Cca:
        outcome = permutation_test(
            method, make_cca_statistic(xhat, covariates.values, stat_options),
            n, perm);
        break;
      case TestMethod::NetCca:
        outcome = permutation_test(
            method,
            make_netcca_statistic(loaded.graph, covariates.values,
                                  stat_options),
            n, perm);
        break;
    }

    if (!args.directions_out.empty() &&
        (method == TestMethod::Cca || method == TestMethod::NetCca)) {
      const Matrix sigma_z =
          covariance_blocks(covariates.values, covariates.values).sigma_z;
      const double gamma_z =
          args.gamma >= 0.0
              ? args.gamma
              : default_cca_gamma(sigma_z, n,
                                  static_cast<int>(covariates.values.cols()));
      const CcaResult observed =
          method == TestMethod::Cca
              ? cca_coefficient(xhat, covariates.values, gamma_z)
              : network_cca_coefficient(
                    loaded.graph, covariates.values,
                    args.tau > 0.0 ? args.tau : default_network_tau(n),
                    gamma_z);
      write_matrix_csv(observed.direction_u, args.directions_out + ".u.csv");
      write_matrix_csv(observed.direction_v, args.directions_out + ".v.csv");
    }

    outcome.observed_details_json = *stat_options.observed_details;
    const std::string text = test_outcome_json(outcome, !args.no_replicates);
    if (args.json_out.empty()) {
      std::cout << text;
    } else {
      write_text_file(args.json_out, text);
      std::cout << "method " << args.method << " p_value "
                << outcome.p_value << " -> " << args.json_out << '\n';
    }
    return 0;
  } catch (const NetdepError& err) {
    json report;
    report["error"] = {{"code", error_code_name(err.code())},
                       {"message", err.what()}};
    report["config"] = config;
    const std::string text = report.dump(2) + "\n";
    if (args.json_out.empty()) {
      std::cout << text;
    } else {
      write_text_file(args.json_out, text);
    }
    std::cerr << err.what() << '\n';
    return kExitStatisticError;
  }
}

struct BenchArgs {
  std::string preset = "quick";
  std::string scenario = "i";
  std::string methods = "ridge,lasso,glasso,cca,netcca";
  std::string mode = "level";
  std::string s_grid = "0,0.5,1,1.5,2";
  std::string n_grid;  // optional comma list; overrides --n
  std::string p_grid;  // optional comma list; overrides --p
  int n = 100, p = 200, d = 4;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = "bench_out";
  bool keep_p_values = false;
  int threads = 0;
};

int cmd_bench(const BenchArgs& args) {
  ExperimentGrid grid;
  try {
    const BenchPreset preset = bench_preset(args.preset);
    grid.base.scenario = parse_scenario(args.scenario);
    grid.base.n = args.n;
    grid.base.p = args.p;
    grid.base.d = grid.base.scenario == Scenario::AssortativeMixing ? 4
                                                                     : args.d;
    grid.mc_reps = preset.mc_reps;
    grid.n_perm = preset.n_perm;
    grid.alpha = args.alpha;
    grid.master_seed = resolve_seed(args.seed_given, args.seed);
    grid.base.seed = grid.master_seed;
    grid.threads = args.threads > 0 ? args.threads : env_default_threads();

    std::stringstream method_list(args.methods);
    std::string token;
    while (std::getline(method_list, token, ',')) {
      grid.methods.push_back(parse_test_method(token));
    }
    if (!args.n_grid.empty()) grid.n_values = parse_int_list(args.n_grid);
    if (!args.p_grid.empty()) grid.p_values = parse_int_list(args.p_grid);
    grid.keep_p_values = args.keep_p_values;

    if (args.mode == "level") {
      grid.s_values = {0.0};
    } else if (args.mode == "power") {
      grid.s_values.clear();
      std::stringstream s_list(args.s_grid);
      while (std::getline(s_list, token, ',')) {
        grid.s_values.push_back(std::stod(token));
      }
    } else {
      throw NetdepError(ErrorCode::InvalidConfig,
                        "mode must be level or power");
    }
    grid.validate();
  } catch (const NetdepError& err) {
    std::cerr << err.what() << '\n';
    return kExitInvalidConfig;
  } catch (const std::exception& err) {
    std::cerr << err.what() << '\n';
    return kExitInvalidConfig;
  }

  std::filesystem::create_directories(args.out_dir);
  const RejectionTable table = args.mode == "level"
                                   ? run_level_experiment(grid)
                                   : run_power_curve(grid);

  write_text_file(args.out_dir + "/rejection.csv", rejection_table_csv(table));
  write_text_file(args.out_dir + "/timing.csv", timing_csv(table));
  write_text_file(args.out_dir + "/table.txt", format_rejection_table(table));
  if (!table.diagnostics.empty()) {
    write_text_file(args.out_dir + "/diagnostics.csv", diagnostics_csv(table));
  }
  if (args.keep_p_values) {
    for (std::size_t i = 0; i < table.cell_p_values.size(); ++i) {
      const RejectionRow& row = table.rows[i];
      std::string csv = "p_value\n";
      for (double p : table.cell_p_values[i]) csv += format_double(p) + "\n";
      std::ostringstream name;
      name << args.out_dir << "/pvalues_" << test_method_name(row.method)
           << "_n" << row.n << "_p" << row.p << "_s" << row.s << ".csv";
      write_text_file(name.str(), csv);
    }
  }

  json config;
  config["command"] = "bench";
  config["preset"] = args.preset;
  config["scenario"] = args.scenario;
  config["methods"] = args.methods;
  config["mode"] = args.mode;
  config["n"] = grid.base.n;
  config["p"] = grid.base.p;
  config["d"] = grid.base.d;
  config["mc_reps"] = grid.mc_reps;
  config["n_perm"] = grid.n_perm;
  config["alpha"] = grid.alpha;
  config["seed"] = grid.master_seed;
  config["threads"] = grid.threads;
  write_text_file(args.out_dir + "/config.json", config.dump(2) + "\n");

  std::cout << format_rejection_table(table);
  int total_errors = 0;
  for (const RejectionRow& row : table.rows) total_errors += row.errors;
  if (total_errors > 0) {
    std::cerr << total_errors << " replicate(s) failed; see rejection.csv\n";
    return kExitPartialFailure;
  }
  return 0;
}

struct QqArgs {
  std::string in;
  std::string out = "qq.csv";
};

int cmd_qq(const QqArgs& args) {
  try {
    std::istringstream in(read_text_file(args.in));
    std::vector<double> p_values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        p_values.push_back(std::stod(line));
      } catch (const std::exception&) {
        if (line_no == 1) continue;  // header row
        throw NetdepError(ErrorCode::NonNumericCell,
                          args.in + ": line " + std::to_string(line_no));
      }
    }
    const auto pairs = qq_data(p_values);
    std::string out = "uniform_quantile,empirical_quantile\n";
    for (const auto& [u, e] : pairs) {
      out += format_double(u) + "," + format_double(e) + "\n";
    }
    write_text_file(args.out, out);
    std::cout << "qq: " << pairs.size() << " p-values from " << args.in
              << " -> " << args.out << '\n';
    return 0;
  } catch (const NetdepError& err) {
    std::cerr << err.what() << '\n';
    return kExitInvalidConfig;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Permutation tests for association between network structure "
               "and node covariates"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand(
      "simulate", "Draw a synthetic scenario and write it to disk");
  simulate->add_option("--scenario", sim.scenario,
                       "i|ii|iii|iv|v|vi or long name");
  simulate->add_option("--n", sim.n, "nodes");
  simulate->add_option("--p", sim.p, "covariates");
  simulate->add_option("--d", sim.d, "latent dimension");
  simulate->add_option("--s", sim.s, "root signal-to-noise ratio");
  auto* sim_seed = simulate->add_option("--seed", sim.seed, "RNG seed");
  simulate->add_option("--out-prefix", sim.out_prefix, "output path prefix");

  EmbedArgs emb;
  auto* embed = app.add_subcommand("embed",
                                   "Spectral embedding of a graph file");
  embed->add_option("--graph", emb.graph, "edge list path")->required();
  embed->add_flag("--weighted", emb.weighted, "treat weights as real-valued");
  embed->add_option("--dim", emb.dim, "latent dimension or 'auto'");
  embed->add_option("--d-max", emb.d_max, "cap for automatic selection");
  embed->add_option("--out-prefix", emb.out_prefix, "output path prefix");

  TestArgs test;
  auto* test_cmd = app.add_subcommand(
      "test", "Permutation test of network/covariate association");
  test_cmd->add_option("--graph", test.graph, "edge list path")->required();
  test_cmd->add_option("--cov", test.cov, "covariate CSV path")->required();
  test_cmd->add_flag("--weighted", test.weighted, "graph weights are real");
  test_cmd->add_option("--method", test.method,
                       "ridge|lasso|glasso|cca|netcca");
  test_cmd->add_option("--dim", test.dim, "latent dimension or 'auto'");
  test_cmd->add_option("--d-max", test.d_max, "cap for automatic selection");
  test_cmd->add_option("--n-perm", test.n_perm, "permutation count");
  test_cmd->add_option("--tau", test.tau,
                       "network CCA regularization (default sqrt(n))");
  test_cmd->add_option("--gamma", test.gamma,
                       "CCA covariance ridge (default: auto)");
  auto* test_seed = test_cmd->add_option("--seed", test.seed, "RNG seed");
  test_cmd->add_option("--json-out", test.json_out, "result JSON path");
  test_cmd->add_flag("--no-replicates", test.no_replicates,
                     "omit the replicate vector from JSON");
  test_cmd->add_flag("--standardize", test.standardize,
                     "standardize covariate columns");
  test_cmd->add_flag("--freeze-ridge-cv", test.freeze_ridge_cv,
                     "ridge: select the penalty once instead of per replicate");
  test_cmd->add_option("--directions-out", test.directions_out,
                       "cca/netcca: write canonical directions as CSVs");
  test_cmd->add_option("--threads", test.threads, "worker threads");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand(
      "bench", "Monte Carlo level/power experiments");
  bench_cmd->add_option("--preset", bench.preset, "paper|quick");
  bench_cmd->add_option("--scenario", bench.scenario, "scenario id");
  bench_cmd->add_option("--methods", bench.methods, "comma-separated subset");
  bench_cmd->add_option("--mode", bench.mode, "level|power");
  bench_cmd->add_option("--s-grid", bench.s_grid, "s values for power mode");
  bench_cmd->add_option("--n-grid", bench.n_grid, "node-count grid");
  bench_cmd->add_option("--p-grid", bench.p_grid, "covariate-count grid");
  bench_cmd->add_flag("--keep-p-values", bench.keep_p_values,
                      "write per-cell p-value CSVs (for qq)");
  bench_cmd->add_option("--n", bench.n, "nodes");
  bench_cmd->add_option("--p", bench.p, "covariates");
  bench_cmd->add_option("--d", bench.d, "latent dimension");
  bench_cmd->add_option("--alpha", bench.alpha, "test level");
  auto* bench_seed = bench_cmd->add_option("--seed", bench.seed, "master seed");
  bench_cmd->add_option("--out-dir", bench.out_dir, "output directory");
  bench_cmd->add_option("--threads", bench.threads, "worker threads");

  QqArgs qq;
  auto* qq_cmd = app.add_subcommand("qq", "QQ pairs from a p-value CSV");
  qq_cmd->add_option("--in", qq.in, "single-column p-value CSV")->required();
  qq_cmd->add_option("--out", qq.out, "output CSV path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalidConfig;
  }

  sim.seed_given = sim_seed->count() > 0;
  test.seed_given = test_seed->count() > 0;
  bench.seed_given = bench_seed->count() > 0;

  if (simulate->parsed()) return cmd_simulate(sim);
  if (embed->parsed()) return cmd_embed(emb);
  if (test_cmd->parsed()) return cmd_test(test);
  if (bench_cmd->parsed()) return cmd_bench(bench);
  if (qq_cmd->parsed()) return cmd_qq(qq);
  return kExitInvalidConfig;
}

}  // namespace netdep
