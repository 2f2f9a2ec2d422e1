#include "netdep/io_formats.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "netdep/regression.hpp"

namespace netdep {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    // Trim surrounding spaces; quoting is not supported.
    const auto begin = cell.find_first_not_of(" \t\r");
    const auto end = cell.find_last_not_of(" \t\r");
    cells.push_back(begin == std::string::npos
                        ? std::string()
                        : cell.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& text, int row, int col) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  double value = 0.0;
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    throw NetdepError(ErrorCode::NonNumericCell,
                      "cell (" + std::to_string(row) + ", " +
                          std::to_string(col) + ") = '" + text +
                          "' is not numeric");
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto result =
      std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw NetdepError(ErrorCode::ParseError, "cannot open " + path +
                                                 " for writing");
  }
  out << contents;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw NetdepError(ErrorCode::ParseError, "cannot open " + path);
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

EdgeListResult load_edge_list(const std::string& path, bool weighted,
                              bool symmetrize) {
  std::ifstream in(path);
  if (!in) {
    throw NetdepError(ErrorCode::ParseError, "cannot open " + path);
  }
  std::map<std::string, int> index;
  std::vector<std::string> node_ids;
  struct Entry {
    int u, v;
    double w;
  };
  std::vector<Entry> entries;
  int self_loops = 0;

  auto intern = [&](const std::string& label) {
    const auto [it, inserted] =
        index.emplace(label, static_cast<int>(node_ids.size()));
    if (inserted) node_ids.push_back(label);
    return it->second;
  };

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string u_label, v_label;
    if (!(fields >> u_label)) continue;  // blank line
    if (!(fields >> v_label)) {
      throw NetdepError(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) +
                            ": expected 'u v [w]'");
    }
    double w = 1.0;
    std::string w_text;
    if (fields >> w_text) {
      w = parse_cell(w_text, line_no, 3);
    }
    std::string extra;
    if (fields >> extra) {
      throw NetdepError(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) +
                            ": trailing field '" + extra + "'");
    }
    const int u = intern(u_label);
    const int v = intern(v_label);
    if (u == v && !weighted) {
      ++self_loops;
      continue;
    }
    if (!weighted && w != 0.0) w = 1.0;
    entries.push_back(Entry{u, v, w});
  }

  const int n = static_cast<int>(node_ids.size());
  if (n == 0) {
    throw NetdepError(ErrorCode::ParseError, "no edges in " + path);
  }
  Matrix a = Matrix::Zero(n, n);
  for (const Entry& e : entries) {
    if (weighted) {
      a(e.u, e.v) = e.w;  // duplicates: last wins
      if (symmetrize) a(e.v, e.u) = e.w;
    } else {
      const double value = std::max(a(e.u, e.v), e.w);  // duplicates: OR
      a(e.u, e.v) = value;
      if (symmetrize) a(e.v, e.u) = value;
    }
  }
  if (!symmetrize && (a - a.transpose()).cwiseAbs().maxCoeff() != 0.0) {
    throw NetdepError(ErrorCode::AsymmetricInput,
                      path + " is not symmetric and symmetrize is off");
  }

  EdgeListResult result{
      Graph::make(std::move(a),
                  weighted ? GraphKind::Weighted : GraphKind::Binary),
      std::move(node_ids), self_loops};
  return result;
}

void save_edge_list(const Graph& graph, const std::string& path) {
  std::ostringstream out;
  const int n = graph.n();
  // Diagonal lines first: they anchor every node label in index order, so
  // isolated vertices and the node ordering survive a round trip.
  for (int i = 0; i < n; ++i) {
    out << i << ' ' << i << ' ' << format_double(graph.adjacency(i, i))
        << '\n';
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double w = graph.adjacency(i, j);
      if (w != 0.0) {
        out << i << ' ' << j << ' ' << format_double(w) << '\n';
      }
    }
  }
  write_text_file(path, out.str());
}

Covariates load_covariates_csv(const std::string& path,
                               const std::vector<std::string>& node_ids) {
  std::ifstream in(path);
  if (!in) {
    throw NetdepError(ErrorCode::ParseError, "cannot open " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw NetdepError(ErrorCode::ParseError, path + ": missing header row");
  }
  const auto header = split_csv_line(line);
  if (header.size() < 2) {
    throw NetdepError(ErrorCode::ParseError,
                      path + ": header needs an id column plus covariates");
  }
  const int p = static_cast<int>(header.size()) - 1;

  std::map<std::string, Vector> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != p + 1) {
      throw NetdepError(ErrorCode::ParseError,
                        path + ": line " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(p + 1));
    }
    Vector row(p);
    for (int j = 0; j < p; ++j) {
      row[j] = parse_cell(cells[j + 1], line_no, j + 2);
    }
    rows[cells[0]] = std::move(row);
  }

  Covariates covariates;
  covariates.column_names.assign(header.begin() + 1, header.end());
  covariates.values.resize(static_cast<Eigen::Index>(node_ids.size()), p);
  std::string missing;
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    const auto it = rows.find(node_ids[i]);
    if (it == rows.end()) {
      missing += (missing.empty() ? "" : ", ") + node_ids[i];
      continue;
    }
    covariates.values.row(static_cast<Eigen::Index>(i)) =
        it->second.transpose();
  }
  if (!missing.empty()) {
    throw NetdepError(ErrorCode::MissingNode,
                      path + ": no covariate rows for nodes " + missing);
  }
  return covariates;
}

void save_covariates_csv(const Covariates& covariates,
                         const std::vector<std::string>& node_ids,
                         const std::string& path) {
  if (static_cast<Eigen::Index>(node_ids.size()) != covariates.values.rows()) {
    throw NetdepError(ErrorCode::InvalidDimension,
                      "node id count does not match covariate rows");
  }
  std::ostringstream out;
  out << "node_id";
  for (const std::string& name : covariates.column_names) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < covariates.values.rows(); ++i) {
    out << node_ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < covariates.values.cols(); ++j) {
      out << ',' << format_double(covariates.values(i, j));
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

ScenarioSpec load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw NetdepError(ErrorCode::ParseError, "cannot open " + path);
  }
  ScenarioSpec spec;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw NetdepError(ErrorCode::ParseError,
                          path + ": line " + std::to_string(line_no) +
                              " is not key=value");
      }
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "scenario") {
      spec.scenario = parse_scenario(value);
    } else if (key == "n") {
      spec.n = std::stoi(value);
    } else if (key == "p") {
      spec.p = std::stoi(value);
    } else if (key == "d") {
      spec.d = std::stoi(value);
    } else if (key == "s") {
      spec.s = std::stod(value);
    } else if (key == "seed") {
      spec.seed = std::stoull(value);
    } else {
      throw NetdepError(ErrorCode::ParseError,
                        path + ": unknown key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

void save_scenario_config(const ScenarioSpec& spec, const std::string& path) {
  std::ostringstream out;
  out << "scenario=" << scenario_name(spec.scenario) << '\n'
      << "n=" << spec.n << '\n'
      << "p=" << spec.p << '\n'
      << "d=" << spec.d << '\n'
      << "s=" << format_double(spec.s) << '\n'
      << "seed=" << spec.seed << '\n';
  write_text_file(path, out.str());
}

std::string test_outcome_json(const TestOutcome& outcome,
                              bool include_replicates) {
  json root;
  root["method"] = test_method_name(outcome.method);
  root["observed"] = outcome.observed;
  root["p_value"] = outcome.p_value;
  root["n_perm"] = outcome.n_perm;
  root["seed"] = outcome.seed;
  if (outcome.config_echo.empty()) {
    root["config"] = json::object();
  } else {
    root["config"] = json::parse(outcome.config_echo);
  }
  if (include_replicates) {
    root["replicates"] = outcome.replicates;
  }
  if (outcome.per_dim_observed.has_value()) {
    json per_dim;
    per_dim["observed"] =
        std::vector<double>(outcome.per_dim_observed->begin(),
                            outcome.per_dim_observed->end());
    per_dim["p_values"] =
        std::vector<double>(outcome.per_dim_p_values->begin(),
                            outcome.per_dim_p_values->end());
    root["per_dimension"] = per_dim;
  }
  if (outcome.observed_details_json.has_value() &&
      !outcome.observed_details_json->empty()) {
    root["observed_details"] = json::parse(*outcome.observed_details_json);
  }
  return root.dump(2) + "\n";
}

void write_test_outcome(const TestOutcome& outcome, const std::string& path,
                        bool include_replicates) {
  write_text_file(path, test_outcome_json(outcome, include_replicates));
}

void save_group_lasso_fit(const GroupLassoFit& fit, const std::string& prefix) {
  std::ostringstream csv;
  for (Eigen::Index i = 0; i < fit.coefficients.rows(); ++i) {
    for (Eigen::Index j = 0; j < fit.coefficients.cols(); ++j) {
      if (j) csv << ',';
      csv << format_double(fit.coefficients(i, j));
    }
    csv << '\n';
  }
  write_text_file(prefix + ".csv", csv.str());

  json sidecar;
  sidecar["lambda"] = fit.penalty;
  sidecar["objective"] = fit.objective;
  sidecar["kkt_residual"] = fit.kkt_residual;
  std::vector<int> support;
  for (Eigen::Index j = 0; j < fit.coefficients.rows(); ++j) {
    if (fit.coefficients.row(j).norm() > 0.0) {
      support.push_back(static_cast<int>(j));
    }
  }
  sidecar["support"] = support;
  write_text_file(prefix + ".json", sidecar.dump(2) + "\n");
}

}  // namespace netdep
