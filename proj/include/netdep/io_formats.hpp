#pragma once

#include <string>
#include <vector>

#include "netdep/graph_model.hpp"
#include "netdep/permtest.hpp"
#include "netdep/types.hpp"

namespace netdep {

struct Covariates {
  Matrix values;  // n x p
  std::vector<std::string> column_names;
};

struct Dataset {
  Graph graph;
  Covariates covariates;
  std::vector<std::string> node_ids;
};

/// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double value);

struct EdgeListResult {
  Graph graph;
  std::vector<std::string> node_ids;  // first-appearance order
  int self_loops_dropped = 0;
};

/// Whitespace-separated `u v [w]` lines; `#` starts a comment. Node labels
/// are arbitrary strings indexed in order of first appearance. Duplicate
/// edges: OR for binary, last-wins for weighted. Binary mode drops
/// self-loops (counted); weighted mode keeps them as diagonal entries so
/// exported graphs round-trip exactly. With symmetrize off, the assembled
/// matrix must already be symmetric or AsymmetricInput is thrown.
EdgeListResult load_edge_list(const std::string& path, bool weighted,
                              bool symmetrize);

/// Upper-triangle export (0-based, full-precision weights). Every node is
/// anchored by a diagonal line so isolated vertices and the node order
/// survive a round trip.
void save_edge_list(const Graph& graph, const std::string& path);

/// CSV with a header row whose first column is the node id. Rows are
/// reordered to match node_ids; missing ids raise MissingNode, non-numeric
/// cells raise NonNumericCell with coordinates.
Covariates load_covariates_csv(const std::string& path,
                               const std::vector<std::string>& node_ids);

void save_covariates_csv(const Covariates& covariates,
                         const std::vector<std::string>& node_ids,
                         const std::string& path);

/// Flat key-value text config: scenario, n, p, d, s, seed.
ScenarioSpec load_scenario_config(const std::string& path);
void save_scenario_config(const ScenarioSpec& spec, const std::string& path);

/// TestOutcome as JSON text (schema shipped in schemas/test_outcome.schema.json).
std::string test_outcome_json(const TestOutcome& outcome,
                              bool include_replicates);
void write_test_outcome(const TestOutcome& outcome, const std::string& path,
                        bool include_replicates);

/// Coefficient export: `<prefix>.csv` holds the p x d matrix, and
/// `<prefix>.json` records penalty, objective, KKT residual and the active
/// row support.
void save_group_lasso_fit(const struct GroupLassoFit& fit,
                          const std::string& prefix);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace netdep
