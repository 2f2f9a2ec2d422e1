#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>

namespace netdep {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Error categories used throughout the library. Every throwing code path
/// raises a NetdepError carrying one of these codes, so callers can branch
/// on the failure kind without string matching.
enum class ErrorCode {
  OutOfRangeProbability,
  InvalidDimension,
  InvalidAlpha,
  NonPositiveEigenvalue,
  SingularSystem,
  MaxIterations,
  NonUniqueMax,
  DegenerateGram,
  OutOfKnotRange,
  NonPositiveVariance,
  SingularCovariance,
  NotPositiveDefinite,
  ParseError,
  AsymmetricInput,
  MissingNode,
  NonNumericCell,
  InvalidConfig,
};

const char* error_code_name(ErrorCode code);

class NetdepError : public std::runtime_error {
 public:
  NetdepError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

enum class GraphKind { Binary, Weighted };

/// Symmetric dense adjacency matrix. Construction goes through make() which
/// enforces exact symmetry (and {0,1} entries for binary graphs).
struct Graph {
  Matrix adjacency;
  GraphKind kind = GraphKind::Binary;

  int n() const { return static_cast<int>(adjacency.rows()); }

  static Graph make(Matrix adjacency, GraphKind kind);
};

/// Per-node latent vectors, one row per node.
struct LatentPositions {
  Matrix values;

  int n() const { return static_cast<int>(values.rows()); }
  int dim() const { return static_cast<int>(values.cols()); }
};

}  // namespace netdep
