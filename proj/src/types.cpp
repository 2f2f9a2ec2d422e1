#include "netdep/types.hpp"

#include "netdep/linalg.hpp"

namespace netdep {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfRangeProbability: return "OutOfRangeProbability";
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::NonPositiveEigenvalue: return "NonPositiveEigenvalue";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::NonUniqueMax: return "NonUniqueMax";
    case ErrorCode::DegenerateGram: return "DegenerateGram";
    case ErrorCode::OutOfKnotRange: return "OutOfKnotRange";
    case ErrorCode::NonPositiveVariance: return "NonPositiveVariance";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::AsymmetricInput: return "AsymmetricInput";
    case ErrorCode::MissingNode: return "MissingNode";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "UnknownError";
}

Graph Graph::make(Matrix adjacency, GraphKind kind) {
  if (adjacency.rows() != adjacency.cols()) {
    throw NetdepError(ErrorCode::InvalidDimension, "adjacency must be square");
  }
  if (max_asymmetry(adjacency) != 0.0) {
    throw NetdepError(ErrorCode::AsymmetricInput,
                      "adjacency must be exactly symmetric");
  }
  if (kind == GraphKind::Binary) {
    for (Eigen::Index j = 0; j < adjacency.cols(); ++j) {
      for (Eigen::Index i = 0; i < adjacency.rows(); ++i) {
        const double a = adjacency(i, j);
        if (a != 0.0 && a != 1.0) {
          throw NetdepError(ErrorCode::InvalidConfig,
                            "binary graph entry not in {0,1}");
        }
      }
    }
  }
  Graph g;
  g.adjacency = std::move(adjacency);
  g.kind = kind;
  return g;
}

}  // namespace netdep
