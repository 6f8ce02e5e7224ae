#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lds/core/error.hpp"

namespace lds {

/// Representation vector. Sample reps, label reps and prototypes all share
/// this type; the dimension is fixed per run.
using Vector = Eigen::VectorXd;

/// Row-major dense matrix, used for embedding tables and gradient tables so
/// that a single row is contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline bool all_finite(const Vector& v) { return v.allFinite(); }

/// Throws unless every vector is finite and has dimension `dim`.
inline void check_vectors(const std::vector<Vector>& vs, Eigen::Index dim, const char* what) {
  for (const auto& v : vs) {
    if (v.size() != dim) {
      throw DataError(std::string(what) + ": dimension mismatch (expected " + std::to_string(dim) +
                      ", got " + std::to_string(v.size()) + ")");
    }
    if (!v.allFinite()) throw NumericalError(std::string(what) + ": non-finite component");
  }
}

/// One N-way K-shot task expressed as dataset sample indices.
///
/// `support[i]` and `query[i]` hold the sample indices for class slot i,
/// whose label is `class_names[i]`.
struct Episode {
  std::size_t n_way = 0;
  std::size_t k_shot = 0;
  std::size_t m_query = 0;
  std::vector<std::string> class_names;
  std::vector<std::vector<std::size_t>> support;
  std::vector<std::vector<std::size_t>> query;
};

/// An episode after embedding. Support and query reps are stored per class
/// slot; `label_reps[i]` is the representation of `class_names[i]`.
struct EmbeddedEpisode {
  std::vector<std::string> class_names;
  std::vector<std::vector<Vector>> support_reps;
  std::vector<std::vector<Vector>> query_reps;
  std::vector<Vector> label_reps;

  std::size_t n_way() const { return class_names.size(); }
  Eigen::Index dim() const { return label_reps.empty() ? 0 : label_reps.front().size(); }

  /// Throws if the episode violates its shape or dimension invariants.
  void validate() const {
    const std::size_t n = class_names.size();
    if (support_reps.size() != n || query_reps.size() != n || label_reps.size() != n) {
      throw DataError("embedded episode: per-class arrays disagree with class count");
    }
    const auto d = dim();
    check_vectors(label_reps, d, "label reps");
    for (std::size_t i = 0; i < n; ++i) {
      check_vectors(support_reps[i], d, "support reps");
      check_vectors(query_reps[i], d, "query reps");
    }
  }
};

}  // namespace lds
