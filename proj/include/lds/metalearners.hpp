#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lds/core/error.hpp"
#include "lds/core/types.hpp"

namespace lds {

enum class MetaLearnerKind { kPN, kRRML };

inline std::string_view to_string(MetaLearnerKind k) { return k == MetaLearnerKind::kPN ? "pn" : "rrml"; }

inline MetaLearnerKind parse_metalearner(std::string_view s) {
  if (s == "pn") return MetaLearnerKind::kPN;
  if (s == "rrml") return MetaLearnerKind::kRRML;
  throw ConfigError("unknown meta-learner '" + std::string(s) + "' (expected pn or rrml)");
}

/// Class means of the support reps, one per episode class slot.
inline std::vector<Vector> compute_prototypes(const std::vector<std::vector<Vector>>& support) {
  std::vector<Vector> out;
  out.reserve(support.size());
  for (const auto& cls : support) {
    if (cls.empty()) throw DataError("compute_prototypes: class with no support reps");
    Vector c = Vector::Zero(cls.front().size());
    for (const auto& v : cls) {
      if (v.size() != c.size()) throw DataError("compute_prototypes: dimension mismatch");
      c += v;
    }
    out.push_back(c / static_cast<double>(cls.size()));
  }
  return out;
}

/// Softmax over cosine(query, prototype_k) / tau.
inline Eigen::VectorXd classify_pn(const Vector& query, const std::vector<Vector>& prototypes, double tau) {
  if (!(tau > 0.0)) throw ConfigError("classification temperature must be positive");
  if (prototypes.empty()) throw DataError("classify_pn: no prototypes");
  const double nq = query.norm();
  if (nq == 0.0) throw NumericalError("classify_pn: zero-norm query");
  Eigen::VectorXd logits(static_cast<Eigen::Index>(prototypes.size()));
  for (std::size_t k = 0; k < prototypes.size(); ++k) {
    const auto& c = prototypes[k];
    if (c.size() != query.size()) throw DataError("classify_pn: dimension mismatch");
    const double nc = c.norm();
    if (nc == 0.0) throw NumericalError("classify_pn: zero-norm prototype");
    logits[static_cast<Eigen::Index>(k)] = query.dot(c) / (nq * nc) / tau;
  }
  logits = (logits.array() - logits.maxCoeff()).exp();
  return logits / logits.sum();
}

/// Index of the largest probability; the lowest index wins ties.
inline std::size_t predict(const Eigen::VectorXd& probabilities) {
  if (probabilities.size() == 0) throw DataError("predict: empty probability vector");
  std::size_t best = 0;
  for (Eigen::Index k = 1; k < probabilities.size(); ++k) {
    if (probabilities[k] > probabilities[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(k);
  }
  return best;
}

/// Ridge regression from support reps onto one-hot targets.
struct RidgeModel {
  Eigen::MatrixXd weights;  // d x N
  double lambda = 1.0;
};

/// W = X^T (X X^T + lambda I)^-1 Y, with X the (samples x d) design matrix and
/// Y the (samples x N) targets. The system is samples x samples, which is
/// small in the few-shot regime.
inline RidgeModel rrml_fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double lambda) {
  if (lambda < 0.0 || !std::isfinite(lambda)) throw ConfigError("ridge lambda must be >= 0");
  if (X.rows() != Y.rows()) throw DataError("rrml_fit: X and Y row counts differ");
  if (X.rows() == 0) throw DataError("rrml_fit: no samples");
  const Eigen::MatrixXd gram =
      X * X.transpose() + lambda * Eigen::MatrixXd::Identity(X.rows(), X.rows());
  Eigen::MatrixXd alpha;
  if (lambda > 0.0) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success) throw NumericalError("rrml_fit: factorisation failed");
    alpha = ldlt.solve(Y);
  } else {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible()) throw NumericalError("rrml_fit: singular system with lambda = 0");
    alpha = lu.solve(Y);
  }
  RidgeModel model{X.transpose() * alpha, lambda};
  if (!model.weights.allFinite()) throw NumericalError("rrml_fit: non-finite weights");
  return model;
}

/// Fits on an episode's supports: row order is class-major, targets one-hot.
inline RidgeModel rrml_fit(const std::vector<std::vector<Vector>>& support, double lambda) {
  std::size_t rows = 0;
  for (const auto& cls : support) rows += cls.size();
  if (rows == 0) throw DataError("rrml_fit: no support reps");
  const auto d = support.front().front().size();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows), d);
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                                            static_cast<Eigen::Index>(support.size()));
  Eigen::Index r = 0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    for (const auto& v : support[k]) {
      if (v.size() != d) throw DataError("rrml_fit: dimension mismatch");
      X.row(r) = v.transpose();
      Y(r, static_cast<Eigen::Index>(k)) = 1.0;
      ++r;
    }
  }
  return rrml_fit(X, Y, lambda);
}

/// softmax(query^T W)
inline Eigen::VectorXd rrml_predict(const RidgeModel& model, const Vector& query) {
  if (query.size() != model.weights.rows()) throw DataError("rrml_predict: dimension mismatch");
  Eigen::VectorXd scores = model.weights.transpose() * query;
  scores = (scores.array() - scores.maxCoeff()).exp();
  return scores / scores.sum();
}

}  // namespace lds
