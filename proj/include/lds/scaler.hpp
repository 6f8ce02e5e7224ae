#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "lds/core/error.hpp"
#include "lds/core/types.hpp"

// Test-time label-guided scaler. For each class the K support reps and K
// copies of the label rep form a candidate set; an isotropic Gaussian
// mixture with one component per candidate is fitted by EM, and each support
// is replaced by the weighted mean of itself and the label rep, weighted by
// the fitted mixture weights of their two components.
namespace lds {

enum class VarianceMode { kFixed, kIsotropic };

/// How a support's label weight is chosen. kPaired uses the label copy at
/// index K+i for support i; kPooled uses the summed weight of all label copies.
enum class LabelPairing { kPaired, kPooled };

struct ScalerConfig {
  int max_iter = 50;
  double ll_tolerance = 1e-6;
  double init_variance = 1.0;
  double var_floor = 1e-4;
  VarianceMode variance_mode = VarianceMode::kIsotropic;
  LabelPairing pairing = LabelPairing::kPaired;

  void validate() const {
    if (max_iter < 1) throw ConfigError("scaler max_iter must be >= 1");
    if (!(ll_tolerance > 0.0)) throw ConfigError("scaler ll_tolerance must be positive");
    if (!(init_variance > 0.0)) throw ConfigError("scaler init_variance must be positive");
    if (!(var_floor > 0.0)) throw ConfigError("scaler var_floor must be positive");
  }
};

inline VarianceMode parse_variance_mode(std::string_view s) {
  if (s == "fixed") return VarianceMode::kFixed;
  if (s == "isotropic" || s == "isotropic-updated") return VarianceMode::kIsotropic;
  throw ConfigError("unknown variance mode '" + std::string(s) + "'");
}

inline LabelPairing parse_pairing(std::string_view s) {
  if (s == "paired") return LabelPairing::kPaired;
  if (s == "pooled") return LabelPairing::kPooled;
  throw ConfigError("unknown label pairing '" + std::string(s) + "'");
}

/// K support reps followed by K copies of the class's label rep.
struct CandidateSet {
  std::vector<Vector> vectors;
  std::size_t k_shot = 0;

  std::size_t size() const { return vectors.size(); }
  Eigen::Index dim() const { return vectors.empty() ? 0 : vectors.front().size(); }
};

inline CandidateSet build_candidate_set(const std::vector<Vector>& support, const Vector& label) {
  if (support.empty()) throw DataError("candidate set needs at least one support rep");
  check_vectors(support, label.size(), "candidate set");
  CandidateSet c;
  c.k_shot = support.size();
  c.vectors.reserve(2 * support.size());
  c.vectors.insert(c.vectors.end(), support.begin(), support.end());
  c.vectors.insert(c.vectors.end(), support.size(), label);
  return c;
}

/// Mixture parameters. Weights are kept in log space so that components
/// whose weight underflows still order correctly in fusion.
struct GmmState {
  std::vector<Vector> means;
  std::vector<double> variances;
  std::vector<double> log_weights;
  std::vector<double> log_likelihood;  // one entry per evaluated state, starting at init
  int iterations = 0;

  std::size_t components() const { return means.size(); }

  std::vector<double> weights() const {
    std::vector<double> w;
    w.reserve(log_weights.size());
    for (double lw : log_weights) w.push_back(std::exp(lw));
    return w;
  }
};

/// Row i, column k: log P(z_i = k | s_i).
struct Responsibilities {
  Eigen::MatrixXd log_resp;

  // Scalar exp: Eigen's vectorised exp maps -inf to the smallest normal, not 0.
  Eigen::MatrixXd probabilities() const {
    return log_resp.unaryExpr([](double x) { return std::exp(x); });
  }
};

namespace detail {

inline double log_gaussian(const Vector& x, const Vector& mean, double variance) {
  const auto d = static_cast<double>(x.size());
  return -0.5 * d * std::log(2.0 * std::numbers::pi * variance) - 0.5 * (x - mean).squaredNorm() / variance;
}

inline double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& xs) {
  const double m = xs.maxCoeff();
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < xs.size(); ++i) sum += std::exp(xs[i] - m);
  return m + std::log(sum);
}

/// log(w_k) + log N(s_i | mu_k, var_k I) for every (i, k).
inline Eigen::MatrixXd joint_log_density(const CandidateSet& c, const GmmState& state) {
  const auto n = static_cast<Eigen::Index>(c.size());
  const auto m = static_cast<Eigen::Index>(state.components());
  Eigen::MatrixXd out(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < m; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      out(i, k) = state.log_weights[ku] +
                  log_gaussian(c.vectors[static_cast<std::size_t>(i)], state.means[ku], state.variances[ku]);
    }
  }
  return out;
}

}  // namespace detail

inline double log_likelihood(const CandidateSet& c, const GmmState& state) {
  const Eigen::MatrixXd joint = detail::joint_log_density(c, state);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < joint.rows(); ++i) ll += detail::log_sum_exp(joint.row(i).transpose());
  return ll;
}

/// Standard mixture responsibilities, normalised over components in log space.
inline Responsibilities e_step(const CandidateSet& c, const GmmState& state) {
  Responsibilities r{detail::joint_log_density(c, state)};
  for (Eigen::Index i = 0; i < r.log_resp.rows(); ++i) {
    const double z = detail::log_sum_exp(r.log_resp.row(i).transpose());
    r.log_resp.row(i).array() -= z;
  }
  return r;
}

/// Weighted-mean, isotropic-variance and weight updates. A component whose
/// total responsibility is below 1e-12 keeps its previous mean and drops to
/// the variance floor.
inline GmmState m_step(const CandidateSet& c, const Responsibilities& resp, const GmmState& prev,
                       const ScalerConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(c.size());
  const auto m = resp.log_resp.cols();
  const double d = static_cast<double>(c.dim());
  const double log_n = std::log(static_cast<double>(n));
  const Eigen::MatrixXd gamma = resp.probabilities();

  GmmState next;
  next.means.resize(static_cast<std::size_t>(m));
  next.variances.resize(static_cast<std::size_t>(m));
  next.log_weights.resize(static_cast<std::size_t>(m));
  next.log_likelihood = prev.log_likelihood;
  next.iterations = prev.iterations;
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double log_nk = detail::log_sum_exp(resp.log_resp.col(k));
    const double nk = std::exp(log_nk);
    next.log_weights[ku] = log_nk - log_n;
    if (nk < 1e-12) {
      next.means[ku] = prev.means[ku];
      next.variances[ku] = cfg.var_floor;
      continue;
    }
    Vector mean = Vector::Zero(c.dim());
    for (Eigen::Index i = 0; i < n; ++i) mean += gamma(i, k) * c.vectors[static_cast<std::size_t>(i)];
    mean /= nk;
    if (cfg.variance_mode == VarianceMode::kIsotropic) {
      double ss = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        ss += gamma(i, k) * (c.vectors[static_cast<std::size_t>(i)] - mean).squaredNorm();
      }
      next.variances[ku] = std::max(cfg.var_floor, ss / (d * nk));
    } else {
      next.variances[ku] = prev.variances[ku];
    }
    next.means[ku] = std::move(mean);
  }
  return next;
}

/// One component per candidate, centred on it, with equal weights and
/// `init_variance`. Iterates until the log-likelihood gain drops below
/// `ll_tolerance` or `max_iter` iterations have run.
inline GmmState em_fit(const CandidateSet& c, const ScalerConfig& cfg) {
  cfg.validate();
  if (c.size() < 2) throw DataError("em_fit needs at least two candidates");
  GmmState state;
  state.means = c.vectors;
  state.variances.assign(c.size(), cfg.init_variance);
  state.log_weights.assign(c.size(), -std::log(static_cast<double>(c.size())));
  state.log_likelihood.push_back(log_likelihood(c, state));
  for (int it = 0; it < cfg.max_iter; ++it) {
    state = m_step(c, e_step(c, state), state, cfg);
    state.iterations = it + 1;
    const double ll = log_likelihood(c, state);
    if (!std::isfinite(ll)) throw NumericalError("EM log-likelihood is not finite");
    const double gain = ll - state.log_likelihood.back();
    state.log_likelihood.push_back(ll);
    if (gain < cfg.ll_tolerance) break;
  }
  return state;
}

/// (w_s * s + w_l * label) / (w_s + w_l)
inline Vector fuse(const Vector& support, const Vector& label, double w_support, double w_label) {
  if (support.size() != label.size()) throw DataError("fuse: dimension mismatch");
  if (w_support < 0.0 || w_label < 0.0) throw NumericalError("fuse: negative weight");
  const double total = w_support + w_label;
  if (!(total > 0.0)) throw NumericalError("fuse: both weights are zero");
  return (w_support * support + w_label * label) / total;
}

/// Scaled supports for one class.
inline std::vector<Vector> scale_class(const std::vector<Vector>& support, const Vector& label,
                                       const ScalerConfig& cfg) {
  const auto c = build_candidate_set(support, label);
  const auto state = em_fit(c, cfg);
  const std::size_t k = support.size();

  double pooled = -INFINITY;
  if (cfg.pairing == LabelPairing::kPooled) {
    Eigen::VectorXd lw(static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) lw[static_cast<Eigen::Index>(j)] = state.log_weights[k + j];
    pooled = detail::log_sum_exp(lw);
  }
  std::vector<Vector> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double ls = state.log_weights[i];
    const double ll = cfg.pairing == LabelPairing::kPaired ? state.log_weights[k + i] : pooled;
    // Rescale by the larger log weight; the ratio is what fusion uses.
    const double top = std::max(ls, ll);
    out.push_back(fuse(support[i], label, std::exp(ls - top), std::exp(ll - top)));
  }
  return out;
}

/// Replaces every class's support reps by their label-fused versions. Query
/// and label reps are returned unchanged.
inline EmbeddedEpisode scale_support_set(const EmbeddedEpisode& episode, const ScalerConfig& cfg) {
  episode.validate();
  EmbeddedEpisode out = episode;
  for (std::size_t cls = 0; cls < episode.n_way(); ++cls) {
    out.support_reps[cls] = scale_class(episode.support_reps[cls], episode.label_reps[cls], cfg);
  }
  return out;
}

}  // namespace lds
