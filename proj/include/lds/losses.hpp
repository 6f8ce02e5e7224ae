#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lds/core/error.hpp"
#include "lds/core/types.hpp"

namespace lds {

enum class LossKind { kCE, kLG, kLGLabel };

inline std::string_view to_string(LossKind k) {
  switch (k) {
    case LossKind::kCE: return "ce";
    case LossKind::kLG: return "lg";
    case LossKind::kLGLabel: return "lg+label";
  }
  return "?";
}

inline LossKind parse_loss_kind(std::string_view s) {
  if (s == "ce") return LossKind::kCE;
  if (s == "lg") return LossKind::kLG;
  if (s == "lg+label" || s == "all") return LossKind::kLGLabel;
  throw ConfigError("unknown loss kind '" + std::string(s) + "' (expected ce, lg or lg+label)");
}

struct LossConfig {
  double tau = 0.1;
  LossKind kind = LossKind::kLGLabel;
};

/// Loss value plus gradients. For the label-guided losses `grad_v` is w.r.t.
/// the sample reps and `grad_u` w.r.t. the label reps; for loss_ce they are
/// w.r.t. the query reps and the prototypes.
struct LossResult {
  double value = 0.0;
  std::vector<Vector> grad_v;
  std::vector<Vector> grad_u;
};

namespace detail {

inline void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("temperature must be positive");
}

/// Softmax of `logits` in place; returns log-sum-exp. Max-subtracted.
inline double softmax_inplace(Eigen::Ref<Eigen::VectorXd> logits) {
  const double m = logits.maxCoeff();
  logits = (logits.array() - m).exp();
  const double z = logits.sum();
  logits /= z;
  return m + std::log(z);
}

inline std::vector<Vector> zeros_like(const std::vector<Vector>& vs) {
  std::vector<Vector> out;
  out.reserve(vs.size());
  for (const auto& v : vs) out.push_back(Vector::Zero(v.size()));
  return out;
}

}  // namespace detail

/// Label-guided loss: softmax over inner products between each sample rep and
/// the N label reps, cross-entropy against the sample's own label.
///
/// Every sample of a class shares one label vector, so the per-sample sums
/// over same-label batch entries reduce to one term per class.
inline LossResult loss_lg(const std::vector<Vector>& v, const std::vector<std::size_t>& labels,
                          const std::vector<Vector>& u, double tau) {
  detail::check_tau(tau);
  if (v.empty()) throw DataError("loss_lg: empty batch");
  if (labels.size() != v.size()) throw DataError("loss_lg: labels and samples differ in length");
  if (u.empty()) throw DataError("loss_lg: no label reps");
  const auto d = u.front().size();
  check_vectors(u, d, "loss_lg label reps");
  check_vectors(v, d, "loss_lg sample reps");

  const auto n = static_cast<Eigen::Index>(u.size());
  Eigen::MatrixXd U(n, d);
  for (Eigen::Index r = 0; r < n; ++r) U.row(r) = u[static_cast<std::size_t>(r)].transpose();

  const double c = static_cast<double>(v.size());
  LossResult res;
  res.grad_v.reserve(v.size());
  res.grad_u = detail::zeros_like(u);
  Eigen::MatrixXd grad_U = Eigen::MatrixXd::Zero(n, d);
  for (std::size_t t = 0; t < v.size(); ++t) {
    const auto y = labels[t];
    if (y >= u.size()) throw DataError("loss_lg: class id out of range");
    Eigen::VectorXd p = U * v[t] / tau;
    const double target = p[static_cast<Eigen::Index>(y)];
    const double lse = detail::softmax_inplace(p);
    res.value += (lse - target) / c;
    p[static_cast<Eigen::Index>(y)] -= 1.0;
    res.grad_v.push_back(U.transpose() * p / (c * tau));
    grad_U += p * v[t].transpose() / (c * tau);
  }
  for (Eigen::Index r = 0; r < n; ++r) res.grad_u[static_cast<std::size_t>(r)] = grad_U.row(r).transpose();
  return res;
}

/// Label-label loss. Each label's softmax runs over its inner products with
/// all labels, itself included, and the target is the self term.
inline LossResult loss_label(const std::vector<Vector>& u, double tau) {
  detail::check_tau(tau);
  if (u.empty()) throw DataError("loss_label: no label reps");
  const auto d = u.front().size();
  check_vectors(u, d, "loss_label label reps");
  const auto n = static_cast<Eigen::Index>(u.size());
  Eigen::MatrixXd U(n, d);
  for (Eigen::Index r = 0; r < n; ++r) U.row(r) = u[static_cast<std::size_t>(r)].transpose();

  Eigen::MatrixXd P = U * U.transpose() / tau;
  LossResult res;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double self = P(i, i);
    Eigen::VectorXd row = P.row(i).transpose();
    const double lse = detail::softmax_inplace(row);
    P.row(i) = row.transpose();
    res.value += (lse - self) / static_cast<double>(n);
  }
  // d/du_k = (sum_j (p_kj + p_jk) u_j - 2 u_k) / (N tau)
  const Eigen::MatrixXd G = ((P + P.transpose()) * U - 2.0 * U) / (static_cast<double>(n) * tau);
  res.grad_u.reserve(u.size());
  for (Eigen::Index k = 0; k < n; ++k) res.grad_u.push_back(G.row(k).transpose());
  return res;
}

/// Sum of loss_lg and loss_label.
inline LossResult loss_all(const std::vector<Vector>& v, const std::vector<std::size_t>& labels,
                           const std::vector<Vector>& u, double tau) {
  LossResult res = loss_lg(v, labels, u, tau);
  const LossResult reg = loss_label(u, tau);
  res.value += reg.value;
  for (std::size_t k = 0; k < u.size(); ++k) res.grad_u[k] += reg.grad_u[k];
  return res;
}

/// Cross-entropy of the temperature-scaled cosine softmax of each query over
/// the prototypes.
inline LossResult loss_ce(const std::vector<Vector>& queries, const std::vector<std::size_t>& labels,
                          const std::vector<Vector>& prototypes, double tau) {
  detail::check_tau(tau);
  if (queries.empty()) throw DataError("loss_ce: no queries");
  if (labels.size() != queries.size()) throw DataError("loss_ce: labels and queries differ in length");
  if (prototypes.empty()) throw DataError("loss_ce: no prototypes");
  const auto d = prototypes.front().size();
  check_vectors(prototypes, d, "loss_ce prototypes");
  check_vectors(queries, d, "loss_ce queries");

  const std::size_t n = prototypes.size();
  std::vector<Vector> unit_c;
  std::vector<double> norm_c;
  for (const auto& c : prototypes) {
    const double nc = c.norm();
    if (nc == 0.0) throw NumericalError("loss_ce: zero-norm prototype");
    norm_c.push_back(nc);
    unit_c.push_back(c / nc);
  }
  const double count = static_cast<double>(queries.size());
  LossResult res;
  res.grad_u = detail::zeros_like(prototypes);
  res.grad_v.reserve(queries.size());
  for (std::size_t t = 0; t < queries.size(); ++t) {
    const auto y = labels[t];
    if (y >= n) throw DataError("loss_ce: class id out of range");
    const double nq = queries[t].norm();
    if (nq == 0.0) throw NumericalError("loss_ce: zero-norm query");
    const Vector unit_q = queries[t] / nq;
    Eigen::VectorXd cos(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) cos[static_cast<Eigen::Index>(k)] = unit_q.dot(unit_c[k]);
    Eigen::VectorXd p = cos / tau;
    const double target = p[static_cast<Eigen::Index>(y)];
    res.value += (detail::softmax_inplace(p) - target) / count;
    p[static_cast<Eigen::Index>(y)] -= 1.0;
    // dL/dcos_k = p_k / (tau * count); dcos/dq = (c_hat - cos q_hat) / |q|.
    Vector gq = Vector::Zero(d);
    for (std::size_t k = 0; k < n; ++k) {
      const double g = p[static_cast<Eigen::Index>(k)] / (tau * count);
      const double ck = cos[static_cast<Eigen::Index>(k)];
      gq += g * (unit_c[k] - ck * unit_q) / nq;
      res.grad_u[k] += g * (unit_q - ck * unit_c[k]) / norm_c[k];
    }
    res.grad_v.push_back(std::move(gq));
  }
  return res;
}

}  // namespace lds
