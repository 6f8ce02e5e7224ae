#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "lds/core/error.hpp"
#include "lds/core/types.hpp"
#include "lds/losses.hpp"

namespace lds {

using ScalarFn = std::function<double(std::span<const double>)>;

/// Central-difference gradient of `f` at `x` with step `h`.
inline std::vector<double> central_difference(const ScalarFn& f, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw ConfigError("finite-difference step must be positive");
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = f(probe);
    probe[i] = orig - h;
    const double down = f(probe);
    probe[i] = orig;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// max_i |analytic_i - numeric_i| / max(1, |numeric_i|)
inline double max_relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  if (analytic.size() != numeric.size()) throw DataError("gradient sizes differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double err = std::abs(analytic[i] - numeric[i]) / std::max(1.0, std::abs(numeric[i]));
    worst = std::max(worst, std::isnan(err) ? INFINITY : err);
  }
  return worst;
}

inline double finite_diff_check(const ScalarFn& f, std::span<const double> x,
                                std::span<const double> analytic, double h) {
  const auto numeric = central_difference(f, x, h);
  return max_relative_error(analytic, numeric);
}

/// A loss over two groups of vectors (samples/queries and labels/prototypes)
/// whose LossResult carries the gradient of each group.
using VectorLossFn = std::function<LossResult(const std::vector<Vector>&, const std::vector<Vector>&)>;

namespace detail {

inline std::vector<double> flatten(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  std::vector<double> out;
  for (const auto* group : {&a, &b}) {
    for (const auto& v : *group) out.insert(out.end(), v.data(), v.data() + v.size());
  }
  return out;
}

inline void unflatten(std::span<const double> flat, std::vector<Vector>& a, std::vector<Vector>& b) {
  std::size_t pos = 0;
  for (auto* group : {&a, &b}) {
    for (auto& v : *group) {
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = flat[pos++];
    }
  }
}

}  // namespace detail

/// Max relative error between the analytic gradients reported by `loss` and
/// central differences over every coordinate of both input groups.
inline double check_loss_gradient(const VectorLossFn& loss, const std::vector<Vector>& a,
                                  const std::vector<Vector>& b, double h) {
  const LossResult analytic = loss(a, b);
  std::vector<Vector> grad_a = analytic.grad_v;
  if (grad_a.empty()) grad_a = std::vector<Vector>(a.size());  // loss does not depend on group a
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (grad_a[i].size() == 0) grad_a[i] = Vector::Zero(a[i].size());
  }
  const auto flat_grad = detail::flatten(grad_a, analytic.grad_u);

  std::vector<Vector> wa = a, wb = b;
  ScalarFn f = [&](std::span<const double> x) {
    detail::unflatten(x, wa, wb);
    return loss(wa, wb).value;
  };
  return finite_diff_check(f, detail::flatten(a, b), flat_grad, h);
}

}  // namespace lds
