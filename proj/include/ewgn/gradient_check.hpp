#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "ewgn/errors.hpp"
#include "ewgn/tensor.hpp"

namespace ewgn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  Eigen::Index worst_index = -1;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;

  bool passes(double tolerance) const { return max_rel_error < tolerance; }
};

// Central finite differences at 64-bit against a caller-supplied analytic
// gradient. `fn(theta, grad_out)` returns the scalar loss and, when
// grad_out != nullptr, fills the analytic gradient. fn must be deterministic.
//
// Per-coordinate relative error uses a small denominator floor so exact-zero
// gradients compare by absolute error instead of dividing by zero.
inline GradCheckReport gradient_check(
    const std::function<double(const VecX<double>&, VecX<double>*)>& fn, VecX<double> theta,
    double step = 1e-5, double denom_floor = 1e-3) {
  VecX<double> analytic(theta.size());
  const double base = fn(theta, &analytic);
  if (!std::isfinite(base)) throw NumericError("gradient_check: non-finite loss at base point");

  GradCheckReport report;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + step;
    const double up = fn(theta, nullptr);
    theta[i] = saved - step;
    const double down = fn(theta, nullptr);
    theta[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NumericError("gradient_check: non-finite loss while perturbing index " +
                         std::to_string(i));
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), denom_floor});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = i;
      report.analytic_at_worst = analytic[i];
      report.numeric_at_worst = numeric;
    }
  }
  return report;
}

}  // namespace ewgn
