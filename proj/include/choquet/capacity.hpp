#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "choquet/error.hpp"
#include "choquet/expr.hpp"

namespace choquet {

inline constexpr double kMonotoneTolerance = 1e-10;

/// The function m of a distorted Lebesgue measure mu = m o lambda, so that
/// mu([u, v]) = m(v - u). Validated on construction over [0, working_range]:
/// m(0) = 0, m >= 0 and nondecreasing.
class Distortion {
 public:
  static Distortion make(Expr m, double working_range = 10.0, std::size_t grid_points = 1001) {
    if (!(working_range > 0.0) || grid_points < 2) throw InvalidConfig("distortion check needs a positive range");
    const double at_zero = m(0.0);
    if (std::fabs(at_zero) > 1e-12)
      throw InvalidDistortion("distortion must vanish at 0, got m(0)=" + std::to_string(at_zero));
    double previous = at_zero;
    for (std::size_t i = 1; i < grid_points; ++i) {
      const double x = working_range * static_cast<double>(i) / static_cast<double>(grid_points - 1);
      const double value = m(x);
      if (value < 0.0) throw InvalidDistortion("distortion is negative at x=" + std::to_string(x));
      if (value < previous - 1e-12) throw InvalidDistortion("distortion decreases near x=" + std::to_string(x));
      previous = value;
    }
    Expr derivative = m.derivative();
    return Distortion(std::move(m), std::move(derivative));
  }

  static Distortion identity() { return make(Expr::variable()); }

  const Expr& m() const noexcept { return m_; }
  const Expr& m_prime() const noexcept { return m_prime_; }

  /// mu([u, v]) for u <= v.
  double measure(double u, double v) const {
    if (v < u) throw InvalidInterval("capacity evaluated on a reversed interval");
    return m_(v - u);
  }

 private:
  Distortion(Expr m, Expr m_prime) : m_(std::move(m)), m_prime_(std::move(m_prime)) {}

  Expr m_;
  Expr m_prime_;
};

/// A monotone set function known through its values on closed intervals.
class IntervalCapacity {
 public:
  using Evaluator = std::function<double(double, double)>;

  explicit IntervalCapacity(Evaluator evaluator) : evaluator_(std::move(evaluator)) {}

  double operator()(double u, double v) const {
    if (v < u) throw InvalidInterval("capacity evaluated on a reversed interval");
    return evaluator_(u, v);
  }

 private:
  Evaluator evaluator_;
};

inline IntervalCapacity distorted_capacity(const Distortion& d) {
  return IntervalCapacity([m = d.m()](double u, double v) { return m(v - u); });
}

inline IntervalCapacity lebesgue_capacity() {
  return IntervalCapacity([](double u, double v) { return v - u; });
}

struct MonotoneCertificate {
  enum class Verdict { Monotone, Violated };

  std::vector<double> grid;
  Verdict verdict = Verdict::Monotone;
  std::optional<std::size_t> violated_at;  // first offending sample
  double max_violation = 0.0;
  double tolerance = kMonotoneTolerance;

  bool monotone() const noexcept { return verdict == Verdict::Monotone; }
};

/// Certifies that `values` sampled on `grid` are nonnegative and nondecreasing
/// within `tolerance`.
inline MonotoneCertificate certify_samples(std::span<const double> grid, std::span<const double> values,
                                           double tolerance = kMonotoneTolerance) {
  MonotoneCertificate cert;
  cert.grid.assign(grid.begin(), grid.end());
  cert.tolerance = tolerance;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double violation = std::max(0.0, -values[i]);
    if (i > 0) violation = std::max(violation, values[i - 1] - values[i]);
    cert.max_violation = std::max(cert.max_violation, violation);
    if (violation > tolerance && !cert.violated_at) cert.violated_at = i;
  }
  if (cert.violated_at) cert.verdict = MonotoneCertificate::Verdict::Violated;
  return cert;
}

/// Samples h on an n-point uniform grid over [a, t_max] and certifies it.
inline MonotoneCertificate check_f_plus(const Expr& h, double a, double t_max, std::size_t n,
                                        double tolerance = kMonotoneTolerance) {
  if (n < 2) throw InvalidGrid("monotonicity check needs at least two points");
  if (!(t_max > a)) throw InvalidInterval("monotonicity check needs t_max > a");
  std::vector<double> grid(n), values(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = i + 1 == n ? t_max : a + (t_max - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    values[i] = h(grid[i]);
  }
  return certify_samples(grid, values, tolerance);
}

inline double default_fd_step(double x) { return 1e-5 * std::max(1.0, std::fabs(x)); }

/// Finite-difference estimate of d/dtau mu([tau, t]). Central where the
/// stencil fits inside [lower, t], second-order one-sided otherwise.
inline double capacity_tau_derivative(const IntervalCapacity& c, double tau, double t, double h,
                                      double lower = -std::numeric_limits<double>::infinity()) {
  if (!(h > 0.0)) throw InvalidConfig("finite-difference step must be positive");
  if (tau > t) throw InvalidInterval("tau must not exceed t");
  if (t - lower < 4.0 * h && t > lower) h = (t - lower) / 4.0;
  auto mu = [&](double u) { return c(u, t); };
  if (tau + h <= t && tau - h >= lower) return (mu(tau + h) - mu(tau - h)) / (2.0 * h);
  if (tau + h > t) return (3.0 * mu(tau) - 4.0 * mu(tau - h) + mu(tau - 2.0 * h)) / (2.0 * h);
  return (-3.0 * mu(tau) + 4.0 * mu(tau + h) - mu(tau + 2.0 * h)) / (2.0 * h);
}

inline double capacity_tau_derivative(const IntervalCapacity& c, double tau, double t) {
  return capacity_tau_derivative(c, tau, t, default_fd_step(tau));
}

}  // namespace choquet
