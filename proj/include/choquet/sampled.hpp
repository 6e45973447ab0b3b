#pragma once

// Piecewise-linear sampled functions and the convolutions used to verify
// recovered derivatives and distortions against the target f.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "choquet/error.hpp"
#include "choquet/expr.hpp"
#include "choquet/quadrature.hpp"

namespace choquet {

/// Linear interpolation through strictly increasing knots; constant
/// extrapolation outside them.
class PiecewiseLinear {
 public:
  PiecewiseLinear(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size() || x_.empty()) throw InvalidGrid("interpolant needs matching, non-empty samples");
    for (std::size_t i = 1; i < x_.size(); ++i)
      if (!(x_[i] > x_[i - 1])) throw InvalidGrid("interpolation knots must be strictly increasing");
  }

  double operator()(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
    const std::size_t lo = hi - 1;
    const double w = (x - x_[lo]) / (x_[hi] - x_[lo]);
    return y_[lo] + w * (y_[hi] - y_[lo]);
  }

  std::span<const double> knots() const noexcept { return x_; }
  std::span<const double> values() const noexcept { return y_; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

/// int_a^{t_i} kernel(t_i - tau) g(tau) dtau for every knot t_i of g, with g
/// the piecewise-linear interpolant through (a, g_at_a) and the samples.
/// Pieces touching a or t_i use the graded rule; interior pieces one
/// Gauss-Legendre cell.
inline std::vector<double> convolve_sampled_integrand(const Expr& kernel, double a, double g_at_a,
                                                      std::span<const double> t, std::span<const double> g,
                                                      const QuadratureConfig& cfg) {
  std::vector<double> knots{a};
  std::vector<double> values{g_at_a};
  knots.insert(knots.end(), t.begin(), t.end());
  values.insert(values.end(), g.begin(), g.end());
  const PiecewiseLinear g_lin(knots, values);

  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double ti = t[i];
    CompensatedSum sum;
    for (std::size_t k = 0; k <= i; ++k) {
      const double lo = knots[k];
      const double hi = knots[k + 1];
      auto piece = [&](double tau) { return kernel(ti - tau) * g_lin(tau); };
      if (k == 0 || k == i) {
        auto graded = [&](const QuadPoint& q) {
          const double dist = k == i ? q.to_hi : ti - q.x;
          return kernel(dist) * g_lin(q.x);
        };
        sum.add(integrate(graded, lo, hi, cfg).value);
      } else {
        sum.add(gauss_legendre_cell(piece, lo, hi));
      }
    }
    out[i] = sum.value();
  }
  return out;
}

/// C1 piecewise cubic through the knots. Slopes come from the Lagrange cubic
/// through the four nearest knots, so smooth data is reproduced to O(h^4).
class HermiteCubic {
 public:
  HermiteCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size() || x_.size() < 2) throw InvalidGrid("cubic interpolant needs at least two samples");
    for (std::size_t i = 1; i < x_.size(); ++i)
      if (!(x_[i] > x_[i - 1])) throw InvalidGrid("interpolation knots must be strictly increasing");
    const std::size_t n = x_.size();
    const std::size_t width = std::min<std::size_t>(4, n);
    slope_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t first = i >= 1 ? i - 1 : 0;
      first = std::min(first, n - width);
      // d/dx of the Lagrange polynomial on knots [first, first + width) at x_i.
      double d = 0.0;
      for (std::size_t j = first; j < first + width; ++j) {
        double basis_slope = 0.0;
        for (std::size_t k = first; k < first + width; ++k) {
          if (k == j) continue;
          double term = 1.0 / (x_[j] - x_[k]);
          for (std::size_t l = first; l < first + width; ++l)
            if (l != j && l != k) term *= (x_[i] - x_[l]) / (x_[j] - x_[l]);
          basis_slope += term;
        }
        d += y_[j] * basis_slope;
      }
      slope_[i] = d;
    }
  }

  /// Constant extrapolation outside the knots.
  double operator()(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y_[i] + (s3 - 2 * s2 + s) * h * slope_[i] + (3 * s2 - 2 * s3) * y_[i + 1] +
           (s3 - s2) * h * slope_[i + 1];
  }

  double derivative(double x) const {
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double s = std::clamp((x - x_[i]) / h, 0.0, 1.0);
    const double dy = (y_[i + 1] - y_[i]) / h;
    // Derivative of the Hermite basis combination.
    return 6.0 * s * (1.0 - s) * dy + (1.0 - 4.0 * s + 3.0 * s * s) * slope_[i] + (3.0 * s * s - 2.0 * s) * slope_[i + 1];
  }

  std::span<const double> knots() const noexcept { return x_; }

 private:
  std::size_t segment(double x) const {
    const auto hi = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
    return std::clamp<std::size_t>(hi, 1, x_.size() - 1) - 1;
  }

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> slope_;
};

/// int_0^{r_i} m_c'(u) g(a + r_i - u) du for each knot r_i, where m_c is the
/// cubic interpolant of (0, 0) and the samples (r_j, m_j). The piece next to
/// tau = a takes the graded rule; the rest one Gauss-Legendre cell each.
inline std::vector<double> convolve_sampled_distortion(const Expr& g, double a, std::span<const double> r,
                                                       std::span<const double> m, const QuadratureConfig& cfg) {
  if (r.size() != m.size()) throw InvalidGrid("distortion samples and knots differ in length");
  std::vector<double> knots{0.0};
  std::vector<double> values{0.0};
  knots.insert(knots.end(), r.begin(), r.end());
  values.insert(values.end(), m.begin(), m.end());
  if (!(knots.size() < 2 || knots[1] > 0.0)) throw InvalidGrid("distortion knots must be positive and increasing");
  const HermiteCubic m_c(knots, values);

  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double ri = r[i];
    CompensatedSum sum;
    for (std::size_t j = 0; j <= i; ++j) {
      const double lo = knots[j];
      const double hi = knots[j + 1];
      if (j == i) {
        // u -> ri puts tau at a, where g may be singular; measure from there.
        auto graded = [&](const QuadPoint& q) { return m_c.derivative(q.x) * g(a + q.to_hi); };
        sum.add(integrate(graded, lo, hi, cfg).value);
      } else {
        sum.add(gauss_legendre_cell([&](double u) { return m_c.derivative(u) * g(a + (ri - u)); }, lo, hi));
      }
    }
    out[i] = sum.value();
  }
  return out;
}

}  // namespace choquet
