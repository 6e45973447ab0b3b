#pragma once

// Composite Gauss-Legendre quadrature on a mesh graded geometrically toward
// both endpoints, with mesh doubling as the convergence check.

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <type_traits>
#include <vector>

#include "choquet/error.hpp"

namespace choquet {

struct QuadratureConfig {
  int subintervals = 40;
  int nodes_per_subinterval = 16;
  double refinement_tolerance = 1e-8;  // relative change between mesh doublings
  int max_refinements = 6;
  double endpoint_grading = 0.5;  // ratio of neighbouring cell widths, 1 = uniform

  void validate() const {
    if (subintervals < 1 || nodes_per_subinterval < 1 || max_refinements < 1 || !(refinement_tolerance > 0.0))
      throw InvalidConfig("quadrature settings must be positive");
    if (!(endpoint_grading > 0.0 && endpoint_grading <= 1.0))
      throw InvalidConfig("endpoint grading must lie in (0, 1]");
  }
};

/// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendreRule(int n) : nodes(n), weights(n) {
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = 0.0;
        for (int j = 1; j <= n; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / dp;
        z -= dz;
        if (std::fabs(dz) < 1e-16) break;
      }
      // Recompute the derivative at the converged root.
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double w = 2.0 / ((1.0 - z * z) * dp * dp);
      nodes[i] = -z;
      nodes[n - 1 - i] = z;
      weights[i] = w;
      weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
  }
};

/// Shared, lazily built rule for `n` nodes.
inline const GaussLegendreRule& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendreRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussLegendreRule>(n);
  return *slot;
}

/// A quadrature node on [lo, hi] together with its distances to both ends,
/// computed without cancellation.
struct QuadPoint {
  double x;
  double from_lo;
  double to_hi;
};

/// Cell boundaries, measured from one endpoint, of `cells` cells covering a
/// half-length `half`, geometrically refined toward the endpoint.
inline std::vector<double> graded_breaks(double half, int cells, double ratio) {
  std::vector<double> breaks(cells + 1, 0.0);
  if (ratio == 1.0) {
    for (int j = 1; j < cells; ++j) breaks[j] = half * j / cells;
  } else {
    const double first = half * std::pow(ratio, cells - 1) * (1.0 - ratio) / (1.0 - std::pow(ratio, cells));
    double width = first;
    for (int j = 1; j < cells; ++j) {
      breaks[j] = breaks[j - 1] + width;
      width /= ratio;
    }
  }
  breaks[cells] = half;
  return breaks;
}

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int refinements = 0;
};

namespace detail {

template <class F>
double call_integrand(F& f, const QuadPoint& p) {
  if constexpr (std::is_invocable_v<F&, const QuadPoint&>)
    return f(p);
  else
    return f(p.x);
}

// Cell boundaries for one side: the graded base mesh with `deepen` further
// cells carved geometrically out of the cell touching the endpoint.
inline std::vector<double> side_breaks(double half, int cells, double ratio, int deepen) {
  std::vector<double> base = graded_breaks(half, cells, ratio);
  if (ratio == 1.0 || deepen == 0 || base.size() < 2) return base;
  std::vector<double> breaks{0.0};
  for (int k = deepen; k >= 1; --k) breaks.push_back(base[1] * std::pow(ratio, k));
  breaks.insert(breaks.end(), base.begin() + 1, base.end());
  return breaks;
}

// One pass of the composite rule with every cell split into `split` pieces.
template <class F>
double graded_pass(F& f, double lo, double hi, const QuadratureConfig& cfg, int split, int deepen) {
  const double length = hi - lo;
  const auto& rule = gauss_legendre(cfg.nodes_per_subinterval);
  CompensatedSum sum;

  auto integrate_side = [&](const std::vector<double>& breaks, bool from_left) {
    for (std::size_t c = 0; c + 1 < breaks.size(); ++c) {
      const double width = (breaks[c + 1] - breaks[c]) / split;
      for (int s = 0; s < split; ++s) {
        const double d0 = breaks[c] + width * s;
        const double mid = d0 + 0.5 * width;
        const double halfw = 0.5 * width;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
          const double d = mid + halfw * rule.nodes[k];
          QuadPoint p{};
          if (from_left) {
            p = {lo + d, d, length - d};
          } else {
            p = {hi - d, length - d, d};
          }
          sum.add(rule.weights[k] * halfw * call_integrand(f, p));
        }
      }
    }
  };

  if (cfg.subintervals == 1) {
    integrate_side(graded_breaks(length, 1, 1.0), true);
  } else {
    const int left = (cfg.subintervals + 1) / 2;
    const int right = cfg.subintervals / 2;
    integrate_side(side_breaks(0.5 * length, left, cfg.endpoint_grading, deepen * left), true);
    integrate_side(side_breaks(0.5 * length, right, cfg.endpoint_grading, deepen * right), false);
  }
  return sum.value();
}

}  // namespace detail

/// Integrates `f` over [lo, hi]. `f` takes either the abscissa or a QuadPoint.
/// Each refinement bisects every cell and grades another block of cells into
/// the endpoints, until the relative change is within tolerance; throws
/// DivergentIntegral when that does not happen within `max_refinements`.
template <class F>
QuadResult integrate(F&& f, double lo, double hi, const QuadratureConfig& cfg = {}) {
  cfg.validate();
  if (hi < lo) throw InvalidInterval("integration interval is reversed");
  if (hi == lo) return {};
  double previous = detail::graded_pass(f, lo, hi, cfg, 1, 0);
  if (!std::isfinite(previous)) throw DivergentIntegral("integral is not finite");
  for (int r = 1; r <= cfg.max_refinements; ++r) {
    const double current = detail::graded_pass(f, lo, hi, cfg, 1 << r, r);
    if (!std::isfinite(current)) throw DivergentIntegral("integral is not finite");
    const double change = std::fabs(current - previous);
    if (change <= cfg.refinement_tolerance * std::fabs(current)) return {current, change, r};
    previous = current;
  }
  throw DivergentIntegral("quadrature did not converge after " + std::to_string(cfg.max_refinements) +
                          " mesh doublings");
}

/// Plain n-point Gauss-Legendre on one cell.
template <class F>
double gauss_legendre_cell(F&& f, double lo, double hi, int n = 16) {
  const auto& rule = gauss_legendre(n);
  const double mid = 0.5 * (lo + hi);
  const double halfw = 0.5 * (hi - lo);
  CompensatedSum sum;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) sum.add(rule.weights[k] * f(mid + halfw * rule.nodes[k]));
  return sum.value() * halfw;
}

}  // namespace choquet
