#pragma once

// Forward Choquet integrals (C) int_a^t g dmu for nondecreasing g >= 0.
//
// Three independent routes:
//   level set    g(a) mu([a,t]) + int_{g(a)}^{g(t)} mu([s_alpha, t]) dalpha
//   convolution  int_a^t m'(t - tau) g(tau) dtau          (distorted measures)
//   general      -int_a^t d/dtau mu([tau, t]) g(tau) dtau  (interval capacities)

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "choquet/capacity.hpp"
#include "choquet/error.hpp"
#include "choquet/expr.hpp"
#include "choquet/quadrature.hpp"

namespace choquet {

/// Strictly increasing evaluation points.
class Grid {
 public:
  Grid() = default;
  explicit Grid(std::vector<double> points) : points_(std::move(points)) {
    for (std::size_t i = 1; i < points_.size(); ++i)
      if (!(points_[i] > points_[i - 1])) throw InvalidGrid("grid must be strictly increasing");
    for (double p : points_)
      if (!std::isfinite(p)) throw InvalidGrid("grid points must be finite");
  }

  /// `count` points from `start` to `stop` inclusive.
  static Grid uniform(double start, double stop, std::size_t count) {
    if (count < 2) throw InvalidGrid("uniform grid needs at least two points");
    if (!(stop > start)) throw InvalidGrid("uniform grid needs stop > start");
    std::vector<double> pts(count);
    for (std::size_t i = 0; i < count; ++i)
      pts[i] = i + 1 == count ? stop : start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
    return Grid(std::move(pts));
  }

  std::span<const double> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }
  double operator[](std::size_t i) const { return points_[i]; }

 private:
  std::vector<double> points_;
};

using Measure = std::variant<Distortion, IntervalCapacity>;

inline constexpr std::size_t kCertificatePoints = 1001;

struct ChoquetProblem {
  double a = 0.0;
  Expr g;
  Measure measure;
  Grid grid;

  /// Validates the grid and certifies g on [a, grid.back()].
  static ChoquetProblem make(double a, Expr g, Measure measure, Grid grid) {
    if (!grid.empty() && grid.front() < a) throw InvalidGrid("grid starts before the interval origin");
    const double t_max = grid.empty() ? a : grid.back();
    if (t_max > a) {
      const auto cert = check_f_plus(g, a, t_max, kCertificatePoints);
      if (!cert.monotone())
        throw NotInFPlus("integrand is not nonnegative and nondecreasing on [a, " + std::to_string(t_max) + "]");
    } else if (g(a) < -kMonotoneTolerance) {
      throw NotInFPlus("integrand is negative at a");
    }
    return ChoquetProblem{a, std::move(g), std::move(measure), std::move(grid)};
  }

  const Distortion* distortion() const noexcept { return std::get_if<Distortion>(&measure); }

  IntervalCapacity capacity() const {
    if (const auto* d = distortion()) return distorted_capacity(*d);
    return std::get<IntervalCapacity>(measure);
  }
};

namespace detail {

inline void require_interval(const ChoquetProblem& p, double t) {
  if (t < p.a) throw InvalidInterval("t must not precede a");
}

}  // namespace detail

/// Leftmost tau in [lo, hi] with g(tau) >= alpha, for nondecreasing g with
/// g(lo) < alpha <= g(hi).
inline double level_set_start(const Expr& g, double alpha, double lo, double hi, double tol = 1e-12) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) >= alpha)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

/// Definition route: integrates the capacity of superlevel sets over alpha.
inline double choquet_level_set(const ChoquetProblem& p, double t, const QuadratureConfig& cfg = {}) {
  detail::require_interval(p, t);
  if (t == p.a) return 0.0;
  const auto cert = check_f_plus(p.g, p.a, t, kCertificatePoints);
  if (!cert.monotone()) throw NotInFPlus("level-set route needs a nonnegative nondecreasing integrand");
  const IntervalCapacity mu = p.capacity();
  const double g_lo = std::max(0.0, p.g(p.a));
  const double g_hi = p.g(t);
  double value = g_lo * mu(p.a, t);
  if (g_hi > g_lo) {
    auto integrand = [&](double alpha) { return mu(level_set_start(p.g, alpha, p.a, t), t); };
    value += integrate(integrand, g_lo, g_hi, cfg).value;
  }
  return value;
}

/// Riemann convolution route for distorted Lebesgue measures.
inline double choquet_convolution(const ChoquetProblem& p, double t, const QuadratureConfig& cfg = {}) {
  detail::require_interval(p, t);
  const Distortion* d = p.distortion();
  if (d == nullptr) throw InvalidConfig("convolution route needs a distorted Lebesgue measure");
  if (t == p.a) return 0.0;
  const Expr& m_prime = d->m_prime();
  const Expr& g = p.g;
  auto integrand = [&](const QuadPoint& q) { return m_prime(q.to_hi) * g(q.x); };
  return integrate(integrand, p.a, t, cfg).value;
}

/// General capacity route with a finite-difference tau-derivative.
inline double choquet_general(const ChoquetProblem& p, double t, const QuadratureConfig& cfg = {}) {
  detail::require_interval(p, t);
  if (t == p.a) return 0.0;
  const IntervalCapacity mu = p.capacity();
  auto integrand = [&](double tau) {
    return -capacity_tau_derivative(mu, tau, t, default_fd_step(tau), p.a) * p.g(tau);
  };
  return integrate(integrand, p.a, t, cfg).value;
}

/// Convolution for distorted measures, general formula otherwise.
inline double choquet_integral(const ChoquetProblem& p, double t, const QuadratureConfig& cfg = {}) {
  return p.distortion() ? choquet_convolution(p, t, cfg) : choquet_general(p, t, cfg);
}

struct HereditaryCheck {
  double lhs = 0.0;  // integral over [a, t]
  double rhs = 0.0;  // integral over [a, a'] plus integral over [a', t]
  double gap = 0.0;
};

/// Compares the integral over [a, t] with the sum of the integrals over
/// [a, a'] and [a', t].
inline HereditaryCheck check_hereditary(const ChoquetProblem& p, double a_prime, double t,
                                        const QuadratureConfig& cfg = {}) {
  if (a_prime < p.a || a_prime > t) throw InvalidInterval("split point must lie in [a, t]");
  const ChoquetProblem tail{a_prime, p.g, p.measure, p.grid};
  HereditaryCheck out;
  out.lhs = choquet_integral(p, t, cfg);
  out.rhs = choquet_integral(p, a_prime, cfg) + choquet_integral(tail, t, cfg);
  out.gap = std::fabs(out.lhs - out.rhs);
  return out;
}

/// Moves the problem to the origin: g_a(r) = g(r + a), grid shifted by -a.
/// A distortion is kept as is (distorted measures are translation invariant);
/// a general capacity is transported along with the shift.
inline ChoquetProblem shift_to_origin(const ChoquetProblem& p) {
  if (p.a == 0.0) return p;
  Measure measure = p.measure;
  if (!p.distortion()) {
    measure = IntervalCapacity([mu = std::get<IntervalCapacity>(p.measure), a = p.a](double u, double v) {
      return mu(u + a, v + a);
    });
  }
  std::vector<double> pts(p.grid.points().begin(), p.grid.points().end());
  for (double& x : pts) x -= p.a;
  return ChoquetProblem{0.0, p.g.substitute(Expr::variable() + Expr::number(p.a)), std::move(measure),
                        Grid(std::move(pts))};
}

}  // namespace choquet
