#pragma once

// Real-axis Laplace machinery: numeric forward transforms by graded
// quadrature and Gaver-Stehfest inversion.

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "choquet/error.hpp"
#include "choquet/expr.hpp"
#include "choquet/quadrature.hpp"

namespace choquet {

/// A transform s -> F(s), s > 0.
using LaplaceFn = std::function<double(double)>;

struct InversionConfig {
  int stehfest_terms = 16;

  void validate() const {
    if (stehfest_terms % 2 != 0 || stehfest_terms < 8 || stehfest_terms > 20)
      throw InvalidConfig("Stehfest term count must be even and within [8, 20]");
  }
};

/// Stehfest weights V_1..V_N. Kept in long double: |V_k| reaches 1e9 for
/// N = 16, so rounding them to double alone costs ~1e-7 in the result.
inline const std::vector<long double>& stehfest_weights(int n) {
  static std::mutex mutex;
  static std::map<int, std::vector<long double>> cache;
  std::lock_guard lock(mutex);
  auto [it, inserted] = cache.try_emplace(n);
  if (!inserted) return it->second;

  auto factorial = [](int k) {
    long double r = 1.0L;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
  };
  const int half = n / 2;
  auto& weights = it->second;
  weights.resize(n);
  for (int k = 1; k <= n; ++k) {
    long double sum = 0.0L;
    for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
      sum += std::pow(static_cast<long double>(j), half) * factorial(2 * j) /
             (factorial(half - j) * factorial(j) * factorial(j - 1) * factorial(k - j) * factorial(2 * j - k));
    }
    weights[k - 1] = ((k + half) % 2 == 0 ? 1.0L : -1.0L) * sum;
  }
  return weights;
}

/// f(t) ~ (ln 2 / t) sum_k V_k F(k ln 2 / t).
inline double invert_laplace(const LaplaceFn& transform, double t, const InversionConfig& cfg = {}) {
  cfg.validate();
  if (!(t > 0.0)) throw InvalidInterval("Laplace inversion needs t > 0");
  const auto& weights = stehfest_weights(cfg.stehfest_terms);
  const double step = std::numbers::ln2 / t;
  long double sum = 0.0L;
  for (int k = 1; k <= cfg.stehfest_terms; ++k) {
    const double value = transform(k * step);
    if (!std::isfinite(value)) throw NumericalError("transform is not finite at s=" + std::to_string(k * step));
    sum += weights[k - 1] * value;
  }
  return static_cast<double>(sum * step);
}

inline constexpr double kLaplaceTailBound = 1e-12;

/// Quadrature defaults for forward transforms: Stehfest amplifies transform
/// errors by ~1e9, so the graded mesh reaches much deeper into the endpoint.
inline QuadratureConfig laplace_quadrature() {
  QuadratureConfig cfg;
  cfg.subintervals = 64;
  return cfg;
}

/// Laplace transform of `h` at s by quadrature over [0, T]. T is grown until
/// e^{-sT} (1 + |h(T)|) (1 + 1/s) <= 1e-12, and further until the same bound
/// is negligible (1e-16) relative to the computed transform.
template <class F>
double forward_laplace_fn(F&& h, double s, const QuadratureConfig& cfg = laplace_quadrature()) {
  if (!(s > 0.0)) throw NonPositiveS("Laplace transform needs s > 0");
  auto tail = [&](double T) {
    double hv;
    try {
      hv = h(T);
    } catch (const DomainError& e) {
      throw DivergentIntegral(std::string("cannot bound the transform tail: ") + e.what());
    }
    return std::exp(-s * T) * (1.0 + std::fabs(hv)) * (1.0 + 1.0 / s);
  };
  constexpr double kMaxDecay = 2000.0;  // s*T beyond which the window is hopeless
  double T = 1.0 / s;
  while (tail(T) > kLaplaceTailBound) {
    T *= 1.25;
    if (s * T > kMaxDecay) throw DivergentIntegral("integrand outgrows the exponential window");
  }
  auto integrand = [&](const QuadPoint& q) { return std::exp(-s * q.from_lo) * h(q.from_lo); };
  double value = integrate(integrand, 0.0, T, cfg).value;
  for (int i = 0; i < 8 && value != 0.0 && tail(T) > 1e-16 * std::fabs(value); ++i) {
    if (s * T * 1.5 > kMaxDecay) break;
    T *= 1.5;
    value = integrate(integrand, 0.0, T, cfg).value;
  }
  return value;
}

inline double forward_laplace(const Expr& h, double s, const QuadratureConfig& cfg = laplace_quadrature()) {
  return forward_laplace_fn([&h](double x) { return h(x); }, s, cfg);
}

/// The transform of `h` as a LaplaceFn (evaluated lazily per s).
inline LaplaceFn laplace_of(const Expr& h, const QuadratureConfig& cfg = laplace_quadrature()) {
  return [h, cfg](double s) { return forward_laplace(h, s, cfg); };
}

}  // namespace choquet
