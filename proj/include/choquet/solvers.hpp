#pragma once

// The three problems on [a, +inf), all reduced to the origin first
// (f_a(r) = f(r + a), g_a(r) = g(r + a)) and solved through F_a = s M G_a:
//
//   1. f      = L^-1[s M G_a](t - a)
//   2. g      = L^-1[F_a / (s M)](t - a)     (Choquet derivative)
//   3. m      = L^-1[F_a / (s G_a)](r)       (distortion identification)
//
// Every solve is cross-checked by a quadrature convolution.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "choquet/capacity.hpp"
#include "choquet/choquet.hpp"
#include "choquet/error.hpp"
#include "choquet/expr.hpp"
#include "choquet/laplace.hpp"
#include "choquet/parallel.hpp"
#include "choquet/quadrature.hpp"
#include "choquet/sampled.hpp"

namespace choquet {

struct SolverConfig {
  QuadratureConfig quadrature;                              // convolutions
  QuadratureConfig transform_quadrature = laplace_quadrature();  // forward transforms
  InversionConfig inversion;
  double residual_threshold = 1e-2;   // verification defect, relative to max |f|
  double decisive_violation = 1e-3;   // relative to the sample scale
  double monotone_tolerance = kMonotoneTolerance;
  double sample_noise = 1e-6;         // inversion noise allowed in sample certificates, relative
  double strict_increase = 1e-12;
  double f_at_a_tolerance = 1e-9;
  std::size_t certificate_points = kCertificatePoints;
  unsigned threads = 0;  // 0 = hardware concurrency
};

enum class Verdict { Exists, DoesNotExistInFPlus, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Exists: return "Exists";
    case Verdict::DoesNotExistInFPlus: return "DoesNotExistInFPlus";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

struct Sample {
  double t = 0.0;       // grid point actually used
  double arg = 0.0;     // argument of the recovered function (t, or t - a for m)
  double value = 0.0;   // recovered f, g or m
  double oracle = 0.0;  // Problem 1: quadrature convolution; 2 and 3: reconstructed f(t)
  double gap = 0.0;     // Problem 1: |value - oracle|; 2 and 3: |oracle - f(t)|
  bool finite = true;   // false when the inversion blew up at this point
};

struct SolveReport {
  std::vector<Sample> samples;
  MonotoneCertificate certificate;
  double residual = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<std::string> notes;
};

namespace detail {

/// Grid used for inversions: a first point at a is moved to a + span/1000.
inline std::vector<double> inversion_points(const Grid& grid, double a) {
  if (grid.empty()) throw InvalidGrid("solver needs a non-empty grid");
  if (grid.front() < a) throw InvalidGrid("grid starts before the interval origin");
  std::vector<double> pts(grid.points().begin(), grid.points().end());
  if (pts.front() == a) {
    const double span = grid.back() - grid.front();
    pts.front() = a + (span > 0.0 ? span / 1000.0 : 1e-3);
    if (pts.size() > 1 && !(pts[0] < pts[1])) throw InvalidGrid("grid too dense near a for inversion");
  }
  return pts;
}

inline Expr shifted(const Expr& h, double a) {
  return a == 0.0 ? h : h.substitute(Expr::variable() + Expr::number(a));
}

inline void require_f_plus(const Expr& h, double a, double t_max, const SolverConfig& cfg, const char* name) {
  if (!(t_max > a)) {
    if (h(a) < -cfg.monotone_tolerance) throw NotInFPlus(std::string(name) + " is negative at a");
    return;
  }
  const auto cert = check_f_plus(h, a, t_max, cfg.certificate_points, cfg.monotone_tolerance);
  if (!cert.monotone()) {
    throw NotInFPlus(std::string(name) + " is not nonnegative and nondecreasing on [a, " + std::to_string(t_max) +
                     "] (first violation at sample " + std::to_string(*cert.violated_at) + ")");
  }
}

inline void require_zero_at_a(const Expr& f, double a, const SolverConfig& cfg) {
  const double fa = f(a);
  if (std::fabs(fa) > cfg.f_at_a_tolerance) throw FNotZeroAtA("f(a) must vanish, got " + std::to_string(fa));
}

/// Inverts `transform` at r_i = t_i - a for every sample, recording blow-ups
/// per point. r = 0 yields 0.
inline void invert_samples(const LaplaceFn& transform, double a, std::vector<Sample>& samples,
                           const SolverConfig& cfg) {
  parallel_for(
      samples.size(),
      [&](std::size_t i) {
        Sample& s = samples[i];
        const double r = s.t - a;
        if (r == 0.0) {
          s.value = 0.0;
          return;
        }
        try {
          s.value = invert_laplace(transform, r, cfg.inversion);
        } catch (const NumericalError&) {
          s.value = std::numeric_limits<double>::quiet_NaN();
          s.finite = false;
        }
      },
      cfg.threads);
}

struct SampleAssessment {
  std::vector<double> grid;
  std::vector<double> values;
  double scale = 0.0;
  bool blowup_beyond_first = false;
};

inline SampleAssessment assess(const std::vector<Sample>& samples, SolveReport& report) {
  SampleAssessment out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].finite) {
      if (i == 0)
        report.notes.push_back("inversion blew up at the first grid point; excluded from the certificate");
      else
        out.blowup_beyond_first = true;
      continue;
    }
    out.grid.push_back(samples[i].arg);
    out.values.push_back(samples[i].value);
    out.scale = std::max(out.scale, std::fabs(samples[i].value));
  }
  if (out.blowup_beyond_first) report.notes.push_back("inversion blew up beyond the first grid point");
  return out;
}

inline bool decisive_violation(const SampleAssessment& s, const SolverConfig& cfg) {
  if (s.scale == 0.0) return false;
  const double limit = cfg.decisive_violation * s.scale;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (s.values[i] < -limit) return true;
    if (i > 0 && s.values[i - 1] - s.values[i] > limit) return true;
  }
  return false;
}

inline double sup_relative(const std::vector<Sample>& samples, const std::vector<double>& target) {
  double defect = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].finite) continue;
    defect = std::max(defect, samples[i].gap);
    scale = std::max(scale, std::fabs(target[i]));
  }
  return scale > 0.0 ? defect / scale : defect;
}

}  // namespace detail

/// Problem 1: the Choquet integral f(t) = (C) int_a^t g dmu via Laplace
/// inversion; residual against the quadrature convolution.
inline SolveReport solve_problem1(const Expr& g, const Distortion& d, double a, const Grid& grid,
                                  const SolverConfig& cfg = {}) {
  if (grid.empty()) throw InvalidGrid("solver needs a non-empty grid");
  if (grid.front() < a) throw InvalidGrid("grid starts before the interval origin");
  detail::require_f_plus(g, a, grid.back(), cfg, "g");

  const Expr g_a = detail::shifted(g, a);
  const LaplaceFn G = laplace_of(g_a, cfg.transform_quadrature);
  const LaplaceFn M = laplace_of(d.m(), cfg.transform_quadrature);
  const LaplaceFn F = [&](double s) { return s * M(s) * G(s); };

  SolveReport report;
  report.samples.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) report.samples[i].t = report.samples[i].arg = grid[i];
  detail::invert_samples(F, a, report.samples, cfg);

  const ChoquetProblem problem{a, g, d, grid};
  std::vector<double> reference(grid.size());
  parallel_for(
      grid.size(), [&](std::size_t i) { reference[i] = choquet_convolution(problem, grid[i], cfg.quadrature); },
      cfg.threads);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto& s = report.samples[i];
    s.oracle = reference[i];
    s.gap = s.finite ? std::fabs(s.value - s.oracle) : std::numeric_limits<double>::quiet_NaN();
  }
  report.residual = detail::sup_relative(report.samples, reference);

  const auto assessed = detail::assess(report.samples, report);
  report.certificate = certify_samples(assessed.grid, assessed.values,
                                       cfg.monotone_tolerance + cfg.sample_noise * assessed.scale);
  if (detail::decisive_violation(assessed, cfg))
    report.verdict = Verdict::DoesNotExistInFPlus;
  else if (report.certificate.monotone() && !assessed.blowup_beyond_first &&
           report.residual <= cfg.residual_threshold)
    report.verdict = Verdict::Exists;
  else
    report.verdict = Verdict::Inconclusive;
  return report;
}

/// Problem 2: the Choquet derivative g with f = (C) int_a^t g dmu. The
/// recovered samples are fed back through the convolution to check f.
inline SolveReport solve_problem2(const Expr& f, const Distortion& d, double a, const Grid& grid,
                                  const SolverConfig& cfg = {}) {
  detail::require_zero_at_a(f, a, cfg);
  const std::vector<double> pts = detail::inversion_points(grid, a);
  detail::require_f_plus(f, a, pts.back(), cfg, "f");

  const Expr f_a = detail::shifted(f, a);
  const LaplaceFn F = laplace_of(f_a, cfg.transform_quadrature);
  const LaplaceFn M = laplace_of(d.m(), cfg.transform_quadrature);
  const LaplaceFn G = [&](double s) {
    const double denom = s * M(s);
    if (denom == 0.0 || !std::isfinite(denom)) throw NumericalError("s M(s) vanishes");
    return F(s) / denom;
  };

  SolveReport report;
  report.samples.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) report.samples[i].t = report.samples[i].arg = pts[i];
  detail::invert_samples(G, a, report.samples, cfg);

  const auto assessed = detail::assess(report.samples, report);
  report.certificate = certify_samples(assessed.grid, assessed.values,
                                       cfg.monotone_tolerance + cfg.sample_noise * assessed.scale);

  // Verification: piecewise-linear g through the finite samples, with g(a)
  // extrapolated linearly from the first two and clamped to [0, g_0].
  std::vector<double> target(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) target[i] = f(pts[i]);
  if (!assessed.values.empty()) {
    double g_at_a = assessed.values.front();
    if (assessed.values.size() > 1) {
      const double x0 = assessed.grid[0], x1 = assessed.grid[1];
      const double slope = (assessed.values[1] - assessed.values[0]) / (x1 - x0);
      g_at_a = assessed.values[0] - slope * (x0 - a);
      g_at_a = std::clamp(g_at_a, std::min(0.0, assessed.values[0]), std::max(0.0, assessed.values[0]));
    }
    const auto rebuilt =
        convolve_sampled_integrand(d.m_prime(), a, g_at_a, assessed.grid, assessed.values, cfg.quadrature);
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      auto& s = report.samples[i];
      if (!s.finite) {
        s.oracle = s.gap = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      s.oracle = rebuilt[k++];
      s.gap = std::fabs(s.oracle - target[i]);
    }
  }
  report.residual = detail::sup_relative(report.samples, target);

  if (detail::decisive_violation(assessed, cfg))
    report.verdict = Verdict::DoesNotExistInFPlus;
  else if (report.certificate.monotone() && !assessed.blowup_beyond_first && !assessed.values.empty() &&
           report.residual <= cfg.residual_threshold)
    report.verdict = Verdict::Exists;
  else
    report.verdict = Verdict::Inconclusive;
  return report;
}

// Extra inversion points below the first knot, for verifying Problem 3. A
// ratio near 1 keeps the cubic interpolant accurate relative to m itself.
inline constexpr std::size_t kVerificationLeadPoints = 48;
inline constexpr double kVerificationLeadRatio = 0.85;

/// Problem 3: the distortion m with f = (C) int_a^t g d(m o lambda). Samples
/// are reported against r = t - a.
inline SolveReport solve_problem3(const Expr& f, const Expr& g, double a, const Grid& grid,
                                  const SolverConfig& cfg = {}) {
  detail::require_zero_at_a(f, a, cfg);
  const std::vector<double> pts = detail::inversion_points(grid, a);
  detail::require_f_plus(f, a, pts.back(), cfg, "f");
  detail::require_f_plus(g, a, pts.back(), cfg, "g");

  const Expr f_a = detail::shifted(f, a);
  const Expr g_a = detail::shifted(g, a);
  const LaplaceFn F = laplace_of(f_a, cfg.transform_quadrature);
  const LaplaceFn G = laplace_of(g_a, cfg.transform_quadrature);
  const LaplaceFn M = [&](double s) {
    const double gs = G(s);
    if (!std::isfinite(gs) || std::fabs(gs) < std::numeric_limits<double>::min())
      throw GVanishes("G_a(s) vanishes at s=" + std::to_string(s));
    return F(s) / (s * gs);
  };

  SolveReport report;
  report.samples.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    report.samples[i].t = pts[i];
    report.samples[i].arg = pts[i] - a;
  }
  detail::invert_samples(M, a, report.samples, cfg);

  const auto assessed = detail::assess(report.samples, report);
  report.certificate = certify_samples(assessed.grid, assessed.values,
                                       cfg.monotone_tolerance + cfg.sample_noise * assessed.scale);
  bool strictly_increasing = !assessed.values.empty() && assessed.values.front() > 0.0;
  for (std::size_t i = 1; i < assessed.values.size(); ++i)
    if (!(assessed.values[i] - assessed.values[i - 1] > cfg.strict_increase)) strictly_increasing = false;
  if (!strictly_increasing) report.notes.push_back("recovered distortion is not strictly increasing");

  std::vector<double> target(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) target[i] = f(pts[i]);
  if (!assessed.values.empty()) {
    // The grid says nothing about m on (0, r_0), which the convolution at the
    // first knots depends on entirely; invert extra samples there, graded
    // toward 0, for the verification only.
    std::vector<Sample> lead(kVerificationLeadPoints);
    for (std::size_t j = 0; j < lead.size(); ++j)
      lead[j].t = a + assessed.grid.front() * std::pow(kVerificationLeadRatio, static_cast<double>(lead.size() - j));
    detail::invert_samples(M, a, lead, cfg);
    std::vector<double> knots, values;
    for (const Sample& l : lead) {
      if (!l.finite || !(l.t - a > (knots.empty() ? 0.0 : knots.back()))) continue;
      knots.push_back(l.t - a);
      values.push_back(l.value);
    }
    const std::size_t skip = knots.size();
    knots.insert(knots.end(), assessed.grid.begin(), assessed.grid.end());
    values.insert(values.end(), assessed.values.begin(), assessed.values.end());
    const auto rebuilt = convolve_sampled_distortion(g, a, knots, values, cfg.quadrature);
    std::size_t k = skip;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      auto& s = report.samples[i];
      if (!s.finite) {
        s.oracle = s.gap = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      s.oracle = rebuilt[k++];
      s.gap = std::fabs(s.oracle - target[i]);
    }
  }
  report.residual = detail::sup_relative(report.samples, target);

  if (detail::decisive_violation(assessed, cfg))
    report.verdict = Verdict::DoesNotExistInFPlus;
  else if (report.certificate.monotone() && strictly_increasing && !assessed.blowup_beyond_first &&
           report.residual <= cfg.residual_threshold)
    report.verdict = Verdict::Exists;
  else
    report.verdict = Verdict::Inconclusive;
  return report;
}

}  // namespace choquet
