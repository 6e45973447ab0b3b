#include <catch_amalgamated.hpp>

#include <cmath>

#include "choquet/solvers.hpp"

using namespace choquet;
using Catch::Approx;

namespace {

const Distortion& half_square() {
  static const Distortion d = Distortion::make(parse("t^2/2"), 20);
  return d;
}

double max_relative_error(const SolveReport& r, auto&& exact, double from) {
  double worst = 0.0;
  for (const auto& s : r.samples)
    if (s.arg >= from) worst = std::max(worst, std::fabs(s.value / exact(s.arg) - 1.0));
  return worst;
}

}  // namespace

TEST_CASE("forward problem through the transform", "[solvers]") {
  const auto r = solve_problem1(parse("sqrt(t-1)"), half_square(), 1, Grid::uniform(1, 3, 5));
  CHECK(r.verdict == Verdict::Exists);
  CHECK(r.samples[0].value == 0.0);
  CHECK(r.samples[2].value == Approx(4.0 / 15.0).epsilon(1e-5));
  CHECK(r.residual < 1e-5);

  const auto zero = solve_problem1(parse("0"), half_square(), 0, Grid::uniform(0, 2, 3));
  for (const auto& s : zero.samples) CHECK(s.value == 0.0);
}

TEST_CASE("derivative exists for the 7/2 power", "[solvers]") {
  const auto r = solve_problem2(parse("pow(t-1,3.5)"), half_square(), 1, Grid::uniform(1.1, 3, 10));
  CHECK(r.verdict == Verdict::Exists);
  CHECK(max_relative_error(r, [](double t) { return 8.75 * std::pow(t - 1, 1.5); }, 1.2) < 1e-3);
}

TEST_CASE("derivative of a square root does not exist in F+", "[solvers]") {
  for (double a : {-3.0, 0.0, 2.0}) {
    char f[64];
    std::snprintf(f, sizeof f, "sqrt(t-(%g))", a);
    const auto r = solve_problem2(parse(f), half_square(), a, Grid::uniform(a, a + 3, 16));
    INFO("a=" << a);
    CHECK(r.verdict == Verdict::DoesNotExistInFPlus);
    CHECK_FALSE(r.certificate.monotone());
  }
}

TEST_CASE("derivative of zero is zero", "[solvers]") {
  const auto r = solve_problem2(parse("0"), Distortion::identity(), 0, Grid::uniform(0, 1, 3));
  CHECK(r.verdict == Verdict::Exists);
  for (const auto& s : r.samples) CHECK(s.value == 0.0);
}

TEST_CASE("problem 2 inputs are validated", "[solvers]") {
  CHECK_THROWS_AS(solve_problem2(parse("t"), half_square(), 1, Grid::uniform(1, 2, 3)), FNotZeroAtA);
  CHECK_THROWS_AS(solve_problem2(parse("2 - (t-1)"), half_square(), 1, Grid::uniform(1, 2, 3)), FNotZeroAtA);
  CHECK_THROWS_AS(solve_problem2(parse("(t-1)*(2-t)"), half_square(), 1, Grid::uniform(1, 3, 3)), NotInFPlus);
}

TEST_CASE("problem 1 output fed to problem 2 recovers g", "[solvers]") {
  // f from the convolution of g = t^2 with m = t^2/2 is t^4/12.
  const auto forward = solve_problem1(parse("t^2"), half_square(), 0, Grid::uniform(0, 2, 5));
  CHECK(forward.samples[4].value == Approx(16.0 / 12.0).epsilon(1e-4));
  const auto back = solve_problem2(parse("t^4/12"), half_square(), 0, Grid::uniform(0.2, 3, 15));
  CHECK(back.verdict == Verdict::Exists);
  CHECK(max_relative_error(back, [](double t) { return t * t; }, 0.2) < 1e-3);
}

TEST_CASE("identification of the distortion", "[solvers]") {
  const auto r = solve_problem3(parse("pow(t-2,5.5)"), parse("sqrt(t-2)"), 2, Grid::uniform(2.2, 5, 40));
  CHECK(r.verdict == Verdict::Exists);
  CHECK(max_relative_error(r, [](double x) { return 693.0 / 256.0 * std::pow(x, 5); }, 0.2) < 1e-3);
  CHECK(r.residual < 1e-3);

  // Against g = 1 the primitive is the distortion itself.
  const auto flat = solve_problem3(parse("t^2/2"), parse("1"), 0, Grid::uniform(0.5, 2, 4));
  CHECK(max_relative_error(flat, [](double x) { return x * x / 2; }, 0.5) < 1e-5);

  // The additive case: g = f' with Lebesgue measure.
  const auto lebesgue = solve_problem3(parse("t^3"), parse("3*t^2"), 0, Grid::uniform(0.5, 3, 6));
  CHECK(max_relative_error(lebesgue, [](double x) { return x; }, 0.5) < 1e-5);

  // g = t with m = t gives f = t^2/2.
  const auto linear = solve_problem3(parse("t^2/2"), parse("t"), 0, Grid::uniform(0.5, 3, 6));
  CHECK(max_relative_error(linear, [](double x) { return x; }, 0.5) < 1e-3);
}

TEST_CASE("identification degenerate inputs", "[solvers]") {
  CHECK_THROWS_AS(solve_problem3(parse("0"), parse("0"), 0, Grid::uniform(0, 1, 3)), GVanishes);
  const auto zero = solve_problem3(parse("0"), parse("1"), 0, Grid::uniform(0, 1, 3));
  CHECK(zero.verdict == Verdict::Inconclusive);
}

TEST_CASE("solver verdicts are insensitive to the origin", "[solvers]") {
  for (double a : {-3.0, 0.0, 2.0}) {
    char f[64];
    std::snprintf(f, sizeof f, "pow(t-(%g),3.5)", a);
    const auto r = solve_problem2(parse(f), half_square(), a, Grid::uniform(a + 0.2, a + 3, 8));
    INFO("a=" << a);
    CHECK(r.verdict == Verdict::Exists);
    CHECK(max_relative_error(r, [a](double t) { return 8.75 * std::pow(t - a, 1.5); }, a + 0.2) < 1e-3);
  }
}
