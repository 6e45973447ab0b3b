#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "choquet/choquet.hpp"

using namespace choquet;
using Catch::Approx;

namespace {

ChoquetProblem problem(const char* g, const char* m, double a, double t_max) {
  return ChoquetProblem::make(a, parse(g), Distortion::make(parse(m), t_max - a), Grid::uniform(a, t_max, 5));
}

double sqrt_primitive(double r) { return 4.0 / 15.0 * std::pow(r, 2.5); }

}  // namespace

TEST_CASE("grids", "[choquet]") {
  const Grid g = Grid::uniform(0.1, 0.3, 3);
  CHECK(g.back() == 0.3);
  CHECK(g[1] == Approx(0.2));
  CHECK_THROWS_AS(Grid(std::vector<double>{1.0, 1.0}), InvalidGrid);
  CHECK_THROWS_AS(Grid(std::vector<double>{0.0, NAN}), InvalidGrid);
  CHECK(Grid(std::vector<double>{}).empty());
  CHECK_THROWS_AS(Grid::uniform(0, 1, 1), InvalidGrid);
}

TEST_CASE("integrands outside F+ are rejected", "[choquet]") {
  CHECK_THROWS_AS(problem("t", "t", -1, 1), NotInFPlus);
  CHECK_THROWS_AS(problem("2 - t", "t", 0, 3), NotInFPlus);
  CHECK_THROWS_AS(ChoquetProblem::make(2, parse("t"), Distortion::identity(), Grid::uniform(1, 3, 3)), InvalidGrid);
}

TEST_CASE("square-root integrand against a half-square distortion", "[choquet]") {
  const auto p = problem("sqrt(t-1)", "t^2/2", 1, 4);
  for (double t : {1.5, 2.0, 3.0, 4.0}) {
    const double exact = sqrt_primitive(t - 1);
    CHECK(choquet_convolution(p, t) == Approx(exact).epsilon(1e-12));
    CHECK(choquet_level_set(p, t) == Approx(exact).epsilon(1e-10));
    CHECK(choquet_general(p, t) == Approx(exact).epsilon(1e-7));
  }
  CHECK(choquet_convolution(p, 2.0) == Approx(0.2666667).margin(1e-7));
  CHECK(choquet_integral(p, 1.0) == 0.0);
  CHECK(choquet_level_set(p, 1.0) == 0.0);
  CHECK(choquet_general(p, 1.0) == 0.0);
}

TEST_CASE("elementary integrals", "[choquet]") {
  // Constant c: every level set below c is the whole interval.
  const auto c = problem("3", "t^2/2", -1, 2);
  CHECK(choquet_level_set(c, 2) == Approx(3 * 4.5).epsilon(1e-12));
  CHECK(choquet_convolution(c, 2) == Approx(3 * 4.5).epsilon(1e-12));
  // Lebesgue measure reduces to the Riemann integral.
  const auto lin = problem("t", "t", 0, 1);
  CHECK(choquet_convolution(lin, 1) == Approx(0.5).epsilon(1e-14));
  CHECK(choquet_level_set(lin, 1) == Approx(0.5).epsilon(1e-10));
  CHECK(choquet_general(lin, 1) == Approx(0.5).epsilon(1e-8));
  // (35/4) t^1.5 under t^2/2 integrates to t^3.5.
  const auto p = problem("(35/4)*pow(t,1.5)", "t^2/2", 0, 2);
  CHECK(choquet_convolution(p, 1) == Approx(1.0).epsilon(1e-12));
  CHECK(choquet_convolution(problem("0", "t", 0, 1), 1) == 0.0);
}

TEST_CASE("general capacities use the general route", "[choquet]") {
  const Distortion d = Distortion::make(parse("t^2/2"), 3);
  const auto p = ChoquetProblem{1, parse("sqrt(t-1)"), distorted_capacity(d), Grid::uniform(1, 3, 3)};
  CHECK(choquet_integral(p, 2.0) == Approx(4.0 / 15.0).epsilon(1e-7));
  CHECK(choquet_level_set(p, 2.0) == Approx(4.0 / 15.0).epsilon(1e-9));
  CHECK_THROWS(choquet_convolution(p, 2.0));
}

TEST_CASE("routes agree on random monotone problems", "[choquet]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coef(0, 2), origin(-5, 5), span(0.1, 10);
  for (int n = 0; n < 15; ++n) {
    const double a = origin(rng);
    char g[256], m[256];
    std::snprintf(g, sizeof g, "%.6f + %.6f*(t-(%.17g)) + %.6f*(t-(%.17g))^3 + %.6f*sqrt(t-(%.17g))", coef(rng), coef(rng),
                  a, coef(rng), a, coef(rng), a);
    std::snprintf(m, sizeof m, "%.6f*t + %.6f*t^2", coef(rng) + 0.1, coef(rng));
    const double t = a + span(rng);
    const auto p = problem(g, m, a, t);
    const double conv = choquet_convolution(p, t);
    INFO(g << " | " << m << " | a=" << a << " t=" << t);
    CHECK(std::fabs(choquet_level_set(p, t) - conv) <= 1e-5 * (1 + std::fabs(conv)));
    CHECK(std::fabs(choquet_general(p, t) - conv) <= 1e-5 * (1 + std::fabs(conv)));
  }
}

TEST_CASE("output is nondecreasing and positively homogeneous", "[choquet]") {
  const auto p = problem("t^2 + sqrt(t)", "t + t^3", 0, 3);
  const auto p2 = problem("2.5*(t^2 + sqrt(t))", "t + t^3", 0, 3);
  double previous = 0.0;
  for (double t = 0.0; t <= 3.0; t += 0.125) {
    const double v = choquet_convolution(p, t);
    CHECK(v >= previous);
    previous = v;
    CHECK(choquet_convolution(p2, t) == Approx(2.5 * v).epsilon(1e-13));
  }
}

TEST_CASE("shift to origin is exact", "[choquet]") {
  const auto p = problem("sqrt(t-1)", "t^2/2", 1, 4);
  const auto s = shift_to_origin(p);
  CHECK(s.a == 0.0);
  CHECK(s.g(0.0) == 0.0);
  CHECK(s.g(2.25) == Approx(1.5));
  CHECK(s.grid.front() == 0.0);
  for (double t : {1.25, 2.0, 3.5})
    CHECK(choquet_convolution(s, t - 1) == Approx(choquet_convolution(p, t)).epsilon(1e-12));

  const auto at_zero = problem("t", "t", 0, 1);
  CHECK(render(shift_to_origin(at_zero).g) == render(at_zero.g));

  // A general capacity is transported along with the integrand; the finite
  // difference step depends on |tau|, so agreement is to that accuracy.
  const Distortion d = Distortion::make(parse("t^2/2"), 3);
  const auto gp = ChoquetProblem{1, parse("sqrt(t-1)"), distorted_capacity(d), Grid::uniform(1, 3, 3)};
  CHECK(choquet_general(shift_to_origin(gp), 1.0) == Approx(choquet_general(gp, 2.0)).epsilon(1e-9));
}

TEST_CASE("hereditary split", "[choquet]") {
  // Degenerate splits reproduce the integral.
  const auto p = problem("sqrt(t-1)", "t^2/2", 1, 3);
  CHECK(check_hereditary(p, 1.0, 3.0).gap <= 1e-12);
  CHECK(check_hereditary(p, 3.0, 3.0).gap <= 1e-12);

  // Lebesgue measure is additive, so any split works.
  const auto additive = problem("sqrt(t)", "t", 0, 2);
  for (double split : {0.25, 1.0, 1.5}) CHECK(check_hereditary(additive, split, 2.0).gap <= 1e-12);

  // For m = t^2/2 the integral over [0, 2] is not the sum over [0, 1] and
  // [1, 2]: the second piece is int_1^2 (2 - tau) sqrt(tau) dtau.
  const auto q = problem("sqrt(t)", "t^2/2", 0, 2);
  const auto h = check_hereditary(q, 1.0, 2.0);
  const double whole = sqrt_primitive(2.0);
  const double tail = (2.0 * (2.0 / 3.0) * (std::pow(2.0, 1.5) - 1.0)) - (2.0 / 5.0) * (std::pow(2.0, 2.5) - 1.0);
  CHECK(h.lhs == Approx(whole).epsilon(1e-12));
  CHECK(h.rhs == Approx(sqrt_primitive(1.0) + tail).epsilon(1e-12));
  CHECK(h.gap == Approx(whole - sqrt_primitive(1.0) - tail).epsilon(1e-10));
}

TEST_CASE("level-set start by bisection", "[choquet]") {
  const Expr g = parse("t^2");
  CHECK(level_set_start(g, 4.0, 0.0, 3.0) == Approx(2.0).epsilon(1e-11));
  CHECK(level_set_start(g, 9.0, 0.0, 3.0) == Approx(3.0).epsilon(1e-11));
  CHECK(level_set_start(g, 1e-8, 0.0, 3.0) == Approx(1e-4).epsilon(1e-7));
}
