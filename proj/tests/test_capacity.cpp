#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "choquet/capacity.hpp"

using namespace choquet;
using Catch::Approx;

TEST_CASE("distorted measure of intervals", "[capacity]") {
  const Distortion half_square = Distortion::make(parse("t^2/2"));
  CHECK(half_square.measure(1, 3) == 2.0);
  CHECK(half_square.measure(5, 5) == 0.0);
  CHECK(Distortion::identity().measure(-1.5, 2.0) == 3.5);
  CHECK_THROWS_AS(half_square.measure(3, 1), InvalidInterval);
}

TEST_CASE("distortions are validated", "[capacity]") {
  CHECK_THROWS_AS(Distortion::make(parse("t - 1")), InvalidDistortion);
  CHECK_THROWS_AS(Distortion::make(parse("t*(1 - t)")), InvalidDistortion);
  CHECK_THROWS_AS(Distortion::make(parse("-t")), InvalidDistortion);
  CHECK_NOTHROW(Distortion::make(parse("1 - exp(-t)")));
  CHECK_NOTHROW(Distortion::make(parse("0")));
}

TEST_CASE("distorted measures are translation invariant", "[capacity]") {
  const IntervalCapacity mu = distorted_capacity(Distortion::make(parse("t^3 + sqrt(t)")));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(-10, 10), len(0, 3);
  for (int i = 0; i < 200; ++i) {
    const double u = x(rng), l = len(rng), d = x(rng);
    CHECK(mu(u + d, u + d + l) == Approx(mu(u, u + l)).epsilon(1e-12));
  }
}

TEST_CASE("tau derivative of the interval measure", "[capacity]") {
  const Distortion d = Distortion::make(parse("t^2/2"));
  const IntervalCapacity mu = distorted_capacity(d);
  CHECK(capacity_tau_derivative(mu, 1.0, 3.0) == Approx(-2.0).epsilon(1e-8));
  CHECK(capacity_tau_derivative(lebesgue_capacity(), 0.3, 2.0) == Approx(-1.0).epsilon(1e-10));
  // At tau = t only the backward stencil fits.
  CHECK(capacity_tau_derivative(mu, 3.0, 3.0) == Approx(-d.m_prime()(0.0)).margin(1e-9));
  // Near the lower end the forward stencil keeps to [lower, t].
  CHECK(capacity_tau_derivative(mu, 1.0, 3.0, 1e-5, 1.0) == Approx(-2.0).epsilon(1e-8));

  const Distortion cubic = Distortion::make(parse("t^3 + t"));
  const IntervalCapacity mc = distorted_capacity(cubic);
  for (double tau : {0.0, 0.7, 1.9}) {
    CHECK(capacity_tau_derivative(mc, tau, 2.0) == Approx(-cubic.m_prime()(2.0 - tau)).epsilon(1e-7));
  }
}

TEST_CASE("membership in F+", "[capacity]") {
  CHECK(check_f_plus(parse("sqrt(t-1)"), 1, 9, 1001).monotone());
  CHECK(check_f_plus(parse("0"), -4, 4, 11).monotone());

  const auto decreasing = check_f_plus(parse("0.01/(t-1)^1.5"), 1.1, 9, 101);
  CHECK_FALSE(decreasing.monotone());
  REQUIRE(decreasing.violated_at);
  CHECK(*decreasing.violated_at == 1);

  const auto negative = check_f_plus(parse("t"), -1, 1, 5);
  REQUIRE(negative.violated_at);
  CHECK(*negative.violated_at == 0);
}

TEST_CASE("sample certificates honour the tolerance", "[capacity]") {
  const std::vector<double> grid{0, 1, 2, 3};
  CHECK(certify_samples(grid, std::vector<double>{0, 1, 1 - 1e-12, 2}).monotone());
  const auto c = certify_samples(grid, std::vector<double>{0, 1, 0.5, 2});
  CHECK_FALSE(c.monotone());
  CHECK(*c.violated_at == 2);
  CHECK(c.max_violation == 0.5);
}
