#include "doctest.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <vector>

#include "taxlevy/errors.hpp"
#include "taxlevy/scale.hpp"

using namespace taxlevy;

namespace {

const double kSqrt2 = std::sqrt(2.0);

std::vector<LevyModel> catalog() {
  return {BrownianDrift{0.0, kSqrt2}, BrownianDrift{1.0, 1.0}, BrownianDrift{-1.0, kSqrt2},
          CramerLundberg{1.0, 0.5, 1.0}, CramerLundberg{1.0, 2.0, 1.0},
          MixedModel{1.0, 0.5, 1.0, 1.0}, MixedModel{1.5, 0.5, 1.0, 0.5}};
}

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(b), 1e-300);
}

}  // namespace

TEST_CASE("driftless Brownian motion") {
  const auto s0 = make_scale(BrownianDrift{0.0, kSqrt2}, 0.0);
  const auto s1 = make_scale(BrownianDrift{0.0, kSqrt2}, 1.0);
  for (double x : {0.1, 0.5, 1.0, 2.0, 7.0}) {
    CHECK(rel_close(s0.w(x), x, 1e-13));
    CHECK(rel_close(s1.w(x), std::sinh(x), 1e-13));
    CHECK(rel_close(s1.w_prime(x), std::cosh(x), 1e-13));
    CHECK(rel_close(s1.z(x), std::cosh(x), 1e-13));
    CHECK(s0.z(x) == 1.0);
  }
  CHECK(s0.w(-3.0) == 0.0);
  CHECK(s1.w_prime(1.0) == doctest::Approx(1.5430806348).epsilon(1e-10));
  CHECK(s1.z(2.0) == doctest::Approx(3.7621956911).epsilon(1e-10));
  CHECK(s1.z(-1.0) == 1.0);
  CHECK(s0.w_second(1.0) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("Cramer-Lundberg q = 0") {
  const auto s = make_scale(CramerLundberg{1.0, 0.5, 1.0}, 0.0);
  for (double x : {0.0, 0.3, 1.0, 4.0}) {
    CHECK(rel_close(s.w(x), 2.0 - std::exp(-0.5 * x), 1e-13));
  }
  CHECK(s.w_at_zero() == doctest::Approx(1.0));
  CHECK(s.w(1e-300) == doctest::Approx(1.0));
}

TEST_CASE("closed form agrees with numerical inversion") {
  for (const auto& m : catalog()) {
    for (double q : {0.0, 0.5, 1.0, 5.0}) {
      const auto s = make_scale(m, q);
      for (double x : {0.05, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
        CHECK(rel_close(s.w(x), invert_laplace_reference(m, q, x), 1e-8));
      }
    }
  }
  CHECK(invert_laplace_reference(BrownianDrift{0.0, kSqrt2}, 0.0, 1.0) ==
        doctest::Approx(1.0).epsilon(1e-8));
  CHECK(invert_laplace_reference(BrownianDrift{0.0, kSqrt2}, 1.0, 1.0) ==
        doctest::Approx(std::sinh(1.0)).epsilon(1e-8));
  CHECK(invert_laplace_reference(CramerLundberg{1.0, 0.5, 1.0}, 0.0, 2.0) ==
        doctest::Approx(2.0 - std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("Laplace transform of the closed form") {
  for (const auto& m : catalog()) {
    for (double q : {0.0, 1.0}) {
      const auto s = make_scale(m, q);
      for (int k = 0; k < 5; ++k) {
        const double theta = s.phi() + 0.5 + 0.7 * k;
        // W grows like exp(Phi x), so the tail beyond 100 is below exp(-50).
        const double lt = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double x) { return std::exp(-theta * x) * s.w(x); }, 0.0, 100.0, 20, 1e-13);
        CHECK(rel_close(lt, 1.0 / (laplace_exponent(m, theta) - q), 1e-7));
      }
    }
  }
}

TEST_CASE("monotone, derivatives match finite differences") {
  for (const auto& m : catalog()) {
    for (double q : {0.0, 0.5, 5.0}) {
      const auto s = make_scale(m, q);
      double prev = s.w(0.0);
      for (double x = 0.05; x < 10.0; x += 0.05) {
        const double wx = s.w(x);
        CHECK(wx > prev);
        prev = wx;
      }
      for (double x : {0.3, 1.0, 3.0}) {
        const double h = 1e-5 * x;
        const double d1 = (s.w(x + h) - s.w(x - h)) / (2 * h);
        const double d2 = (s.w_prime(x + h) - s.w_prime(x - h)) / (2 * h);
        CHECK(rel_close(s.w_prime(x), d1, 1e-6));
        CHECK(rel_close(s.w_second(x), d2, 1e-5));
        CHECK(rel_close(s.log_derivative(x), s.w_prime(x) / s.w(x), 1e-12));
        const double dz = (s.z(x + h) - s.z(x - h)) / (2 * h);
        CHECK(std::abs(dz - q * s.w(x)) <= 1e-6 * std::max(1.0, q * s.w(x)));
      }
    }
  }
}

TEST_CASE("boundary behaviour at zero") {
  for (double q : {0.0, 1.0}) {
    const auto cl = make_scale(CramerLundberg{2.0, 0.5, 1.0}, q);
    CHECK(cl.w_at_zero() == doctest::Approx(0.5).epsilon(1e-12));
    // Finite activity with drift d: W'(0+) = (q + lambda) / d^2.
    CHECK(cl.w_prime(0.0) == doctest::Approx((q + 0.5) / 4.0).epsilon(1e-10));
    const auto bm = make_scale(BrownianDrift{0.3, 0.8}, q);
    const auto mx = make_scale(MixedModel{1.0, 0.5, 1.0, 0.5}, q);
    CHECK(bm.w_at_zero() == 0.0);
    CHECK(mx.w_at_zero() == 0.0);
    const double x = std::ldexp(1.0, -30);
    CHECK(bm.w(x) == doctest::Approx(x * 2.0 / 0.64).epsilon(1e-6));
    CHECK(bm.w_prime(x) == doctest::Approx(2.0 / 0.64).epsilon(1e-6));
    CHECK(mx.w_prime(x) == doctest::Approx(2.0 / 0.25).epsilon(1e-6));
  }
}

TEST_CASE("large arguments stay finite") {
  const auto s = make_scale(BrownianDrift{-1.0, 1.0}, 2.0);
  CHECK(std::isfinite(s.log_derivative(500.0)));
  CHECK(s.log_derivative(500.0) == doctest::Approx(s.phi()).epsilon(1e-10));
}

TEST_CASE("numeric representation") {
  const auto s = make_numeric_scale(BrownianDrift{0.0, kSqrt2}, 1.0);
  CHECK(s.representation() == ScaleEvaluator::Representation::numeric_inversion);
  CHECK(s.w(1.0) == doctest::Approx(std::sinh(1.0)).epsilon(1e-8));
  CHECK(s.w(-1.0) == 0.0);
  CHECK_THROWS_AS(s.w_second(1.0), UnsupportedError);
  CHECK_THROWS_AS(make_scale(BrownianDrift{0.0, 1.0}, -1.0), DomainError);
}
