#include "doctest.h"

#include <cmath>
#include <vector>

#include "taxlevy/errors.hpp"
#include "taxlevy/levy_model.hpp"

using namespace taxlevy;

namespace {

const double kSqrt2 = std::sqrt(2.0);

std::vector<LevyModel> catalog() {
  return {BrownianDrift{0.0, kSqrt2}, BrownianDrift{1.0, 1.0}, BrownianDrift{-1.0, kSqrt2},
          CramerLundberg{1.0, 0.5, 1.0}, CramerLundberg{1.0, 2.0, 1.0},
          MixedModel{1.0, 0.5, 1.0, 1.0}, MixedModel{1.5, 0.5, 1.0, 0.5}};
}

}  // namespace

TEST_CASE("laplace exponent closed forms") {
  CHECK(laplace_exponent(BrownianDrift{0.0, kSqrt2}, 3.0) == doctest::Approx(9.0).epsilon(1e-14));
  CHECK(laplace_exponent(CramerLundberg{1.0, 0.5, 1.0}, 1.0) == doctest::Approx(0.75).epsilon(1e-14));
  for (const auto& m : catalog()) {
    CHECK(laplace_exponent(m, 0.0) == 0.0);
  }
  // Mixed = Gaussian part plus Cramer-Lundberg part.
  const double theta = 0.7;
  CHECK(laplace_exponent(MixedModel{1.0, 0.5, 1.0, 1.0}, theta) ==
        doctest::Approx(laplace_exponent(CramerLundberg{1.0, 0.5, 1.0}, theta) +
                        0.5 * theta * theta)
            .epsilon(1e-14));
  CHECK_THROWS_AS(laplace_exponent(BrownianDrift{0.0, 1.0}, -0.1), DomainError);
}

TEST_CASE("drift at zero") {
  CHECK(psi_prime_at_zero(BrownianDrift{0.0, kSqrt2}) == 0.0);
  CHECK(psi_prime_at_zero(CramerLundberg{1.0, 0.5, 1.0}) == doctest::Approx(0.5));
  CHECK(psi_prime_at_zero(MixedModel{1.0, 0.5, 1.0, 1.0}) == doctest::Approx(0.5));
  for (const auto& m : catalog()) {
    const double h = 1e-6;
    const double fd = (laplace_exponent(m, 2 * h) - laplace_exponent(m, h)) / h;
    CHECK(psi_prime_at_zero(m) == doctest::Approx(fd).epsilon(1e-4).scale(1.0));
  }
}

TEST_CASE("phi root") {
  CHECK(phi(BrownianDrift{0.0, kSqrt2}, 4.0) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(phi(BrownianDrift{-1.0, kSqrt2}, 0.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(phi(CramerLundberg{1.0, 0.5, 1.0}, 0.0) == 0.0);
  CHECK(phi(BrownianDrift{0.0, 1.0}, 0.0) == 0.0);
  CHECK_THROWS_AS(phi(BrownianDrift{0.0, 1.0}, -1.0), DomainError);
}

TEST_CASE("psi(Phi(q)) = q on a log grid and Phi is nondecreasing") {
  for (const auto& m : catalog()) {
    double prev = -1.0;
    for (double lq = -6.0; lq <= 3.0; lq += 0.25) {
      const double q = std::pow(10.0, lq);
      const double r = phi(m, q);
      CHECK(r >= prev);
      prev = r;
      // Rounding Phi(q) to a double alone moves psi by eps Phi psi'(Phi).
      const double floor = 4.0 * 0x1p-53 * r * laplace_exponent_derivative(m, r);
      CHECK(std::abs(laplace_exponent(m, r) - q) <= 1e-10 * q + floor);
    }
  }
}

TEST_CASE("psi is convex") {
  for (const auto& m : catalog()) {
    for (double t1 = 0.0; t1 < 6.0; t1 += 0.37) {
      for (double t2 = t1 + 0.1; t2 < 8.0; t2 += 0.91) {
        const double mid = laplace_exponent(m, 0.5 * (t1 + t2));
        CHECK(mid <= 0.5 * (laplace_exponent(m, t1) + laplace_exponent(m, t2)) + 1e-12);
      }
    }
  }
}

TEST_CASE("jump measure") {
  CHECK(levy_density(BrownianDrift{0.0, 1.0}, 1.0) == 0.0);
  CHECK(levy_measure_tail(BrownianDrift{0.0, 1.0}, 1.0) == 0.0);
  CHECK(levy_density(CramerLundberg{1.0, 0.5, 1.0}, 1e-300) == doctest::Approx(0.5));
  CHECK(levy_measure_tail(CramerLundberg{1.0, 0.5, 2.0}, 1.0) ==
        doctest::Approx(0.5 * std::exp(-2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(levy_density(CramerLundberg{1.0, 0.5, 1.0}, 0.0), DomainError);
  CHECK_THROWS_AS(levy_measure_tail(CramerLundberg{1.0, 0.5, 1.0}, -1.0), DomainError);
}

TEST_CASE("variation type and validation") {
  CHECK(variation(CramerLundberg{2.0, 0.5, 1.0}).bounded());
  CHECK(variation(CramerLundberg{2.0, 0.5, 1.0}).drift == 2.0);
  CHECK_FALSE(variation(BrownianDrift{0.0, 1.0}).bounded());
  CHECK_FALSE(variation(MixedModel{1.0, 0.5, 1.0, 1.0}).bounded());
  CHECK_THROWS_AS(validate(LevyModel{BrownianDrift{0.0, 0.0}}), DomainError);
  CHECK_THROWS_AS(validate(LevyModel{CramerLundberg{1.0, -0.5, 1.0}}), DomainError);
  CHECK_THROWS_AS(validate(LevyModel{MixedModel{1.0, 0.5, 1.0, NAN}}), DomainError);
}
