#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "taxlevy/errors.hpp"
#include "taxlevy/tax_profile.hpp"

using namespace taxlevy;

namespace {

const double kXStar = 0.5 * (std::sqrt(5.0) - 1.0);

std::vector<TaxProfile> profiles() {
  return {ConstantTax{0.0}, ConstantTax{0.5}, ConstantTax{2.0}, ConstantTax{-0.3},
          TableTax({{0.0, 0.2}, {1.0, 0.8}, {3.0, 1.5}, {5.0, 3.0}}),
          TableTax({{0.0, 0.5}, {10.0, 0.5}}), SqrtExampleTax{1.0, 2.0}};
}

}  // namespace

TEST_CASE("rates") {
  CHECK(gamma_at(ConstantTax{2.0}, 7.0) == 2.0);
  CHECK(gamma_at(SqrtExampleTax{1.0, 2.0}, 0.75) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(gamma_at(SqrtExampleTax{1.0, 2.0}, 1.0) == std::numeric_limits<double>::infinity());
  CHECK(gamma_at(SqrtExampleTax{1.0, 2.0}, 3.0) == 2.0);
  CHECK(gamma_at(TableTax({{0.0, 0.5}, {10.0, 0.5}}), 3.0) == 0.5);
  const TableTax ramp({{1.0, 0.0}, {3.0, 1.0}});
  CHECK(gamma_at(ramp, 2.0) == doctest::Approx(0.5));
  CHECK(gamma_at(ramp, 0.5) == 0.0);
  CHECK(gamma_at(ramp, 9.0) == 1.0);
  CHECK_THROWS_AS(gamma_at(ConstantTax{1.0}, -1.0), DomainError);
  CHECK_THROWS_AS(TableTax({{1.0, 0.0}, {1.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(validate(TaxProfile{SqrtExampleTax{-1.0, 2.0}}), DomainError);
}

TEST_CASE("gamma_bar") {
  CHECK(gamma_bar(ConstantTax{2.0}, 1.0, 1.5) == doctest::Approx(0.5).epsilon(1e-14));
  for (const auto& p : profiles()) {
    CHECK(gamma_bar(p, 0.4, 0.4) == doctest::Approx(0.4).epsilon(1e-15));
  }
  CHECK(gamma_bar(SqrtExampleTax{1.0, 2.0}, kXStar, 0.84) == doctest::Approx(0.4).epsilon(1e-12));
  for (double s = kXStar; s < 1.0; s += 0.05) {
    CHECK(gamma_bar(SqrtExampleTax{1.0, 2.0}, kXStar, s) ==
          doctest::Approx(std::sqrt(1.0 - s)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(gamma_bar(ConstantTax{2.0}, 1.0, 0.5), DomainError);
}

TEST_CASE("gamma_bar is the antiderivative of 1 - gamma") {
  for (const auto& p : profiles()) {
    const double x = 0.3;
    for (double s = 0.35; s < 0.95; s += 0.0731) {
      const double h = 1e-6;
      const double d = (gamma_bar(p, x, s + h) - gamma_bar(p, x, s - h)) / (2 * h);
      CHECK(std::abs(d - (1.0 - gamma_at(p, s))) <= 1e-7 * std::max(1.0, gamma_at(p, s)));
    }
  }
}

TEST_CASE("barrier level") {
  CHECK(a_star(ConstantTax{2.0}, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(a_star(ConstantTax{4.0}, 1.5) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(std::isinf(a_star(ConstantTax{0.5}, 1.0)));
  CHECK(std::isinf(a_star(ConstantTax{1.0}, 1.0)));
  CHECK(a_star(SqrtExampleTax{1.0, 2.0}, kXStar) == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& p : profiles()) {
    for (double x : {0.2, 0.5, 1.0, 2.0}) {
      const double as = a_star(p, x);
      if (std::isfinite(as)) {
        CHECK(std::abs(gamma_bar(p, x, as)) <= 1e-9);
        CHECK(gamma_bar(p, x, 0.5 * (x + as)) > 0.0);
      }
    }
  }
  const double as = a_star(ConstantTax{2.0}, 1.0);
  for (double h : {1e-3, 1e-9, 1e-15}) {
    CHECK(gamma_bar_below_barrier(ConstantTax{2.0}, as, h) == doctest::Approx(h).epsilon(1e-12));
  }
  CHECK(gamma_bar_below_barrier(SqrtExampleTax{1.0, 2.0}, 1.0, 1e-20) ==
        doctest::Approx(1e-10).epsilon(1e-10));
}

TEST_CASE("x star") {
  CHECK(x_star(SqrtExampleTax{1.0, 2.0}) == doctest::Approx(kXStar).epsilon(1e-13));
  CHECK(x_star(SqrtExampleTax{4.0, 2.0}) ==
        doctest::Approx(0.5 * (std::sqrt(17.0) - 1.0)).epsilon(1e-13));
  for (double a : {0.01, 0.3, 1.0, 4.0, 100.0}) {
    const double y = x_star(SqrtExampleTax{a, 2.0});
    CHECK(std::abs(y - std::sqrt(a - y)) <= 1e-12);
  }
  CHECK_THROWS_AS(x_star(ConstantTax{2.0}), UnsupportedError);
}

TEST_CASE("inverse of gamma_bar") {
  CHECK(gamma_bar_inverse(ConstantTax{2.0}, 1.0, 0.5) == doctest::Approx(1.5));
  CHECK(gamma_bar_inverse(ConstantTax{0.5}, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(gamma_bar_inverse(ConstantTax{0.5}, 1.0, 2.0) == doctest::Approx(3.0));
  const TableTax light({{0.0, 0.2}, {1.0, 0.8}, {3.0, 0.1}});
  const TableTax heavy({{0.0, 1.2}, {1.0, 3.0}, {3.0, 1.5}});
  for (double s = 0.5; s < 2.5; s += 0.137) {
    CHECK(gamma_bar_inverse(light, 0.5, gamma_bar(light, 0.5, s)) == doctest::Approx(s).epsilon(1e-9));
  }
  for (double s = 0.5; s < a_star(heavy, 0.5); s += 0.0137) {
    CHECK(gamma_bar_inverse(heavy, 0.5, gamma_bar(heavy, 0.5, s)) == doctest::Approx(s).epsilon(1e-9));
  }
  CHECK_THROWS_AS(gamma_bar_inverse(ConstantTax{2.0}, 1.0, 1.5), DomainError);
  CHECK_THROWS_AS(gamma_bar_inverse(ConstantTax{0.5}, 1.0, 0.5), DomainError);
  const TableTax crossing({{0.0, 0.5}, {2.0, 1.5}});
  CHECK_THROWS_AS(gamma_bar_inverse(crossing, 0.5, 0.6), UnsupportedError);
}

TEST_CASE("regime predicates") {
  CHECK(is_light(ConstantTax{0.5}));
  CHECK_FALSE(is_light(ConstantTax{1.0}));
  CHECK(is_heavy_on(ConstantTax{2.0}, 5.0));
  CHECK_FALSE(is_heavy_on(ConstantTax{1.0}, 5.0));
  CHECK(tail_slope(ConstantTax{0.25}) == doctest::Approx(0.75));
  CHECK(profile_tag(SqrtExampleTax{}) == "sqrt_example");
}
