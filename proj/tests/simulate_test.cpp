#include "doctest.h"

#include <cmath>
#include <vector>

#include "taxlevy/errors.hpp"
#include "taxlevy/identities.hpp"
#include "taxlevy/simulate.hpp"

using namespace taxlevy;

namespace {

const double kSqrt2 = std::sqrt(2.0);

McConfig config(std::int64_t n, std::uint64_t seed = 7) {
  McConfig c;
  c.n_paths = n;
  c.seed = seed;
  return c;
}

void check_within_3se(const Estimate& e, double reference) {
  INFO("estimate " << e.value << " se " << e.std_error << " reference " << reference);
  CHECK(e.std_error > 0.0);
  CHECK(std::abs(e.value - reference) <= 3.0 * e.std_error);
}

}  // namespace

TEST_CASE("summary statistics") {
  const Estimate e = summarize({1.0, 2.0, 3.0, 4.0}, 1);
  CHECK(e.value == doctest::Approx(2.5));
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(e.n_effective == 3);
  CHECK(e.censored_fraction == doctest::Approx(0.25));
}

TEST_CASE("config validation") {
  McConfig c;
  CHECK_NOTHROW(c.validate());
  c.n_paths = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = McConfig{};
  c.time_step = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = McConfig{};
  c.horizon = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(default_horizon(CramerLundberg{1.0, 0.5, 1.0}, 2.0) == doctest::Approx(40.0));
  CHECK(default_horizon(BrownianDrift{0.0, 1.0}, 1.0) == doctest::Approx(100.0));
}

TEST_CASE("random streams") {
  PathRng a(1, 5);
  PathRng b(1, 5);
  PathRng c(1, 6);
  const double va = a.normal();
  CHECK(va == b.normal());
  CHECK(va != c.normal());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK((u > 0.0 && u <= 1.0));
    CHECK(a.exponential(2.0) >= 0.0);
  }
}

TEST_CASE("path identity U = gamma_bar(S) - (S - X)") {
  const std::vector<std::pair<LevyModel, TaxProfile>> cases = {
      {CramerLundberg{1.0, 0.5, 1.0}, ConstantTax{0.5}},
      {CramerLundberg{1.0, 0.5, 1.0}, TableTax({{0.0, 0.2}, {1.5, 0.9}, {4.0, 0.1}})},
      {MixedModel{1.5, 0.5, 1.0, 0.5}, ConstantTax{2.0}},
      {BrownianDrift{1.0, 1.0}, TableTax({{0.0, 0.3}, {2.0, 0.6}})}};
  McConfig c = config(1);
  c.horizon = 20.0;
  for (const auto& [model, profile] : cases) {
    for (std::uint64_t path = 0; path < 20; ++path) {
      PathRng rng(c.seed, path);
      std::vector<TracePoint> trace;
      simulate_path(model, profile, 1.0, PathRequest{}, c, rng, &trace);
      REQUIRE(trace.size() >= 2);
      for (const auto& p : trace) {
        const double expected = gamma_bar(profile, 1.0, p.s) - (p.s - p.x);
        CHECK(std::abs(p.u - expected) <= 1e-10 * std::max({1.0, std::abs(p.x), p.s}));
      }
    }
  }
}

TEST_CASE("deterministic and independent of the thread count") {
  McConfig c = config(3000, 99);
  c.horizon = 30.0;
  const MixedModel m{1.5, 0.5, 1.0, 0.5};
  const Estimate a = estimate_ruin(m, ConstantTax{0.5}, 0.0, 1.0, c);
  const Estimate b = estimate_ruin(m, ConstantTax{0.5}, 0.0, 1.0, c);
  c.threads = 3;
  const Estimate d = estimate_ruin(m, ConstantTax{0.5}, 0.0, 1.0, c);
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  CHECK(a.value == d.value);
  CHECK(a.std_error == d.std_error);
  c.seed = 100;
  CHECK(estimate_ruin(m, ConstantTax{0.5}, 0.0, 1.0, c).value != a.value);
}

TEST_CASE("censoring is reported") {
  McConfig c = config(2000);
  c.horizon = 0.5;
  const Estimate e = estimate_ruin(CramerLundberg{1.0, 0.5, 1.0}, ConstantTax{0.0}, 0.0, 20.0, c);
  CHECK(e.value < 0.01);
  CHECK(e.censored_fraction > 0.99);
}

TEST_CASE("exact Cramer-Lundberg estimates") {
  const CramerLundberg m{1.0, 0.5, 1.0};
  McConfig c = config(100000, 11);
  c.horizon = 300.0;
  const auto s0 = make_scale(m, 0.0);
  check_within_3se(estimate_ruin(m, ConstantTax{0.0}, 0.0, 2.0, c),
                   ruin_probability(s0, ConstantTax{0.0}, 2.0).value);
  check_within_3se(estimate_creep2(m, ConstantTax{2.0}, 0.0, 1.0, c),
                   creep2_laplace(s0, ConstantTax{2.0}, 1.0).value);
  check_within_3se(estimate_npv(m, ConstantTax{2.0}, 0.0, 1.0, c), npv_tax(s0, ConstantTax{2.0}, 1.0).value);
  const auto s5 = make_scale(m, 0.5);
  const TableTax t({{0.0, 0.2}, {1.5, 0.9}, {4.0, 0.1}});
  check_within_3se(estimate_exit_up(m, t, 0.5, 1.0, 3.0, c), two_sided_up(s5, t, 1.0, 3.0).value);
  check_within_3se(estimate_exit_down(m, t, 0.5, 1.0, 3.0, c), two_sided_down(s5, t, 1.0, 3.0).value);
}

TEST_CASE("Euler estimates for Brownian motion") {
  const BrownianDrift m{0.0, kSqrt2};
  McConfig c = config(100000, 12);
  check_within_3se(estimate_exit_up(m, ConstantTax{0.0}, 0.0, 1.0, 2.0, c), 0.5);
  check_within_3se(estimate_npv(m, ConstantTax{2.0}, 0.0, 1.0, c), 1.0);
  const Estimate e = estimate_exit_up(m, ConstantTax{0.0}, 0.0, 1.0, 2.0, c);
  CHECK(e.warning.empty());
  c.time_step = 0.1;
  CHECK_FALSE(step_warning(m, 0.2, c).empty());
}

TEST_CASE("estimator preconditions") {
  const McConfig c = config(10);
  CHECK_THROWS_AS(estimate_exit_up(BrownianDrift{0.0, 1.0}, ConstantTax{0.0}, 0.0, 1.0, 0.5, c), DomainError);
  CHECK_THROWS_AS(estimate_exit_up(BrownianDrift{0.0, 1.0}, ConstantTax{2.0}, 0.0, 1.0, 2.5, c), DomainError);
  CHECK_THROWS_AS(estimate_ruin(BrownianDrift{0.0, 1.0}, ConstantTax{0.0}, 0.0, -1.0, c), DomainError);
}
