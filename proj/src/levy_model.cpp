#include "taxlevy/levy_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "taxlevy/errors.hpp"

namespace taxlevy {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || !(v > 0.0)) {
    throw DomainError(std::string("model parameter '") + name +
                      "' must be finite and > 0");
  }
}

// Compound Poisson part with Exp(rate) claims: -lambda theta / (rate + theta).
template <class T>
T claim_part(double lambda, double rate, T theta) {
  return -lambda * theta / (rate + theta);
}

}  // namespace

void validate(const LevyModel& model) {
  std::visit(overloaded{
                 [](const BrownianDrift& m) {
                   if (!std::isfinite(m.mu)) {
                     throw DomainError("model parameter 'mu' must be finite");
                   }
                   require_positive(m.sigma, "sigma");
                 },
                 [](const CramerLundberg& m) {
                   require_positive(m.c, "c");
                   require_positive(m.lambda, "lambda");
                   require_positive(m.claim_rate, "claim_rate");
                 },
                 [](const MixedModel& m) {
                   require_positive(m.c, "c");
                   require_positive(m.lambda, "lambda");
                   require_positive(m.claim_rate, "claim_rate");
                   require_positive(m.sigma, "sigma");
                 },
             },
             model);
}

double laplace_exponent(const LevyModel& model, double theta) {
  if (!(theta >= 0.0)) {
    throw DomainError("laplace_exponent: theta must be >= 0");
  }
  return laplace_exponent(model, std::complex<double>(theta, 0.0)).real();
}

std::complex<double> laplace_exponent(const LevyModel& model,
                                      std::complex<double> theta) {
  return std::visit(
      overloaded{
          [&](const BrownianDrift& m) {
            return m.mu * theta + 0.5 * m.sigma * m.sigma * theta * theta;
          },
          [&](const CramerLundberg& m) {
            return m.c * theta + claim_part(m.lambda, m.claim_rate, theta);
          },
          [&](const MixedModel& m) {
            return m.c * theta + 0.5 * m.sigma * m.sigma * theta * theta +
                   claim_part(m.lambda, m.claim_rate, theta);
          },
      },
      model);
}

double laplace_exponent_derivative(const LevyModel& model, double theta) {
  return std::visit(
      overloaded{
          [&](const BrownianDrift& m) { return m.mu + m.sigma * m.sigma * theta; },
          [&](const CramerLundberg& m) {
            const double d = m.claim_rate + theta;
            return m.c - m.lambda * m.claim_rate / (d * d);
          },
          [&](const MixedModel& m) {
            const double d = m.claim_rate + theta;
            return m.c + m.sigma * m.sigma * theta -
                   m.lambda * m.claim_rate / (d * d);
          },
      },
      model);
}

double psi_prime_at_zero(const LevyModel& model) {
  return laplace_exponent_derivative(model, 0.0);
}

double phi(const LevyModel& model, double q) {
  if (!(q >= 0.0) || !std::isfinite(q)) {
    throw DomainError("phi: q must be finite and >= 0");
  }
  const double slope0 = psi_prime_at_zero(model);
  if (q == 0.0 && slope0 >= 0.0) {
    return 0.0;
  }

  // psi is increasing on [lo, inf); lo is 0 or the minimiser of psi.
  double lo = 0.0;
  if (slope0 < 0.0) {
    double a = 0.0;
    double b = 1.0;
    while (laplace_exponent_derivative(model, b) <= 0.0) {
      a = b;
      b *= 2.0;
    }
    for (int i = 0; i < 200 && b - a > 1e-15 * b; ++i) {
      const double m = 0.5 * (a + b);
      (laplace_exponent_derivative(model, m) > 0.0 ? b : a) = m;
    }
    lo = b;
  }

  double hi = std::max(1.0, 2.0 * lo);
  while (laplace_exponent(model, hi) <= q) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) {
      throw InternalError("phi: failed to bracket the root of psi = q");
    }
  }

  // Newton from the right converges monotonically on a convex increasing
  // stretch; bisection guards against leaving [lo, hi].
  double theta = hi;
  for (int it = 0; it < 200; ++it) {
    const double g = laplace_exponent(model, theta) - q;
    if (g == 0.0) {
      return theta;
    }
    (g > 0.0 ? hi : lo) = theta;
    const double slope = laplace_exponent_derivative(model, theta);
    double next = theta - g / slope;
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    }
    if (std::abs(next - theta) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                      std::max(1.0, theta)) {
      return next;
    }
    theta = next;
  }
  return theta;
}

double levy_density(const LevyModel& model, double z) {
  if (!(z > 0.0)) {
    throw DomainError("levy_density: z must be > 0");
  }
  const double lam = jump_intensity(model);
  const double r = claim_rate(model);
  return lam == 0.0 ? 0.0 : lam * r * std::exp(-r * z);
}

double levy_measure_tail(const LevyModel& model, double z) {
  if (!(z > 0.0)) {
    throw DomainError("levy_measure_tail: z must be > 0");
  }
  const double lam = jump_intensity(model);
  return lam == 0.0 ? 0.0 : lam * std::exp(-claim_rate(model) * z);
}

double jump_intensity(const LevyModel& model) {
  return std::visit(overloaded{
                        [](const BrownianDrift&) { return 0.0; },
                        [](const CramerLundberg& m) { return m.lambda; },
                        [](const MixedModel& m) { return m.lambda; },
                    },
                    model);
}

double claim_rate(const LevyModel& model) {
  return std::visit(overloaded{
                        [](const BrownianDrift&) { return 0.0; },
                        [](const CramerLundberg& m) { return m.claim_rate; },
                        [](const MixedModel& m) { return m.claim_rate; },
                    },
                    model);
}

double gaussian_coefficient(const LevyModel& model) {
  return std::visit(overloaded{
                        [](const BrownianDrift& m) { return m.sigma; },
                        [](const CramerLundberg&) { return 0.0; },
                        [](const MixedModel& m) { return m.sigma; },
                    },
                    model);
}

double linear_drift(const LevyModel& model) {
  return std::visit(overloaded{
                        [](const BrownianDrift& m) { return m.mu; },
                        [](const CramerLundberg& m) { return m.c; },
                        [](const MixedModel& m) { return m.c; },
                    },
                    model);
}

VariationType variation(const LevyModel& model) {
  if (const auto* cl = std::get_if<CramerLundberg>(&model)) {
    return {VariationType::Kind::bounded, cl->c};
  }
  return {VariationType::Kind::unbounded, 0.0};
}

std::string model_tag(const LevyModel& model) {
  return std::visit(overloaded{
                        [](const BrownianDrift&) { return std::string("brownian"); },
                        [](const CramerLundberg&) { return std::string("cl"); },
                        [](const MixedModel&) { return std::string("mixed"); },
                    },
                    model);
}

std::string describe(const LevyModel& model) {
  std::ostringstream os;
  os.precision(6);
  std::visit(overloaded{
                 [&](const BrownianDrift& m) {
                   os << "brownian(mu=" << m.mu << " sigma=" << m.sigma << ")";
                 },
                 [&](const CramerLundberg& m) {
                   os << "cl(c=" << m.c << " lambda=" << m.lambda
                      << " rate=" << m.claim_rate << ")";
                 },
                 [&](const MixedModel& m) {
                   os << "mixed(c=" << m.c << " lambda=" << m.lambda
                      << " rate=" << m.claim_rate << " sigma=" << m.sigma << ")";
                 },
             },
             model);
  return os.str();
}

}  // namespace taxlevy
