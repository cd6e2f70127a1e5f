#include "taxlevy/identities.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "exponent_sweep.hpp"
#include "taxlevy/errors.hpp"

namespace taxlevy {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_start(const TaxProfile& profile, double x, const char* what) {
  validate(profile);
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(what) + ": x must be finite and > 0");
  }
}

double checked_a_star(const TaxProfile& profile, double x, double a, const char* what) {
  if (!(a >= x)) {
    throw DomainError(std::string(what) + ": need a >= x");
  }
  const double astar = a_star(profile, x);
  if (a > astar) {
    throw DomainError(std::string(what) + ": a exceeds a*(x), where gamma_bar < 0");
  }
  return astar;
}

SurvivalExponent to_exponent(const detail::SweepResult& r) {
  return {r.exponent, r.exponent_error, r.divergent};
}

// f without the argument check; the sweep only hands it levels > 0.
double f_unchecked(const ScaleEvaluator& scale, double z) {
  const double q = scale.q();
  if (q == 0.0) {
    return scale.log_derivative(z);
  }
  const auto terms = scale.terms();
  bool simple = scale.representation() ==
                ScaleEvaluator::Representation::rational_closed_form;
  double top = -kInf;
  for (const auto& t : terms) {
    simple = simple && t.c1 == 0.0 && t.rate != 0.0;
    top = std::max(top, t.rate);
  }
  if (!simple) {
    return scale.z(z) * scale.log_derivative(z) - q * scale.w(z);
  }
  // With simple poles, sum_i c_i / rate_i = 1/q and Z W' - q W^2 collapses to
  // q sum_{i<j} c_i c_j (r_i - r_j)^2 / (r_i r_j) e^{(r_i + r_j) z}, which is
  // free of the cancelling e^{2 Phi z} terms. Both sums are scaled by
  // e^{-top z}.
  double num = 0.0;
  double den = 0.0;
  double max_abs_rate = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& ti = terms[i];
    den += ti.c0 * std::exp((ti.rate - top) * z);
    max_abs_rate = std::max(max_abs_rate, std::abs(ti.rate));
    for (std::size_t j = i + 1; j < terms.size(); ++j) {
      const auto& tj = terms[j];
      const double gap = ti.rate - tj.rate;
      num += ti.c0 * tj.c0 * gap * gap / (ti.rate * tj.rate) *
             std::exp((ti.rate + tj.rate - top) * z);
    }
  }
  if (z * max_abs_rate <= 1.0) {
    // The exponential sum for W cancels near 0 under unbounded variation.
    den = scale.w(z) * std::exp(-top * z);
  }
  return q * num / den;
}

void require_heavy(const TaxProfile& profile, double x, const char* what) {
  const double astar = a_star(profile, x);
  if (!std::isfinite(astar) || !is_heavy_on(profile, astar)) {
    throw UnsupportedError(std::string(what) +
                           ": needs a continuous tax rate > 1 on [0, a*(x)]");
  }
}

void check_pair(const ScaleEvaluator& scale_alpha, const ScaleEvaluator& scale_beta,
                const char* what) {
  if (!(scale_alpha.model() == scale_beta.model())) {
    throw DomainError(std::string(what) + ": alpha and beta evaluators use different models");
  }
}

}  // namespace

double SurvivalExponent::survival_factor() const {
  return divergent ? 0.0 : std::exp(-value);
}

double excursion_tail_rate(const ScaleEvaluator& scale, double x) {
  if (!(x > 0.0)) {
    throw DomainError("excursion_tail_rate: x must be > 0");
  }
  return std::max(0.0, scale.log_derivative(x) - scale.phi());
}

SurvivalExponent survival_exponent(const ScaleEvaluator& scale, const TaxProfile& profile,
                                   double x, double a, const QuadratureConfig& quad) {
  check_start(profile, x, "survival_exponent");
  checked_a_star(profile, x, a, "survival_exponent");
  return to_exponent(detail::sweep(scale, profile, x, a, nullptr, quad));
}

Evaluation two_sided_up(const ScaleEvaluator& scale, const TaxProfile& profile, double x,
                        double a, const QuadratureConfig& quad) {
  const SurvivalExponent e = survival_exponent(scale, profile, x, a, quad);
  const double v = e.survival_factor();
  return {v, v * e.error};
}

double ruin_integrand_f(const ScaleEvaluator& scale, double z) {
  if (!(z > 0.0)) {
    throw DomainError("ruin_integrand_f: z must be > 0");
  }
  return f_unchecked(scale, z);
}

Evaluation two_sided_down(const ScaleEvaluator& scale, const TaxProfile& profile, double x,
                          double a, const QuadratureConfig& quad) {
  check_start(profile, x, "two_sided_down");
  checked_a_star(profile, x, a, "two_sided_down");
  if (std::isinf(a)) {
    throw DomainError("two_sided_down: a must be finite; use ruin_laplace");
  }
  const detail::OuterWeight weight = [&](const detail::SweepPoint& p) {
    return f_unchecked(scale, p.gbar);
  };
  const auto r = detail::sweep(scale, profile, x, a, weight, quad);
  return {r.outer, r.outer_error};
}

Evaluation ruin_laplace(const ScaleEvaluator& scale, const TaxProfile& profile, double x,
                        const QuadratureConfig& quad) {
  check_start(profile, x, "ruin_laplace");
  if (std::isfinite(a_star(profile, x))) {
    throw DomainError("ruin_laplace: a*(x) is finite; use two_sided_down with a = a*(x)");
  }
  const detail::OuterWeight weight = [&](const detail::SweepPoint& p) {
    return f_unchecked(scale, p.gbar);
  };
  const auto r = detail::sweep(scale, profile, x, kInf, weight, quad);
  return {r.outer, r.outer_error};
}

Evaluation ruin_probability(const ScaleEvaluator& scale_q0, const TaxProfile& profile,
                            double x, const QuadratureConfig& quad) {
  check_start(profile, x, "ruin_probability");
  if (scale_q0.q() != 0.0) {
    throw DomainError("ruin_probability: needs the q = 0 scale function");
  }
  if (std::isfinite(a_star(profile, x))) {
    throw DomainError("ruin_probability: a*(x) is finite; use two_sided_down with a = a*(x)");
  }
  const auto e = to_exponent(detail::sweep(scale_q0, profile, x, kInf, nullptr, quad));
  if (e.divergent) {
    return {1.0, 0.0};
  }
  return {-std::expm1(-e.value), std::exp(-e.value) * e.error};
}

Evaluation creep2_laplace(const ScaleEvaluator& scale, const TaxProfile& profile, double x,
                          const QuadratureConfig& quad) {
  check_start(profile, x, "creep2_laplace");
  const double astar = a_star(profile, x);
  if (!std::isfinite(astar)) {
    throw DomainError("creep2_laplace: a*(x) is infinite");
  }
  const SurvivalExponent e = survival_exponent(scale, profile, x, astar, quad);
  const double v = e.survival_factor();
  return {v, v * e.error};
}

CreepTest creep2_test(const ScaleEvaluator& scale_q0, const TaxProfile& profile, double x,
                      const QuadratureConfig& quad) {
  check_start(profile, x, "creep2_test");
  if (scale_q0.q() != 0.0) {
    throw DomainError("creep2_test: needs the q = 0 scale function");
  }
  const double astar = a_star(profile, x);
  if (!std::isfinite(astar)) {
    throw DomainError("creep2_test: a*(x) is infinite");
  }
  const SurvivalExponent e = survival_exponent(scale_q0, profile, x, astar, quad);
  return {!e.divergent, e};
}

Evaluation npv_tax(const ScaleEvaluator& scale, const TaxProfile& profile, double x,
                   const QuadratureConfig& quad) {
  check_start(profile, x, "npv_tax");
  if (const auto* c = std::get_if<ConstantTax>(&profile); c != nullptr && c->gamma == 0.0) {
    return {0.0, 0.0};
  }
  const double astar = a_star(profile, x);
  if (std::isinf(astar) && scale.q() == 0.0 &&
      !detail::exponent_diverges_at_infinity(scale, profile) &&
      gamma_at(profile, std::numeric_limits<double>::max()) != 0.0) {
    // Survival has positive probability and tax accrues at a non-vanishing
    // rate forever.
    return {kInf, 0.0};
  }
  const detail::OuterWeight weight = [&](const detail::SweepPoint& p) {
    return p.below_barrier >= 0.0 ? gamma_below(profile, astar, p.below_barrier)
                                  : gamma_at(profile, p.t);
  };
  const auto r = detail::sweep(scale, profile, x, astar, weight, quad);
  return {r.outer, r.outer_error};
}

double triple_law_prefactor(const ScaleEvaluator& scale_alpha, const TaxProfile& profile,
                            double x, double theta, const QuadratureConfig& quad) {
  check_start(profile, x, "triple_law_prefactor");
  require_heavy(profile, x, "triple_law_prefactor");
  if (!(theta > 0.0) || !(theta <= x)) {
    throw DomainError("triple_law_prefactor: theta must lie in (0, x]");
  }
  const auto excess = [&](double v) {
    return gamma_at(profile, gamma_bar_inverse(profile, x, v)) - 1.0;
  };
  const auto integrand = [&](double v) { return scale_alpha.log_derivative(v) / excess(v); };
  const QuadResult r = integrate(integrand, theta, x, quad);
  return std::exp(-r.value) / excess(theta);
}

TripleLawDensity triple_law_density(const ScaleEvaluator& scale_alpha,
                                    const ScaleEvaluator& scale_beta,
                                    const TaxProfile& profile, double x,
                                    const TripleLawPoint& point,
                                    const QuadratureConfig& quad) {
  check_start(profile, x, "triple_law_density");
  check_pair(scale_alpha, scale_beta, "triple_law_density");
  if (scale_alpha.q() != point.alpha || scale_beta.q() != point.beta) {
    throw DomainError("triple_law_density: evaluator q does not match alpha/beta");
  }
  const double theta = point.theta;
  const double y = point.y;
  if (!(0.0 <= y && y <= theta && theta < x && theta > 0.0) || !(point.z > 0.0)) {
    throw DomainError("triple_law_density: need 0 <= y <= theta < x, theta > 0, z > 0");
  }
  require_heavy(profile, x, "triple_law_density");

  const LevyModel& model = scale_beta.model();
  TripleLawDensity out;
  if (jump_intensity(model) == 0.0) {
    return out;
  }
  const double pre = triple_law_prefactor(scale_alpha, profile, x, theta, quad);
  if (y < theta) {
    const double bracket = scale_beta.w_prime(theta - y) -
                           scale_beta.log_derivative(theta) * scale_beta.w(theta - y);
    out.ac_density = pre * bracket * levy_density(model, y + point.z);
  }
  out.atom_density = pre * scale_beta.w_at_zero() * levy_density(model, theta + point.z);
  return out;
}

double creep1_density(const ScaleEvaluator& scale_alpha, const ScaleEvaluator& scale_beta,
                      const TaxProfile& profile, double x, double theta,
                      const QuadratureConfig& quad) {
  check_start(profile, x, "creep1_density");
  check_pair(scale_alpha, scale_beta, "creep1_density");
  if (!(theta > 0.0 && theta < x)) {
    throw DomainError("creep1_density: theta must lie in (0, x)");
  }
  require_heavy(profile, x, "creep1_density");
  const double sigma = gaussian_coefficient(scale_beta.model());
  if (sigma == 0.0) {
    return 0.0;
  }
  const double wp = scale_beta.w_prime(theta);
  const double bracket =
      0.5 * sigma * sigma * (wp * wp / scale_beta.w(theta) - scale_beta.w_second(theta));
  return triple_law_prefactor(scale_alpha, profile, x, theta, quad) * bracket;
}

namespace closed_form {

double two_sided_up_untaxed(const ScaleEvaluator& scale, double x, double a) {
  if (!(x > 0.0) || !(a >= x)) {
    throw DomainError("two_sided_up_untaxed: need 0 < x <= a");
  }
  return scale.w(x) / scale.w(a);
}

double two_sided_down_untaxed(const ScaleEvaluator& scale, double x, double a) {
  if (!(x > 0.0) || !(a >= x)) {
    throw DomainError("two_sided_down_untaxed: need 0 < x <= a");
  }
  return scale.z(x) - scale.w(x) * scale.z(a) / scale.w(a);
}

double two_sided_up_heavy(const ScaleEvaluator& scale, double gamma, double x, double a) {
  if (!(gamma > 1.0) || !(x > 0.0) || !(a >= x) || a > gamma * x / (gamma - 1.0)) {
    throw DomainError("two_sided_up_heavy: need gamma > 1 and 0 < x <= a <= a*(x)");
  }
  const double level = std::max(0.0, a * (1.0 - gamma) + gamma * x);
  return std::pow(scale.w(level) / scale.w(x), 1.0 / (gamma - 1.0));
}

Evaluation npv_heavy(const ScaleEvaluator& scale, double gamma, double x,
                     const QuadratureConfig& quad) {
  if (!(gamma > 1.0) || !(x > 0.0)) {
    throw DomainError("npv_heavy: need gamma > 1 and x > 0");
  }
  const double wx = scale.w(x);
  const double power = 1.0 / (gamma - 1.0);
  const QuadResult r = integrate(
      [&](double t) { return std::pow(scale.w(t) / wx, power); }, 0.0, x, quad);
  const double k = gamma / (gamma - 1.0);
  return {k * r.value, k * r.error};
}

double ruin_probability_light(const ScaleEvaluator& scale_q0, double gamma, double x) {
  if (scale_q0.q() != 0.0 || !(gamma >= 0.0 && gamma < 1.0) || !(x > 0.0)) {
    throw DomainError("ruin_probability_light: need q = 0, gamma in [0, 1), x > 0");
  }
  const double drift = psi_prime_at_zero(scale_q0.model());
  if (drift <= 0.0) {
    return 1.0;
  }
  return 1.0 - std::pow(drift * scale_q0.w(x), 1.0 / (1.0 - gamma));
}

Evaluation survival_exponent_by_level(const ScaleEvaluator& scale, const TaxProfile& profile,
                                      double x, double level, const QuadratureConfig& quad) {
  check_start(profile, x, "survival_exponent_by_level");
  if (!(level >= x) || !std::isfinite(level)) {
    throw DomainError("survival_exponent_by_level: need x <= level < inf");
  }
  const auto integrand = [&](double y) {
    const double s = gamma_bar_inverse(profile, x, y);
    return scale.log_derivative(y) / (1.0 - gamma_at(profile, s));
  };
  const QuadResult r = integrate(integrand, x, level, quad);
  return {r.value, r.error};
}

}  // namespace closed_form

}  // namespace taxlevy
