#ifndef TAXLEVY_IDENTITIES_HPP
#define TAXLEVY_IDENTITIES_HPP

#include "taxlevy/quadrature.hpp"
#include "taxlevy/scale.hpp"
#include "taxlevy/tax_profile.hpp"

namespace taxlevy {

/// A quadrature-backed value with its achieved absolute error estimate.
struct Evaluation {
  double value = 0.0;
  double error = 0.0;
};

/// int_x^a W^(q)'(gamma_bar(s)) / W^(q)(gamma_bar(s)) ds.
///
/// `divergent` is set when the integral is infinite (or exceeds the
/// configured cap); `value` is then +infinity and the survival factor is 0.
struct SurvivalExponent {
  double value = 0.0;
  double error = 0.0;
  bool divergent = false;

  double survival_factor() const;
};

/// Outcome of the type-II creeping integral test at a*(x).
struct CreepTest {
  bool creeps = false;
  SurvivalExponent exponent;
};

/// Evaluation point of the joint law of (A, U_-, -U) at ruin.
struct TripleLawPoint {
  double theta = 0.0;  ///< A at ruin, in (0, x)
  double y = 0.0;      ///< undershoot U_{T-}, in [0, theta]
  double z = 0.0;      ///< overshoot -U_T, > 0
  double alpha = 0.0;  ///< discount rate up to the last tax payment
  double beta = 0.0;   ///< discount rate after it
};

/// Absolutely continuous part (per d theta dy dz) and the y = theta atom
/// (per d theta dz) of the triple law.
struct TripleLawDensity {
  double ac_density = 0.0;
  double atom_density = 0.0;
};

/// n_{Phi(q)}(excursion height > x) = W'(x)/W(x) - Phi(q).
double excursion_tail_rate(const ScaleEvaluator& scale, double x);

SurvivalExponent survival_exponent(const ScaleEvaluator& scale, const TaxProfile& profile,
                                   double x, double a, const QuadratureConfig& quad = {});

/// E_x[exp(-q sigma_a); sigma_a < T_0^-].
Evaluation two_sided_up(const ScaleEvaluator& scale, const TaxProfile& profile, double x,
                        double a, const QuadratureConfig& quad = {});

/// f(z) = Z(z) W'(z)/W(z) - q W(z), the discounted rate of excursions that
/// exceed height z.
double ruin_integrand_f(const ScaleEvaluator& scale, double z);

/// E_x[exp(-q T_0^-); T_0^- < sigma_a] for x <= a <= a*(x).
Evaluation two_sided_down(const ScaleEvaluator& scale, const TaxProfile& profile, double x,
                          double a, const QuadratureConfig& quad = {});

/// E_x[exp(-q T_0^-); T_0^- < inf]; requires a*(x) = inf.
Evaluation ruin_laplace(const ScaleEvaluator& scale, const TaxProfile& profile, double x,
                        const QuadratureConfig& quad = {});

/// P_x[T_0^- < inf] = 1 - exp(-int_x^inf W'/W(gamma_bar)); q = 0 evaluator,
/// a*(x) = inf.
Evaluation ruin_probability(const ScaleEvaluator& scale_q0, const TaxProfile& profile,
                            double x, const QuadratureConfig& quad = {});

/// E_x[exp(-q T_0^-); T_0^- = sigma_{a*(x)}]; requires a*(x) < inf.
Evaluation creep2_laplace(const ScaleEvaluator& scale, const TaxProfile& profile, double x,
                          const QuadratureConfig& quad = {});

/// Type-II creeping occurs iff the q = 0 survival exponent up to a*(x) is finite.
CreepTest creep2_test(const ScaleEvaluator& scale_q0, const TaxProfile& profile, double x,
                      const QuadratureConfig& quad = {});

/// E_x[int_0^{T_0^-} exp(-q u) gamma(S_u) dS_u]; +infinity when tax is paid
/// forever with positive probability and q = 0.
Evaluation npv_tax(const ScaleEvaluator& scale, const TaxProfile& profile, double x,
                   const QuadratureConfig& quad = {});

/// Common factor of the ruin-time densities:
/// exp(-int_theta^x W'(v) / (W(v) (gamma(gamma_bar^{-1}(v)) - 1)) dv)
///   / (gamma(gamma_bar^{-1}(theta)) - 1), with W = W^(alpha).
double triple_law_prefactor(const ScaleEvaluator& scale_alpha, const TaxProfile& profile,
                            double x, double theta, const QuadratureConfig& quad = {});

/// Joint density of (A_{T0}, U_{T0-}, -U_{T0}) discounted by alpha before the
/// last tax payment and beta afterwards. Heavy-tax profiles only.
TripleLawDensity triple_law_density(const ScaleEvaluator& scale_alpha,
                                    const ScaleEvaluator& scale_beta,
                                    const TaxProfile& profile, double x,
                                    const TripleLawPoint& point,
                                    const QuadratureConfig& quad = {});

/// Density in theta of {A_{T0} in d theta, U_{T0} = 0} (type-I creeping).
double creep1_density(const ScaleEvaluator& scale_alpha, const ScaleEvaluator& scale_beta,
                      const TaxProfile& profile, double x, double theta,
                      const QuadratureConfig& quad = {});

/// Closed-form special cases used to cross-check the general quadrature.
namespace closed_form {

/// gamma = 0: W(x)/W(a).
double two_sided_up_untaxed(const ScaleEvaluator& scale, double x, double a);

/// gamma = 0: Z(x) - W(x) Z(a)/W(a).
double two_sided_down_untaxed(const ScaleEvaluator& scale, double x, double a);

/// Constant gamma > 1: (W(a(1 - gamma) + gamma x) / W(x))^(1/(gamma - 1)).
double two_sided_up_heavy(const ScaleEvaluator& scale, double gamma, double x, double a);

/// Constant gamma > 1: gamma/(gamma - 1) int_0^x (W(t)/W(x))^(1/(gamma - 1)) dt.
Evaluation npv_heavy(const ScaleEvaluator& scale, double gamma, double x,
                     const QuadratureConfig& quad = {});

/// Constant gamma in [0, 1) and psi'(0+) > 0: 1 - (psi'(0+) W(x))^(1/(1 - gamma)).
double ruin_probability_light(const ScaleEvaluator& scale_q0, double gamma, double x);

/// Survival exponent written in the level variable y = gamma_bar(s):
/// int_x^level W'(y) / (W(y) (1 - gamma(gamma_bar^{-1}(y)))) dy.
/// Requires gamma_bar strictly increasing (light tax).
Evaluation survival_exponent_by_level(const ScaleEvaluator& scale, const TaxProfile& profile,
                                      double x, double level,
                                      const QuadratureConfig& quad = {});

}  // namespace closed_form

}  // namespace taxlevy

#endif  // TAXLEVY_IDENTITIES_HPP
