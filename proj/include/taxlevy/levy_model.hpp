#ifndef TAXLEVY_LEVY_MODEL_HPP
#define TAXLEVY_LEVY_MODEL_HPP

#include <complex>
#include <string>
#include <variant>

namespace taxlevy {

/// X_t = mu t + sigma B_t.
struct BrownianDrift {
  double mu = 0.0;
  double sigma = 1.0;

  bool operator==(const BrownianDrift&) const = default;
};

/// X_t = c t - (compound Poisson sum of Exp(claim_rate) claims at rate lambda).
struct CramerLundberg {
  double c = 1.0;
  double lambda = 1.0;
  double claim_rate = 1.0;

  bool operator==(const CramerLundberg&) const = default;
};

/// Cramer-Lundberg plus an independent Gaussian component sigma B_t.
struct MixedModel {
  double c = 1.0;
  double lambda = 1.0;
  double claim_rate = 1.0;
  double sigma = 1.0;

  bool operator==(const MixedModel&) const = default;
};

/// Closed catalog of spectrally negative Levy models with rational Laplace
/// exponent.
using LevyModel = std::variant<BrownianDrift, CramerLundberg, MixedModel>;

/// Path-variation class. Bounded variation carries the linear drift d of
/// X_t = d t - (driftless subordinator).
struct VariationType {
  enum class Kind { bounded, unbounded };

  Kind kind = Kind::unbounded;
  double drift = 0.0;

  bool bounded() const noexcept { return kind == Kind::bounded; }
  bool operator==(const VariationType&) const = default;
};

/// Throws DomainError when a parameter is outside its admissible range
/// (sigma <= 0, c <= 0, lambda <= 0, claim_rate <= 0, non-finite values).
void validate(const LevyModel& model);

/// psi(theta) = log E[exp(theta X_1)] for theta >= 0.
double laplace_exponent(const LevyModel& model, double theta);

/// Analytic continuation of psi; used by the numerical Laplace inversion.
std::complex<double> laplace_exponent(const LevyModel& model,
                                      std::complex<double> theta);

/// psi'(theta) for theta >= 0.
double laplace_exponent_derivative(const LevyModel& model, double theta);

double psi_prime_at_zero(const LevyModel& model);

/// Phi(q): largest root of psi(theta) = q.
double phi(const LevyModel& model, double q);

/// Density of the Levy measure of -X (claim-size intensity) at z > 0.
double levy_density(const LevyModel& model, double z);

/// nu((z, infinity)) for z > 0.
double levy_measure_tail(const LevyModel& model, double z);

/// Total jump intensity nu((0, infinity)); zero without jumps.
double jump_intensity(const LevyModel& model);

/// Rate of the exponential claim-size law; zero without jumps.
double claim_rate(const LevyModel& model);

/// Gaussian coefficient sigma (zero for the compound Poisson model).
double gaussian_coefficient(const LevyModel& model);

/// Linear drift of the paths, i.e. mu for Brownian motion and c otherwise.
double linear_drift(const LevyModel& model);

VariationType variation(const LevyModel& model);

/// Short tag used in configs and CSV labels: "brownian", "cl", "mixed".
std::string model_tag(const LevyModel& model);

/// Human-readable one-liner such as "cl(c=1,lambda=0.5,rate=1)".
std::string describe(const LevyModel& model);

}  // namespace taxlevy

#endif  // TAXLEVY_LEVY_MODEL_HPP
