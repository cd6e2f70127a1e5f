#ifndef TAXLEVY_SIMULATE_HPP
#define TAXLEVY_SIMULATE_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "taxlevy/levy_model.hpp"
#include "taxlevy/tax_profile.hpp"

namespace taxlevy {

struct McConfig {
  std::int64_t n_paths = 10000;
  std::uint64_t seed = 20240601;
  /// Euler step for models with a Gaussian part; unused for Cramer-Lundberg.
  double time_step = 1e-3;
  /// Censoring time; defaults to 10 x / max(|psi'(0+)|, 0.1).
  std::optional<double> horizon;
  /// The Euler scheme declares ruin once U < barrier_epsilon * sqrt(time_step).
  /// Defaults to
  /// 0.5826 sigma, the mean overshoot of a discretely sampled Brownian path.
  std::optional<double> barrier_epsilon;
  /// Worker threads (0 = hardware concurrency). Results do not depend on it.
  int threads = 1;

  /// Throws ConfigError for non-positive counts, steps or horizons.
  void validate() const;

  bool operator==(const McConfig&) const = default;
};

struct Estimate {
  double value = 0.0;
  /// Sample standard deviation / sqrt(n_paths).
  double std_error = 0.0;
  /// Paths that ended in a terminal event before the horizon.
  std::int64_t n_effective = 0;
  double censored_fraction = 0.0;
  /// Non-empty when the Euler step looks coarse for the model and x.
  std::string warning;
};

enum class RuinKind { none, jump, creep_diffusive, creep_supremum };

/// What the path is run for: discount rate for the tax integral and an
/// optional level a at which the path stops once S reaches it.
struct PathRequest {
  double q = 0.0;
  double stop_level = std::numeric_limits<double>::infinity();
};

struct PathOutcome {
  bool ruined = false;
  bool reached_level = false;
  /// Neither ruin nor the stop level happened before the horizon.
  bool censored = false;
  RuinKind kind = RuinKind::none;
  double ruin_time = std::numeric_limits<double>::infinity();
  double level_time = std::numeric_limits<double>::infinity();
  /// S and A = gamma_bar(S) at ruin.
  double sup_at_ruin = 0.0;
  double taxed_sup_at_ruin = 0.0;
  /// U_{T-} and U_T.
  double u_before = 0.0;
  double u_at = 0.0;
  /// int_0^{end} e^{-q u} gamma(S_u) dS_u up to ruin, the stop level or the
  /// horizon.
  double tax_npv = 0.0;
  std::int64_t steps = 0;
};

/// State after each step (Euler) or event (Cramer-Lundberg). U is the
/// incrementally accumulated value, not recomputed from S and X.
struct TracePoint {
  double t = 0.0;
  double x = 0.0;
  double s = 0.0;
  double u = 0.0;
};

/// Independent random stream of one path: a 64-bit Mersenne twister seeded
/// from splitmix64(seed, path index).
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t path_index);

  double normal();
  /// Uniform on (0, 1].
  double uniform();
  /// Exponential variate with the given rate.
  double exponential(double rate);

 private:
  std::mt19937_64 engine_;
};

/// Simulates U = X - int_x^S gamma(y) dy from X_0 = S_0 = x. Cramer-Lundberg
/// paths are simulated event by event without discretisation. Models with a
/// Gaussian part use an Euler scheme with exact claim times; the supremum
/// inside each step is the exact Brownian-bridge maximum, and ruin is
/// declared once U falls below barrier_epsilon * sqrt(time_step). Ruin with
/// gamma_bar(S) itself inside that band counts as creeping at the supremum.
PathOutcome simulate_path(const LevyModel& model, const TaxProfile& profile, double x,
                          const PathRequest& request, const McConfig& config, PathRng& rng,
                          std::vector<TracePoint>* trace = nullptr);

/// Runs n_paths paths with streams 0..n_paths-1.
std::vector<PathOutcome> simulate_paths(const LevyModel& model, const TaxProfile& profile,
                                        double x, const PathRequest& request,
                                        const McConfig& config);

double default_horizon(const LevyModel& model, double x);

/// E_x[e^{-q sigma_a}; sigma_a < T_0^-].
Estimate estimate_exit_up(const LevyModel& model, const TaxProfile& profile, double q,
                          double x, double a, const McConfig& config);
/// E_x[e^{-q T_0^-}; T_0^- < sigma_a].
Estimate estimate_exit_down(const LevyModel& model, const TaxProfile& profile, double q,
                            double x, double a, const McConfig& config);
/// E_x[e^{-q T_0^-}; T_0^- < horizon]; the probability of ruin when q = 0.
Estimate estimate_ruin(const LevyModel& model, const TaxProfile& profile, double q,
                       double x, const McConfig& config);
/// E_x[int_0^{T_0^-} e^{-q u} gamma(S_u) dS_u], truncated at the horizon.
Estimate estimate_npv(const LevyModel& model, const TaxProfile& profile, double q,
                      double x, const McConfig& config);
/// E_x[e^{-q T_0^-}; ruin at the supremum] (type-II creeping).
Estimate estimate_creep2(const LevyModel& model, const TaxProfile& profile, double q,
                         double x, const McConfig& config);
/// E_x[e^{-q T_0^-}; continuous ruin below the supremum] (type-I creeping).
Estimate estimate_creep1(const LevyModel& model, const TaxProfile& profile, double q,
                         double x, const McConfig& config);

/// Non-empty when the Euler step is coarse relative to x for the model.
std::string step_warning(const LevyModel& model, double x, const McConfig& config);

/// Mean and standard error of per-path values, reduced in path order.
Estimate summarize(const std::vector<double>& values, std::int64_t censored);

}  // namespace taxlevy

#endif  // TAXLEVY_SIMULATE_HPP
