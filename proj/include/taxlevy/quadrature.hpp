#ifndef TAXLEVY_QUADRATURE_HPP
#define TAXLEVY_QUADRATURE_HPP

#include <array>
#include <functional>

namespace taxlevy {

/// Numerical-tolerance settings shared by every quadrature-backed identity.
struct QuadratureConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  int max_subdivisions = 2000;
  /// Relative distance (in units of a* - x) from a finite a* below which the
  /// integration switches to the s = a* - exp(-u) substitution.
  double singular_edge_fraction = 1e-6;
  /// Length scale L of the t = x + L u / (1 - u) map for infinite ranges.
  double infinity_map_scale = 1.0;
  /// Survival exponents beyond this value are reported as divergent.
  double divergence_cap = 700.0;

  /// Throws ConfigError unless every tolerance and budget is positive.
  void validate() const;

  bool operator==(const QuadratureConfig&) const = default;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

/// 21-point Kronrod rule with its embedded 10-point Gauss rule on [-1, 1].
struct KronrodRule {
  static constexpr int size = 21;
  std::array<double, size> nodes{};
  std::array<double, size> kronrod_weights{};
  /// Gauss weights aligned with `nodes`; zero at the Kronrod-only nodes.
  std::array<double, size> gauss_weights{};
  /// cumulative[k][j]: weight of f(nodes[j]) in int_{-1}^{nodes[k]} f, exact
  /// for polynomials of degree <= 20.
  std::array<std::array<double, size>, size> cumulative{};
};

const KronrodRule& kronrod21();

/// Adaptive Gauss-Kronrod (21 points) on [a, b], bisecting the interval with
/// the largest error estimate. Throws AccuracyError when the subdivision
/// budget runs out before max(abs_tol, rel_tol |I|) is met.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadratureConfig& cfg = {});

/// int_a^inf f(t) dt through t = a + L u / (1 - u).
QuadResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                 const QuadratureConfig& cfg = {});

}  // namespace taxlevy

#endif  // TAXLEVY_QUADRATURE_HPP
