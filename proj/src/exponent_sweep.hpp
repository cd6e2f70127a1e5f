#ifndef TAXLEVY_SRC_EXPONENT_SWEEP_HPP
#define TAXLEVY_SRC_EXPONENT_SWEEP_HPP

#include <functional>

#include "taxlevy/quadrature.hpp"
#include "taxlevy/scale.hpp"
#include "taxlevy/tax_profile.hpp"

namespace taxlevy::detail {

/// A level t in [x, upper) as seen by the integrands.
struct SweepPoint {
  double t = 0.0;
  double gbar = 0.0;  ///< gamma_bar(t), accurate even next to a*
  double jac = 1.0;   ///< dt/dp of the active parametrisation
  /// a* - t when the point lies in the substituted tail next to a finite a*
  /// (exact there, unlike a* - t); negative otherwise.
  double below_barrier = -1.0;
};

/// Weight w(t) of the outer integral int e^{-E(t)} w(t) dt.
using OuterWeight = std::function<double(const SweepPoint&)>;

struct SweepResult {
  double exponent = 0.0;
  double exponent_error = 0.0;
  bool divergent = false;
  double outer = 0.0;
  double outer_error = 0.0;
};

/// Computes E(x, upper) = int_x^upper W'/W(gamma_bar(s)) ds and, when `outer`
/// is set, int_x^upper exp(-E(x, t)) outer(t) dt in a single left-to-right
/// pass over Kronrod panels. E at every outer node is obtained from the
/// panel's own samples through the cumulative Kronrod weights, so no inner
/// quadrature is nested.
///
/// `upper` may equal a finite a*(x) (the tail is then followed through
/// s = a* - h0 exp(-u) until convergence or divergence) or be +infinity when
/// a*(x) = infinity.
SweepResult sweep(const ScaleEvaluator& scale, const TaxProfile& profile, double x,
                  double upper, const OuterWeight& outer, const QuadratureConfig& cfg);

/// True when int_x^inf W'/W(gamma_bar) is infinite; decided from Phi(q),
/// psi'(0+) and the growth of gamma_bar.
bool exponent_diverges_at_infinity(const ScaleEvaluator& scale, const TaxProfile& profile);

}  // namespace taxlevy::detail

#endif  // TAXLEVY_SRC_EXPONENT_SWEEP_HPP
