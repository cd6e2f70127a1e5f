#ifndef TAXLEVY_SCALE_HPP
#define TAXLEVY_SCALE_HPP

#include <span>
#include <vector>

#include "taxlevy/levy_model.hpp"

namespace taxlevy {

/// One exponential-polynomial piece (c0 + c1 x) exp(rate x) of a scale
/// function. c1 is non-zero only for a double pole of 1/(psi - q).
struct ExpTerm {
  double rate = 0.0;
  double c0 = 0.0;
  double c1 = 0.0;
};

/// Evaluates the q-scale function W^(q), its derivatives and Z^(q) for one
/// (model, q) pair. Immutable after construction.
///
/// The closed-form representation is an exact partial-fraction expansion of
/// 1/(psi(theta) - q); the numeric representation inverts the same transform
/// on a Talbot contour and exists as an independent cross-check.
class ScaleEvaluator {
 public:
  enum class Representation { rational_closed_form, numeric_inversion };

  const LevyModel& model() const noexcept { return model_; }
  double q() const noexcept { return q_; }
  double phi() const noexcept { return phi_; }
  Representation representation() const noexcept { return representation_; }

  /// Exponential sum of the closed form; empty for numeric inversion.
  std::span<const ExpTerm> terms() const noexcept { return terms_; }

  /// W^(q)(0+): 1/d for bounded variation, 0 otherwise.
  double w_at_zero() const noexcept { return w0_; }

  /// W^(q)(x); zero for x < 0 and right-continuous at 0.
  double w(double x) const;
  /// W^(q)'(x) for x >= 0 (x = 0 gives the right derivative at 0+).
  double w_prime(double x) const;
  /// W^(q)''(x) for x >= 0; closed form only.
  double w_second(double x) const;
  /// Z^(q)(x) = 1 + q int_0^x W^(q)(y) dy.
  double z(double x) const;
  /// W^(q)'(x) / W^(q)(x) for x > 0, evaluated without overflow for large x.
  double log_derivative(double x) const;

  friend ScaleEvaluator make_scale(const LevyModel& model, double q);
  friend ScaleEvaluator make_numeric_scale(const LevyModel& model, double q,
                                           int n_terms);

 private:
  ScaleEvaluator(LevyModel model, double q);

  LevyModel model_;
  double q_;
  double phi_;
  double w0_;
  Representation representation_ = Representation::rational_closed_form;
  std::vector<ExpTerm> terms_;
  double max_abs_rate_ = 0.0;
  double max_rate_ = 0.0;
  int n_terms_ = 32;
};

/// Closed-form evaluator from the poles of 1/(psi(theta) - q). Coincident
/// poles (e.g. q = 0 with psi'(0+) = 0) produce a (c0 + c1 x) exp(rate x)
/// term.
ScaleEvaluator make_scale(const LevyModel& model, double q);

/// Evaluator backed by numerical Laplace inversion with n_terms contour nodes.
ScaleEvaluator make_numeric_scale(const LevyModel& model, double q,
                                  int n_terms = 32);

/// W^(q)(x) by fixed-Talbot inversion of 1/(psi(theta) - q) along a contour
/// shifted right of Phi(q). Throws AccuracyError when two contour resolutions
/// disagree by more than 1e-7 relative.
double invert_laplace_reference(const LevyModel& model, double q, double x,
                                int n_terms = 32);

}  // namespace taxlevy

#endif  // TAXLEVY_SCALE_HPP
