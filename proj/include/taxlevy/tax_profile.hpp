#ifndef TAXLEVY_TAX_PROFILE_HPP
#define TAXLEVY_TAX_PROFILE_HPP

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace taxlevy {

/// gamma(s) = gamma for every level s. Any real value is admitted.
struct ConstantTax {
  double gamma = 0.0;

  bool operator==(const ConstantTax&) const = default;
};

/// Piecewise-linear rate through strictly increasing knots (s, gamma(s)),
/// held flat outside the knot range. Cumulative integrals at the knots are
/// precomputed so that gamma_bar is an exact piecewise quadratic.
class TableTax {
 public:
  explicit TableTax(std::vector<std::pair<double, double>> knots);

  const std::vector<std::pair<double, double>>& knots() const noexcept {
    return knots_;
  }

  double rate(double s) const;
  /// int_{s_0}^{s} gamma(y) dy, with s_0 the first knot (negative below it).
  double cumulative(double s) const;
  /// int_{ref - h}^{ref} gamma(y) dy computed in distance coordinates.
  double integral_below(double ref, double h) const;

  bool operator==(const TableTax& other) const { return knots_ == other.knots_; }

 private:
  std::vector<std::pair<double, double>> knots_;
  std::vector<double> cumulative_;
};

/// gamma(s) = 1 + (a - s)^(-1/2) / 2 below a, constant tail_gamma > 1 above.
/// Started from x* (the root of y = sqrt(a - y)), gamma_bar(s) = sqrt(a - s)
/// and the taxed surplus reaches zero at a with infinite slope.
struct SqrtExampleTax {
  double a = 1.0;
  double tail_gamma = 2.0;

  bool operator==(const SqrtExampleTax&) const = default;
};

using TaxProfile = std::variant<ConstantTax, TableTax, SqrtExampleTax>;

/// Throws DomainError for non-finite or inadmissible parameters.
void validate(const TaxProfile& profile);

/// gamma(s) for s >= 0; +infinity at the singular point of SqrtExampleTax.
double gamma_at(const TaxProfile& profile, double s);

/// gamma(ref - h) evaluated without forming ref - h (accurate for tiny h).
double gamma_below(const TaxProfile& profile, double ref, double h);

/// int_{s0}^{s1} gamma(y) dy in closed form.
double gamma_integral(const TaxProfile& profile, double s0, double s1);

/// gamma_bar(s) = s - int_x^s gamma(y) dy for s >= x.
double gamma_bar(const TaxProfile& profile, double x, double s);

/// gamma_bar(a_star - h) for 0 <= h, using gamma_bar(a_star) = 0. Keeps full
/// relative precision as h -> 0, where the direct formula cancels.
double gamma_bar_below_barrier(const TaxProfile& profile, double a_star, double h);

/// a*(x) = inf{s >= x : gamma_bar(s) < 0}; +infinity when gamma_bar stays
/// non-negative.
double a_star(const TaxProfile& profile, double x);

/// Root of y - sqrt(a - y) in (0, a); SqrtExampleTax only.
double x_star(const TaxProfile& profile);

/// Inverse of s -> gamma_bar(s) on [x, infinity) for a strictly monotone
/// stretch. Throws UnsupportedError when gamma crosses 1 on the stretch and
/// DomainError when v is outside the range.
double gamma_bar_inverse(const TaxProfile& profile, double x, double v);

/// lim_{s -> inf} d gamma_bar / ds = 1 - gamma(+inf).
double tail_slope(const TaxProfile& profile);

/// True when gamma is continuous with values in (1, inf) on [0, upper].
bool is_heavy_on(const TaxProfile& profile, double upper);

/// True when gamma takes values in [0, 1) everywhere.
bool is_light(const TaxProfile& profile);

/// Short tag used in configs: "constant", "table", "sqrt_example".
std::string profile_tag(const TaxProfile& profile);

std::string describe(const TaxProfile& profile);

}  // namespace taxlevy

#endif  // TAXLEVY_TAX_PROFILE_HPP
