#include "taxlevy/scale.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "taxlevy/errors.hpp"

namespace taxlevy {
namespace {

using cplx = std::complex<double>;

// Polynomials are stored with ascending coefficients.
double poly_eval(const std::vector<double>& p, double x) {
  double v = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) {
    v = v * x + *it;
  }
  return v;
}

double poly_deriv_eval(const std::vector<double>& p, double x) {
  double v = 0.0;
  for (std::size_t i = p.size() - 1; i >= 1; --i) {
    v = v * x + static_cast<double>(i) * p[i];
  }
  return v;
}

double polish(const std::vector<double>& p, double root) {
  for (int i = 0; i < 4; ++i) {
    const double d = poly_deriv_eval(p, root);
    if (d == 0.0) {
      break;
    }
    const double step = poly_eval(p, root) / d;
    if (!std::isfinite(step)) {
      break;
    }
    root -= step;
  }
  return root;
}

void quadratic_roots(double a2, double a1, double a0, std::vector<double>& out) {
  double disc = a1 * a1 - 4.0 * a2 * a0;
  if (disc < 0.0) {
    if (disc >= -1e-12 * (a1 * a1 + std::abs(4.0 * a2 * a0))) {
      disc = 0.0;
    } else {
      throw InternalError(
          "scale: complex pole pair of 1/(psi - q); not reachable for the "
          "model catalog");
    }
  }
  if (disc == 0.0) {
    out.push_back(-a1 / (2.0 * a2));
    out.push_back(-a1 / (2.0 * a2));
    return;
  }
  const double s = std::sqrt(disc);
  const double qq = -0.5 * (a1 + std::copysign(s, a1));
  out.push_back(qq / a2);
  out.push_back(qq != 0.0 ? a0 / qq : -qq / a2);
}

// Real roots of a polynomial of degree <= 3, with multiplicity.
std::vector<double> real_roots(std::vector<double> p) {
  std::vector<double> roots;
  while (p.size() > 1 && p.front() == 0.0) {
    roots.push_back(0.0);
    p.erase(p.begin());
  }
  const std::size_t n_exact_zero = roots.size();
  const std::vector<double> original = p;
  if (p.size() == 4) {
    // Odd degree: bisection on a Cauchy-bound bracket always finds a root.
    double bound = 0.0;
    for (int i = 0; i < 3; ++i) {
      bound = std::max(bound, std::abs(p[i] / p[3]));
    }
    bound += 1.0;
    double lo = -bound;
    double hi = bound;
    const double sign_hi = poly_eval(p, hi) > 0.0 ? 1.0 : -1.0;
    for (int i = 0; i < 300 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
      const double m = 0.5 * (lo + hi);
      (poly_eval(p, m) * sign_hi > 0.0 ? hi : lo) = m;
    }
    const double r = polish(p, 0.5 * (lo + hi));
    roots.push_back(r);
    // Synthetic division by (theta - r).
    const double b2 = p[3];
    const double b1 = p[2] + r * b2;
    const double b0 = p[1] + r * b1;
    p = {b0, b1, b2};
  }
  if (p.size() == 3) {
    quadratic_roots(p[2], p[1], p[0], roots);
  } else if (p.size() == 2) {
    roots.push_back(-p[0] / p[1]);
  }
  // Exact zeros stripped above are left alone; near-double roots have a
  // vanishing derivative and are not polished either.
  for (std::size_t i = n_exact_zero; i < roots.size() && original.size() >= 3; ++i) {
    const double d = poly_deriv_eval(original, roots[i]);
    if (std::abs(d) > 1e-8 * std::max(1.0, std::abs(original.back()))) {
      roots[i] = polish(original, roots[i]);
    }
  }
  return roots;
}

struct Pole {
  double value;
  int multiplicity;
};

std::vector<Pole> cluster_poles(std::vector<double> roots) {
  std::sort(roots.begin(), roots.end(), std::greater<>());
  std::vector<Pole> poles;
  for (std::size_t i = 0; i < roots.size();) {
    std::size_t j = i + 1;
    while (j < roots.size() &&
           std::abs(roots[j] - roots[i]) <=
               1e-6 * std::max({1.0, std::abs(roots[i]), std::abs(roots[j])})) {
      ++j;
    }
    const int mult = static_cast<int>(j - i);
    if (mult > 2) {
      throw UnsupportedError(
          "scale: pole of multiplicity > 2 in 1/(psi - q); perturb q by 1e-9");
    }
    double mean = 0.0;
    for (std::size_t k = i; k < j; ++k) {
      mean += roots[k];
    }
    poles.push_back({mean / static_cast<double>(mult), mult});
    i = j;
  }
  return poles;
}

// 1/(psi(theta) - q) = numerator(theta) / denominator(theta).
struct RationalForm {
  std::vector<double> numerator;
  std::vector<double> denominator;
};

RationalForm rational_form(const LevyModel& model, double q) {
  if (const auto* bm = std::get_if<BrownianDrift>(&model)) {
    const double half_var = 0.5 * bm->sigma * bm->sigma;
    return {{1.0}, {-q, bm->mu, half_var}};
  }
  if (const auto* cl = std::get_if<CramerLundberg>(&model)) {
    const double r = cl->claim_rate;
    return {{r, 1.0}, {-q * r, cl->c * r - cl->lambda - q, cl->c}};
  }
  const auto& mx = std::get<MixedModel>(model);
  const double r = mx.claim_rate;
  const double half_var = 0.5 * mx.sigma * mx.sigma;
  return {{r, 1.0},
          {-q * r, mx.c * r - mx.lambda - q, half_var * r + mx.c, half_var}};
}

std::vector<ExpTerm> partial_fractions(const RationalForm& form) {
  const auto poles = cluster_poles(real_roots(form.denominator));
  const double lead = form.denominator.back();
  std::vector<ExpTerm> terms;
  for (std::size_t i = 0; i < poles.size(); ++i) {
    const double m = poles[i].value;
    double rest = lead;
    double log_deriv_rest = 0.0;
    for (std::size_t k = 0; k < poles.size(); ++k) {
      if (k == i) {
        continue;
      }
      const double gap = m - poles[k].value;
      rest *= std::pow(gap, poles[k].multiplicity);
      log_deriv_rest += poles[k].multiplicity / gap;
    }
    const double p = poly_eval(form.numerator, m);
    if (poles[i].multiplicity == 1) {
      terms.push_back({m, p / rest, 0.0});
    } else {
      const double dp = poly_deriv_eval(form.numerator, m);
      terms.push_back({m, (dp - p * log_deriv_rest) / rest, p / rest});
    }
  }
  return terms;
}

// Fixed Talbot contour (Abate-Whitt) applied to F(s + shift).
double talbot(const std::function<cplx(cplx)>& transform, double t, int n,
              double shift) {
  const double r = 2.0 * n / (5.0 * t);
  double sum = 0.5 * (transform(cplx(r + shift, 0.0)) * std::exp(r * t)).real();
  for (int k = 1; k < n; ++k) {
    const double th = k * std::numbers::pi / n;
    const double cot = std::cos(th) / std::sin(th);
    const cplx s(r * th * cot, r * th);
    const double sig = th + (th * cot - 1.0) * cot;
    sum += (std::exp(t * s) * transform(s + shift) * cplx(1.0, sig)).real();
  }
  return std::exp(shift * t) * r / n * sum;
}

double checked_talbot(const std::function<cplx(cplx)>& transform, double t,
                      int n, double shift, const char* what) {
  if (n < 8) {
    throw DomainError("Laplace inversion needs at least 8 contour terms");
  }
  const double fine = talbot(transform, t, n, shift);
  const double coarse = talbot(transform, t, n - n / 4, shift);
  const double err = std::abs(fine - coarse);
  if (!std::isfinite(fine) || err > 1e-7 * std::max(std::abs(fine), 1e-300)) {
    throw AccuracyError(std::string(what) + ": Talbot inversion did not converge",
                        fine, err);
  }
  return fine;
}

double inversion_shift(double phi_q, double x) { return phi_q + 1.0 / x; }

}  // namespace

ScaleEvaluator::ScaleEvaluator(LevyModel model, double q)
    : model_(std::move(model)), q_(q), phi_(0.0), w0_(0.0) {
  validate(model_);
  if (!(q >= 0.0) || !std::isfinite(q)) {
    throw DomainError("scale: q must be finite and >= 0");
  }
  phi_ = taxlevy::phi(model_, q_);
  const auto var = variation(model_);
  w0_ = var.bounded() ? 1.0 / var.drift : 0.0;
}

ScaleEvaluator make_scale(const LevyModel& model, double q) {
  ScaleEvaluator ev(model, q);
  ev.terms_ = partial_fractions(rational_form(model, q));
  ev.max_rate_ = -std::numeric_limits<double>::infinity();
  for (const auto& t : ev.terms_) {
    ev.max_abs_rate_ = std::max(ev.max_abs_rate_, std::abs(t.rate));
    ev.max_rate_ = std::max(ev.max_rate_, t.rate);
  }
  if (std::abs(ev.max_rate_ - ev.phi_) > 1e-6 * std::max(1.0, ev.phi_)) {
    throw InternalError("scale: largest pole disagrees with Phi(q)");
  }
  return ev;
}

ScaleEvaluator make_numeric_scale(const LevyModel& model, double q, int n_terms) {
  ScaleEvaluator ev(model, q);
  ev.representation_ = ScaleEvaluator::Representation::numeric_inversion;
  ev.n_terms_ = n_terms;
  return ev;
}

double invert_laplace_reference(const LevyModel& model, double q, double x,
                                int n_terms) {
  validate(model);
  if (!(x > 0.0)) {
    throw DomainError("invert_laplace_reference: x must be > 0");
  }
  const double phi_q = phi(model, q);
  const auto transform = [&](cplx s) {
    return 1.0 / (laplace_exponent(model, s) - q);
  };
  return checked_talbot(transform, x, n_terms, inversion_shift(phi_q, x),
                        "W^(q)");
}

double ScaleEvaluator::w(double x) const {
  if (x < 0.0) {
    return 0.0;
  }
  if (x == 0.0) {
    return w0_;
  }
  if (representation_ == Representation::numeric_inversion) {
    return invert_laplace_reference(model_, q_, x, n_terms_);
  }
  double v = 0.0;
  if (x * max_abs_rate_ <= 1.0) {
    // W(0+) is known exactly; expm1 keeps small arguments accurate when the
    // terms cancel (unbounded variation).
    v = w0_;
    for (const auto& t : terms_) {
      v += t.c0 * std::expm1(t.rate * x) + t.c1 * x * std::exp(t.rate * x);
    }
  } else {
    for (const auto& t : terms_) {
      v += (t.c0 + t.c1 * x) * std::exp(t.rate * x);
    }
  }
  return v;
}

double ScaleEvaluator::w_prime(double x) const {
  if (x < 0.0) {
    throw DomainError("w_prime: x must be >= 0");
  }
  if (representation_ == Representation::numeric_inversion) {
    if (x == 0.0) {
      throw UnsupportedError("w_prime(0+) needs the closed-form representation");
    }
    const double w0 = w0_;
    const auto transform = [&](cplx s) {
      return s / (laplace_exponent(model_, s) - q_) - w0;
    };
    return checked_talbot(transform, x, n_terms_, inversion_shift(phi_, x),
                          "W^(q)'");
  }
  double v = 0.0;
  for (const auto& t : terms_) {
    v += std::exp(t.rate * x) * (t.rate * t.c0 + t.c1 + t.rate * t.c1 * x);
  }
  return v;
}

double ScaleEvaluator::w_second(double x) const {
  if (representation_ == Representation::numeric_inversion) {
    throw UnsupportedError(
        "w_second is only available for the closed-form representation");
  }
  if (x < 0.0) {
    throw DomainError("w_second: x must be >= 0");
  }
  double v = 0.0;
  for (const auto& t : terms_) {
    const double r = t.rate;
    v += std::exp(r * x) * (r * r * t.c0 + 2.0 * r * t.c1 + r * r * t.c1 * x);
  }
  return v;
}

double ScaleEvaluator::z(double x) const {
  if (x <= 0.0 || q_ == 0.0) {
    return 1.0;
  }
  if (representation_ == Representation::numeric_inversion) {
    const auto transform = [&](cplx s) {
      return 1.0 / ((laplace_exponent(model_, s) - q_) * s);
    };
    return 1.0 + q_ * checked_talbot(transform, x, n_terms_,
                                     inversion_shift(phi_, x), "Z^(q)");
  }
  double integral = 0.0;
  for (const auto& t : terms_) {
    const double r = t.rate;
    if (r == 0.0) {
      integral += t.c0 * x + 0.5 * t.c1 * x * x;
    } else {
      const double em1 = std::expm1(r * x);
      integral += t.c0 * em1 / r + t.c1 * (x * std::exp(r * x) / r - em1 / (r * r));
    }
  }
  return 1.0 + q_ * integral;
}

double ScaleEvaluator::log_derivative(double x) const {
  if (!(x > 0.0)) {
    throw DomainError("log_derivative: x must be > 0");
  }
  if (representation_ == Representation::numeric_inversion ||
      x * max_abs_rate_ <= 1.0) {
    return w_prime(x) / w(x);
  }
  double num = 0.0;
  double den = 0.0;
  for (const auto& t : terms_) {
    const double e = std::exp((t.rate - max_rate_) * x);
    num += e * (t.rate * t.c0 + t.c1 + t.rate * t.c1 * x);
    den += e * (t.c0 + t.c1 * x);
  }
  return num / den;
}

}  // namespace taxlevy
