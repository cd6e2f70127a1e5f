#include "taxlevy/tax_profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "taxlevy/errors.hpp"

namespace taxlevy {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// A stretch [start, start + length) on which gamma is affine:
// gamma(start + t) = rate + slope * t.
struct AffinePiece {
  double start;
  double length;
  double rate;
  double slope;
};

// Affine pieces of a table profile covering [from, infinity).
std::vector<AffinePiece> pieces_from(const TableTax& table, double from) {
  const auto& k = table.knots();
  std::vector<AffinePiece> out;
  double s = from;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i].first <= s) {
      continue;
    }
    const double left_rate = table.rate(s);
    const double slope = i == 0 ? 0.0
                                : (k[i].second - k[i - 1].second) /
                                      (k[i].first - k[i - 1].first);
    out.push_back({s, k[i].first - s, left_rate, slope});
    s = k[i].first;
  }
  out.push_back({s, kInf, table.rate(s), 0.0});
  return out;
}

// Smallest tau in [0, limit] with b0 + b1 tau + b2 tau^2 = 0 at which the
// quadratic changes sign from non-negative to negative.
std::optional<double> first_downcrossing(double b0, double b1, double b2,
                                         double limit) {
  const auto crossing_at = [&](double tau) {
    const double slope = b1 + 2.0 * b2 * tau;
    return slope < 0.0 || (slope == 0.0 && b2 < 0.0);
  };
  if (b0 <= 0.0) {
    if (b0 < 0.0 || crossing_at(0.0)) {
      return 0.0;
    }
  }
  std::vector<double> roots;
  if (b2 == 0.0) {
    if (b1 != 0.0) {
      roots.push_back(-b0 / b1);
    }
  } else {
    const double disc = b1 * b1 - 4.0 * b2 * b0;
    if (disc >= 0.0) {
      const double qq = -0.5 * (b1 + std::copysign(std::sqrt(disc), b1));
      if (qq != 0.0) {
        roots.push_back(qq / b2);
        roots.push_back(b0 / qq);
      }
    }
  }
  std::sort(roots.begin(), roots.end());
  for (double tau : roots) {
    if (tau > 0.0 && tau <= limit && crossing_at(tau)) {
      return tau;
    }
  }
  return std::nullopt;
}

double sqrt_antiderivative(const SqrtExampleTax& p, double s) {
  if (s <= p.a) {
    return s - std::sqrt(p.a - s);
  }
  return p.a + p.tail_gamma * (s - p.a);
}

void require_x(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(what) + ": x must be finite and > 0");
  }
}

}  // namespace

TableTax::TableTax(std::vector<std::pair<double, double>> knots)
    : knots_(std::move(knots)) {
  if (knots_.empty()) {
    throw DomainError("table tax profile needs at least one knot");
  }
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i].first) || !std::isfinite(knots_[i].second)) {
      throw DomainError("table tax profile knots must be finite");
    }
    if (i > 0 && !(knots_[i].first > knots_[i - 1].first)) {
      throw DomainError("table tax profile knots must be strictly increasing in s");
    }
  }
  cumulative_.resize(knots_.size(), 0.0);
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    cumulative_[i] = cumulative_[i - 1] + 0.5 * (knots_[i].first - knots_[i - 1].first) *
                                              (knots_[i].second + knots_[i - 1].second);
  }
}

double TableTax::rate(double s) const {
  if (s <= knots_.front().first) {
    return knots_.front().second;
  }
  if (s >= knots_.back().first) {
    return knots_.back().second;
  }
  const auto it = std::upper_bound(
      knots_.begin(), knots_.end(), s,
      [](double v, const std::pair<double, double>& k) { return v < k.first; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (s - lo.first) / (hi.first - lo.first);
  return lo.second + w * (hi.second - lo.second);
}

double TableTax::cumulative(double s) const {
  if (s <= knots_.front().first) {
    return knots_.front().second * (s - knots_.front().first);
  }
  if (s >= knots_.back().first) {
    return cumulative_.back() + knots_.back().second * (s - knots_.back().first);
  }
  const auto it = std::upper_bound(
      knots_.begin(), knots_.end(), s,
      [](double v, const std::pair<double, double>& k) { return v < k.first; });
  const auto j = static_cast<std::size_t>(it - knots_.begin()) - 1;
  return cumulative_[j] + 0.5 * (s - knots_[j].first) * (knots_[j].second + rate(s));
}

double TableTax::integral_below(double ref, double h) const {
  double total = 0.0;
  double right = ref;
  double remaining = h;
  while (remaining > 0.0) {
    // Affine stretch ending at `right`, walking downwards.
    double left_bound = -kInf;
    double slope = 0.0;
    for (std::size_t i = knots_.size(); i-- > 0;) {
      if (knots_[i].first < right) {
        left_bound = knots_[i].first;
        if (i + 1 < knots_.size()) {
          slope = (knots_[i + 1].second - knots_[i].second) /
                  (knots_[i + 1].first - knots_[i].first);
        }
        break;
      }
    }
    const double take = std::min(remaining, right - left_bound);
    const double top = rate(right);
    total += top * take - 0.5 * slope * take * take;
    remaining -= take;
    right = left_bound;
  }
  return total;
}

void validate(const TaxProfile& profile) {
  std::visit(overloaded{
                 [](const ConstantTax& c) {
                   if (!std::isfinite(c.gamma)) {
                     throw DomainError("constant tax rate must be finite");
                   }
                 },
                 [](const TableTax&) {},
                 [](const SqrtExampleTax& p) {
                   if (!(p.a > 0.0) || !std::isfinite(p.a)) {
                     throw DomainError("sqrt_example: a must be finite and > 0");
                   }
                   if (!(p.tail_gamma > 1.0) || !std::isfinite(p.tail_gamma)) {
                     throw DomainError("sqrt_example: tail_gamma must be finite and > 1");
                   }
                 },
             },
             profile);
}

double gamma_at(const TaxProfile& profile, double s) {
  if (!(s >= 0.0)) {
    throw DomainError("gamma_at: s must be >= 0");
  }
  return std::visit(overloaded{
                        [](const ConstantTax& c) { return c.gamma; },
                        [&](const TableTax& t) { return t.rate(s); },
                        [&](const SqrtExampleTax& p) {
                          if (s < p.a) {
                            return 1.0 + 0.5 / std::sqrt(p.a - s);
                          }
                          return s == p.a ? kInf : p.tail_gamma;
                        },
                    },
                    profile);
}

double gamma_below(const TaxProfile& profile, double ref, double h) {
  return std::visit(overloaded{
                        [](const ConstantTax& c) { return c.gamma; },
                        [&](const TableTax& t) { return t.rate(ref - h); },
                        [&](const SqrtExampleTax& p) {
                          // Distance of ref - h below the singular level a.
                          const double d = ref <= p.a ? (p.a - ref) + h : h - (ref - p.a);
                          if (d > 0.0) {
                            return 1.0 + 0.5 / std::sqrt(d);
                          }
                          return d == 0.0 ? kInf : p.tail_gamma;
                        },
                    },
                    profile);
}

double gamma_integral(const TaxProfile& profile, double s0, double s1) {
  return std::visit(overloaded{
                        [&](const ConstantTax& c) { return c.gamma * (s1 - s0); },
                        [&](const TableTax& t) { return t.cumulative(s1) - t.cumulative(s0); },
                        [&](const SqrtExampleTax& p) {
                          return sqrt_antiderivative(p, s1) - sqrt_antiderivative(p, s0);
                        },
                    },
                    profile);
}

double gamma_bar(const TaxProfile& profile, double x, double s) {
  if (!(s >= x)) {
    throw DomainError("gamma_bar: s must be >= x");
  }
  if (const auto* c = std::get_if<ConstantTax>(&profile)) {
    return s * (1.0 - c->gamma) + c->gamma * x;
  }
  if (const auto* p = std::get_if<SqrtExampleTax>(&profile); p && s <= p->a) {
    return (x - std::sqrt(p->a - x)) + std::sqrt(p->a - s);
  }
  return s - gamma_integral(profile, x, s);
}

double gamma_bar_below_barrier(const TaxProfile& profile, double a_star, double h) {
  if (!(h >= 0.0)) {
    throw DomainError("gamma_bar_below_barrier: h must be >= 0");
  }
  return std::visit(
      overloaded{
          [&](const ConstantTax& c) { return (c.gamma - 1.0) * h; },
          [&](const TableTax& t) { return t.integral_below(a_star, h) - h; },
          [&](const SqrtExampleTax& p) {
            const double d = p.a - a_star;
            if (d >= 0.0) {
              return h / (std::sqrt(d + h) + std::sqrt(d));
            }
            const double above = std::min(h, -d);
            return (p.tail_gamma - 1.0) * above + std::sqrt(h - above);
          },
      },
      profile);
}

double a_star(const TaxProfile& profile, double x) {
  require_x(x, "a_star");
  return std::visit(
      overloaded{
          [&](const ConstantTax& c) {
            return c.gamma > 1.0 ? c.gamma * x / (c.gamma - 1.0) : kInf;
          },
          [&](const TableTax& t) {
            double level = x;  // gamma_bar at the start of the piece
            for (const auto& piece : pieces_from(t, x)) {
              const auto tau = first_downcrossing(level, 1.0 - piece.rate,
                                                  -0.5 * piece.slope, piece.length);
              if (tau) {
                return piece.start + *tau;
              }
              if (!std::isfinite(piece.length)) {
                break;
              }
              level += (1.0 - piece.rate) * piece.length -
                       0.5 * piece.slope * piece.length * piece.length;
            }
            return kInf;
          },
          [&](const SqrtExampleTax& p) {
            if (x >= p.a) {
              return p.tail_gamma * x / (p.tail_gamma - 1.0);
            }
            const double root_gap = std::sqrt(p.a - x);
            const double f = x - root_gap;
            if (std::abs(f) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                   std::max(1.0, p.a)) {
              return p.a;
            }
            if (f < 0.0) {
              const double g = root_gap - x;
              return p.a - g * g;
            }
            return p.a + f / (p.tail_gamma - 1.0);
          },
      },
      profile);
}

double x_star(const TaxProfile& profile) {
  const auto* p = std::get_if<SqrtExampleTax>(&profile);
  if (p == nullptr) {
    throw UnsupportedError("x_star is defined for the sqrt_example profile only");
  }
  // y = sqrt(a - y)  <=>  y^2 + y - a = 0 on (0, a).
  double y = 2.0 * p->a / (1.0 + std::sqrt(1.0 + 4.0 * p->a));
  for (int i = 0; i < 3; ++i) {
    const double r = std::sqrt(p->a - y);
    const double f = y - r;
    const double df = 1.0 + 0.5 / r;
    y -= f / df;
  }
  return y;
}

double gamma_bar_inverse(const TaxProfile& profile, double x, double v) {
  require_x(x, "gamma_bar_inverse");
  if (!std::isfinite(v)) {
    throw DomainError("gamma_bar_inverse: v must be finite");
  }
  return std::visit(
      overloaded{
          [&](const ConstantTax& c) {
            if (c.gamma == 1.0) {
              throw UnsupportedError("gamma_bar is constant for gamma = 1");
            }
            if ((c.gamma < 1.0 && v < x) || (c.gamma > 1.0 && v > x)) {
              throw DomainError("gamma_bar_inverse: v outside the range of gamma_bar");
            }
            return x + (v - x) / (1.0 - c.gamma);
          },
          [&](const TableTax& t) {
            const double rate_x = t.rate(x);
            if (rate_x == 1.0) {
              throw UnsupportedError("gamma_bar is not strictly monotone at x");
            }
            const bool increasing = rate_x < 1.0;
            if ((increasing && v < x) || (!increasing && v > x)) {
              throw DomainError("gamma_bar_inverse: v outside the range of gamma_bar");
            }
            double level = x;
            for (const auto& piece : pieces_from(t, x)) {
              const double end_rate = std::isfinite(piece.length)
                                          ? piece.rate + piece.slope * piece.length
                                          : piece.rate;
              const bool ok = increasing ? (piece.rate < 1.0 && end_rate < 1.0)
                                         : (piece.rate > 1.0 && end_rate > 1.0);
              if (!ok) {
                throw UnsupportedError("gamma_bar is not strictly monotone on the stretch");
              }
              const double b1 = 1.0 - piece.rate;
              const double b2 = -0.5 * piece.slope;
              const double end_level =
                  std::isfinite(piece.length)
                      ? level + b1 * piece.length + b2 * piece.length * piece.length
                      : (increasing ? kInf : -kInf);
              if (increasing ? v <= end_level : v >= end_level) {
                // Unique root of level - v + b1 tau + b2 tau^2 on the piece.
                const double b0 = level - v;
                double tau;
                if (b2 == 0.0) {
                  tau = -b0 / b1;
                } else {
                  const double disc = std::max(0.0, b1 * b1 - 4.0 * b2 * b0);
                  const double qq = -0.5 * (b1 + std::copysign(std::sqrt(disc), b1));
                  tau = qq != 0.0 ? b0 / qq : 0.0;
                  if (tau < 0.0 || (std::isfinite(piece.length) && tau > piece.length)) {
                    tau = qq / b2;
                  }
                }
                return piece.start + std::clamp(tau, 0.0, piece.length);
              }
              level = end_level;
            }
            throw DomainError("gamma_bar_inverse: v outside the range of gamma_bar");
          },
          [&](const SqrtExampleTax& p) {
            if (v > x) {
              throw DomainError("gamma_bar_inverse: v outside the range of gamma_bar");
            }
            if (x >= p.a) {
              return x + (x - v) / (p.tail_gamma - 1.0);
            }
            const double root_gap = std::sqrt(p.a - x);
            const double c = v - x + root_gap;
            if (c >= 0.0) {
              return p.a - c * c;
            }
            return p.a + ((x - root_gap) - v) / (p.tail_gamma - 1.0);
          },
      },
      profile);
}

double tail_slope(const TaxProfile& profile) {
  return std::visit(overloaded{
                        [](const ConstantTax& c) { return 1.0 - c.gamma; },
                        [](const TableTax& t) { return 1.0 - t.knots().back().second; },
                        [](const SqrtExampleTax& p) { return 1.0 - p.tail_gamma; },
                    },
                    profile);
}

bool is_heavy_on(const TaxProfile& profile, double upper) {
  return std::visit(overloaded{
                        [](const ConstantTax& c) { return c.gamma > 1.0; },
                        [&](const TableTax& t) {
                          if (!(t.rate(0.0) > 1.0) || !(t.rate(upper) > 1.0)) {
                            return false;
                          }
                          for (const auto& [s, g] : t.knots()) {
                            if (s > 0.0 && s < upper && !(g > 1.0)) {
                              return false;
                            }
                          }
                          return true;
                        },
                        [&](const SqrtExampleTax& p) { return upper < p.a; },
                    },
                    profile);
}

bool is_light(const TaxProfile& profile) {
  return std::visit(overloaded{
                        [](const ConstantTax& c) { return c.gamma >= 0.0 && c.gamma < 1.0; },
                        [](const TableTax& t) {
                          return std::all_of(t.knots().begin(), t.knots().end(),
                                             [](const auto& k) {
                                               return k.second >= 0.0 && k.second < 1.0;
                                             });
                        },
                        [](const SqrtExampleTax&) { return false; },
                    },
                    profile);
}

std::string profile_tag(const TaxProfile& profile) {
  return std::visit(overloaded{
                        [](const ConstantTax&) { return std::string("constant"); },
                        [](const TableTax&) { return std::string("table"); },
                        [](const SqrtExampleTax&) { return std::string("sqrt_example"); },
                    },
                    profile);
}

std::string describe(const TaxProfile& profile) {
  std::ostringstream os;
  os.precision(6);
  std::visit(overloaded{
                 [&](const ConstantTax& c) { os << "constant(gamma=" << c.gamma << ")"; },
                 [&](const TableTax& t) { os << "table(" << t.knots().size() << " knots)"; },
                 [&](const SqrtExampleTax& p) {
                   os << "sqrt_example(a=" << p.a << " tail=" << p.tail_gamma << ")";
                 },
             },
             profile);
  return os.str();
}

}  // namespace taxlevy
