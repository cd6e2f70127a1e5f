#include "exponent_sweep.hpp"

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "taxlevy/errors.hpp"

namespace taxlevy::detail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Smallest distance to a* that the tail substitution visits.
constexpr double kSmallestGap = 1e-300;

using ParamMap = std::function<SweepPoint(double)>;

struct PanelSums {
  double exponent_k = 0.0;
  double exponent_g = 0.0;
  double outer_k = 0.0;
  double outer_g = 0.0;
  bool finite = true;
};

class Sweeper {
 public:
  Sweeper(const ScaleEvaluator& scale, const OuterWeight& outer,
          const QuadratureConfig& cfg)
      : scale_(scale), outer_(outer), cfg_(cfg) {}

  // Adaptive pass over [p0, p1], always finishing the left half of a split
  // before the right half so that E at the panel start is final.
  void run(const ParamMap& map, double p0, double p1) {
    std::vector<std::pair<double, double>> stack{{p0, p1}};
    while (!stack.empty() && !saturated) {
      const auto [a, b] = stack.back();
      stack.pop_back();
      const PanelSums s = evaluate(map, a, b);
      const double mid = 0.5 * (a + b);
      const bool can_split =
          mid > a && mid < b &&
          (b - a) > 1e-13 * std::max({std::abs(a), std::abs(b), 1e-280});
      if (!s.finite) {
        if (!can_split) {
          throw AccuracyError("survival exponent: non-finite integrand", exponent,
                              kInf);
        }
        split(stack, a, mid, b);
        continue;
      }
      const double err_e = std::abs(s.exponent_k - s.exponent_g);
      const double err_o = std::abs(s.outer_k - s.outer_g);
      const bool accept =
          err_e <= std::max(cfg_.abs_tol, cfg_.rel_tol * std::abs(s.exponent_k)) &&
          (!outer_ || err_o <= std::max(cfg_.abs_tol, cfg_.rel_tol * std::abs(s.outer_k)));
      if (accept || !can_split) {
        exponent += s.exponent_k;
        exponent_error += err_e;
        outer += s.outer_k;
        outer_error += err_o;
        if (exponent > cfg_.divergence_cap) {
          saturated = true;
        }
      } else {
        split(stack, a, mid, b);
      }
    }
  }

  double exponent = 0.0;
  double exponent_error = 0.0;
  double outer = 0.0;
  double outer_error = 0.0;
  bool saturated = false;

 private:
  void split(std::vector<std::pair<double, double>>& stack, double a, double mid,
             double b) {
    if (++splits_ > cfg_.max_subdivisions) {
      throw AccuracyError("survival exponent: subdivision budget exhausted",
                          outer_ ? outer : exponent,
                          outer_ ? outer_error : exponent_error);
    }
    stack.emplace_back(mid, b);
    stack.emplace_back(a, mid);
  }

  PanelSums evaluate(const ParamMap& map, double a, double b) const {
    const auto& rule = kronrod21();
    constexpr int n = KronrodRule::size;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    std::array<double, n> rate{};
    std::array<double, n> weight{};
    PanelSums s;
    for (int j = 0; j < n; ++j) {
      const SweepPoint pt = map(mid + half * rule.nodes[j]);
      rate[j] = scale_.log_derivative(pt.gbar) * pt.jac;
      weight[j] = outer_ ? outer_(pt) * pt.jac : 0.0;
      if (!std::isfinite(rate[j]) || !std::isfinite(weight[j])) {
        s.finite = false;
        return s;
      }
      s.exponent_k += rule.kronrod_weights[j] * rate[j];
      s.exponent_g += rule.gauss_weights[j] * rate[j];
    }
    s.exponent_k *= half;
    s.exponent_g *= half;
    if (!outer_) {
      return s;
    }
    for (int j = 0; j < n; ++j) {
      double partial = 0.0;
      for (int m = 0; m < n; ++m) {
        partial += rule.cumulative[j][m] * rate[m];
      }
      const double v = weight[j] == 0.0 ? 0.0
                                        : std::exp(-(exponent + half * partial)) * weight[j];
      s.outer_k += rule.kronrod_weights[j] * v;
      s.outer_g += rule.gauss_weights[j] * v;
    }
    s.outer_k *= half;
    s.outer_g *= half;
    return s;
  }

  const ScaleEvaluator& scale_;
  const OuterWeight& outer_;
  const QuadratureConfig& cfg_;
  int splits_ = 0;
};

}  // namespace

bool exponent_diverges_at_infinity(const ScaleEvaluator& scale, const TaxProfile& profile) {
  // W'/W tends to Phi(q); for Phi(q) = 0 it decays like 1/y when psi'(0+) = 0
  // and exponentially otherwise, provided gamma_bar grows linearly.
  return scale.phi() > 0.0 || psi_prime_at_zero(scale.model()) <= 0.0 ||
         tail_slope(profile) <= 0.0;
}

SweepResult sweep(const ScaleEvaluator& scale, const TaxProfile& profile, double x,
                  double upper, const OuterWeight& outer, const QuadratureConfig& cfg) {
  cfg.validate();
  SweepResult result;
  if (upper == x) {
    return result;
  }
  const double astar = a_star(profile, x);
  Sweeper sweeper(scale, outer, cfg);

  const ParamMap linear = [&](double t) {
    SweepPoint p;
    p.t = t;
    p.gbar = gamma_bar(profile, x, t);
    return p;
  };

  bool divergent = false;
  if (std::isinf(upper)) {
    if (std::isfinite(astar)) {
      throw DomainError("infinite upper limit requires a*(x) = infinity");
    }
    const bool known = exponent_diverges_at_infinity(scale, profile);
    if (known && !outer) {
      result.divergent = true;
      result.exponent = kInf;
      return result;
    }
    const double scale_len = cfg.infinity_map_scale;
    const ParamMap to_infinity = [&](double u) {
      const double w = 1.0 - u;
      SweepPoint p;
      p.t = x + scale_len * u / w;
      p.gbar = gamma_bar(profile, x, p.t);
      p.jac = scale_len / (w * w);
      return p;
    };
    sweeper.run(to_infinity, 0.0, 1.0);
    divergent = known || sweeper.saturated;
  } else {
    const double edge = cfg.singular_edge_fraction * (astar - x);
    const bool near_barrier = std::isfinite(astar) && astar - upper <= edge;
    if (!near_barrier) {
      sweeper.run(linear, x, upper);
    } else {
      sweeper.run(linear, x, astar - edge);
      const ParamMap tail = [&](double u) {
        SweepPoint p;
        const double h = edge * std::exp(-u);
        p.t = astar - h;
        p.gbar = gamma_bar_below_barrier(profile, astar, h);
        p.jac = h;
        p.below_barrier = h;
        return p;
      };
      const double gap = astar - upper;
      const double u_end = gap > 0.0 ? std::log(edge / gap) : kInf;
      const double u_max = std::log(edge / kSmallestGap);
      double u = 0.0;
      double prev_de = -1.0;
      double prev_do = -1.0;
      while (!sweeper.saturated) {
        const double u1 = std::min({u + 1.0, u_end, u_max});
        const double e0 = sweeper.exponent;
        const double o0 = sweeper.outer;
        sweeper.run(tail, u, u1);
        // Increments per unit u, so that a shorter last chunk is comparable.
        const double len = u1 - u;
        const double de = (sweeper.exponent - e0) / len;
        const double dout = (sweeper.outer - o0) / len;
        u = u1;
        if (u >= u_end) {
          break;
        }
        if (prev_de >= 0.0) {
          const double ratio_e = prev_de > 0.0 ? de / prev_de : (de == 0.0 ? 0.0 : 1.0);
          const double ratio_o = prev_do > 0.0 ? dout / prev_do : (dout == 0.0 ? 0.0 : 1.0);
          const bool decaying = ratio_e < 0.9 && ratio_o < 0.9;
          const bool small =
              de <= 0.1 * cfg.rel_tol * std::max(1.0, sweeper.exponent) &&
              std::abs(dout) <= std::max(cfg.abs_tol, 0.1 * cfg.rel_tol * std::abs(sweeper.outer));
          if (decaying && small) {
            // Geometric remainder of the tail chunks.
            sweeper.exponent += de * ratio_e / (1.0 - ratio_e);
            sweeper.outer += dout * std::max(ratio_o, 0.0) / (1.0 - ratio_o);
            break;
          }
          if (u >= u_max) {
            divergent = true;
            break;
          }
        }
        prev_de = de;
        prev_do = dout;
      }
    }
    divergent = divergent || sweeper.saturated;
  }

  result.divergent = divergent;
  result.exponent = divergent ? kInf : sweeper.exponent;
  result.exponent_error = sweeper.exponent_error;
  result.outer = sweeper.outer;
  result.outer_error = sweeper.outer_error;
  return result;
}

}  // namespace taxlevy::detail
