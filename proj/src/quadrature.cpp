#include "taxlevy/quadrature.hpp"

#include <cmath>
#include <queue>
#include <vector>

#include "taxlevy/errors.hpp"

namespace taxlevy {
namespace {

constexpr std::array<double, 11> kNodesHalf = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
constexpr std::array<double, 11> kKronrodHalf = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208931424944, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights belong to the odd entries of kNodesHalf.
constexpr std::array<double, 5> kGaussHalf = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

long double legendre(int n, long double x) {
  if (n == 0) {
    return 1.0L;
  }
  long double p0 = 1.0L;
  long double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

KronrodRule build_rule() {
  KronrodRule rule;
  constexpr int n = KronrodRule::size;
  // Ascending order: -x_0 .. -x_9, 0, x_9 .. x_0.
  for (int i = 0; i < 10; ++i) {
    rule.nodes[i] = -kNodesHalf[i];
    rule.nodes[n - 1 - i] = kNodesHalf[i];
    rule.kronrod_weights[i] = rule.kronrod_weights[n - 1 - i] = kKronrodHalf[i];
    if (i % 2 == 1) {
      rule.gauss_weights[i] = rule.gauss_weights[n - 1 - i] = kGaussHalf[i / 2];
    }
  }
  rule.nodes[10] = 0.0;
  rule.kronrod_weights[10] = kKronrodHalf[10];

  // cumulative = B V^{-1} with V[j][m] = P_m(y_j) and
  // B[k][m] = int_{-1}^{y_k} P_m; solved as V^T X = B^T in long double.
  using Row = std::array<long double, n>;
  std::array<Row, n> vt{};
  std::array<Row, n> bt{};
  for (int j = 0; j < n; ++j) {
    const long double y = rule.nodes[j];
    for (int m = 0; m < n; ++m) {
      vt[m][j] = legendre(m, y);
      bt[m][j] = m == 0 ? y + 1.0L
                        : (legendre(m + 1, y) - legendre(m - 1, y)) / (2 * m + 1);
    }
  }
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::fabs(vt[r][col]) > std::fabs(vt[piv][col])) {
        piv = r;
      }
    }
    std::swap(vt[col], vt[piv]);
    std::swap(bt[col], bt[piv]);
    for (int r = 0; r < n; ++r) {
      if (r == col) {
        continue;
      }
      const long double f = vt[r][col] / vt[col][col];
      for (int c = 0; c < n; ++c) {
        vt[r][c] -= f * vt[col][c];
        bt[r][c] -= f * bt[col][c];
      }
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      rule.cumulative[k][j] = static_cast<double>(bt[j][k] / vt[j][j]);
    }
  }
  return rule;
}

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk21(const std::function<double(double)>& f, double a, double b) {
  const auto& rule = kronrod21();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double k = 0.0;
  double g = 0.0;
  for (int i = 0; i < KronrodRule::size; ++i) {
    const double v = f(mid + half * rule.nodes[i]);
    k += rule.kronrod_weights[i] * v;
    g += rule.gauss_weights[i] * v;
  }
  return {a, b, k * half, std::abs((k - g) * half)};
}

}  // namespace

void QuadratureConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || max_subdivisions <= 0 ||
      !(singular_edge_fraction > 0.0) || !(infinity_map_scale > 0.0) ||
      !(divergence_cap > 0.0)) {
    throw ConfigError("quadrature settings must all be > 0");
  }
}

const KronrodRule& kronrod21() {
  static const KronrodRule rule = build_rule();
  return rule;
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadratureConfig& cfg) {
  if (a == b) {
    return {};
  }
  std::priority_queue<Segment> heap;
  Segment first = gk21(f, a, b);
  double total = first.value;
  double total_err = first.error;
  heap.push(first);
  int evaluations = KronrodRule::size;
  int segments = 1;
  while (total_err > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total))) {
    if (segments >= cfg.max_subdivisions) {
      throw AccuracyError("integrate: subdivision budget exhausted", total, total_err);
    }
    Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      break;  // interval at machine resolution; keep its estimate
    }
    heap.pop();
    const Segment left = gk21(f, worst.a, mid);
    const Segment right = gk21(f, mid, worst.b);
    evaluations += 2 * KronrodRule::size;
    ++segments;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Recompute from the pieces to shed accumulated rounding.
  double sum = 0.0;
  double err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {sum, err, evaluations};
}

QuadResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                 const QuadratureConfig& cfg) {
  const double scale = cfg.infinity_map_scale;
  const auto mapped = [&](double u) {
    const double w = 1.0 - u;
    const double v = f(a + scale * u / w);
    return v == 0.0 ? 0.0 : v * scale / (w * w);
  };
  return integrate(mapped, 0.0, 1.0, cfg);
}

}  // namespace taxlevy
