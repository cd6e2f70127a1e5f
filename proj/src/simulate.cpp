#include "taxlevy/simulate.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <exception>
#include <functional>
#include <thread>

#include "taxlevy/errors.hpp"

namespace taxlevy {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Mean overshoot of Brownian motion over a barrier when sampled on a grid,
// in units of sigma sqrt(dt).
constexpr double kOvershootConstant = 0.5826;
// The bridge maximum exceeds S with probability exp(-2 (S - x0)(S - x1) / var);
// below exp(-30) the draw is skipped.
constexpr double kBridgeCutoff = 30.0;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// int_{s0}^{s1} e^{-q u} gamma(S_u) dS_u over a stretch on which S rises
// linearly at `speed` starting at time t0.
double discounted_tax(const TaxProfile& profile, double q, double t0, double s0, double s1,
                      double speed) {
  if (s1 <= s0) {
    return 0.0;
  }
  if (q == 0.0) {
    return gamma_integral(profile, s0, s1);
  }
  const double dt = (s1 - s0) / speed;
  if (const auto* c = std::get_if<ConstantTax>(&profile)) {
    return c->gamma * speed * std::exp(-q * t0) * -std::expm1(-q * dt) / q;
  }
  const auto f = [&](double s) {
    return std::exp(-q * (t0 + (s - s0) / speed)) * gamma_at(profile, s);
  };
  return boost::math::quadrature::gauss<double, 20>::integrate(f, s0, s1);
}

void record(std::vector<TracePoint>* trace, double t, double x, double s, double u) {
  if (trace != nullptr) {
    trace->push_back({t, x, s, u});
  }
}

void mark_ruin(PathOutcome& out, RuinKind kind, double t, double s, double a, double u_before,
               double u_at) {
  out.ruined = true;
  out.kind = kind;
  out.ruin_time = t;
  out.sup_at_ruin = s;
  out.taxed_sup_at_ruin = a;
  out.u_before = u_before;
  out.u_at = u_at;
}

PathOutcome simulate_lundberg(const CramerLundberg& m, const TaxProfile& profile, double x,
                              const PathRequest& req, double horizon, PathRng& rng,
                              std::vector<TracePoint>* trace) {
  const double c = m.c;
  const double astar = a_star(profile, x);
  const double barrier = std::min(req.stop_level, astar);
  PathOutcome out;
  double t = 0.0;
  double xs = x;
  double s = x;
  double u = x;
  record(trace, t, xs, s, u);
  for (;;) {
    const double claim_at = t + rng.exponential(m.lambda);
    const double until = std::min(claim_at, horizon);
    // Recovery below the supremum: U rises with X.
    if (xs < s) {
      const double reach = t + (s - xs) / c;
      if (reach >= until) {
        const double dx = c * (until - t);
        xs += dx;
        u += dx;
        t = until;
      } else {
        u += s - xs;
        xs = s;
        t = reach;
      }
    }
    // Climb along the supremum, paying tax.
    if (xs == s && t < until) {
      const double target = s + c * (until - t);
      const double top = std::min(target, barrier);
      out.tax_npv += discounted_tax(profile, req.q, t, s, top, c);
      u += (top - s) - gamma_integral(profile, s, top);
      t += (top - s) / c;
      s = xs = top;
      if (top == barrier && barrier <= target) {
        ++out.steps;
        record(trace, t, xs, s, u);
        if (barrier == req.stop_level) {
          out.reached_level = true;
          out.level_time = t;
        }
        if (barrier == astar) {
          mark_ruin(out, RuinKind::creep_supremum, t, s, u, u, u);
        }
        return out;
      }
      t = until;
    }
    ++out.steps;
    if (claim_at >= horizon) {
      record(trace, t, xs, s, u);
      out.censored = true;
      return out;
    }
    const double jump = rng.exponential(m.claim_rate);
    const double before = u;
    xs -= jump;
    u -= jump;
    record(trace, t, xs, s, u);
    if (u < 0.0) {
      mark_ruin(out, RuinKind::jump, t, s, before + (s - xs) - jump, before, u);
      return out;
    }
  }
}

struct EulerParams {
  double drift;
  double sigma;
  double lambda;
  double claim_rate;
};

PathOutcome simulate_euler(const EulerParams& p, const TaxProfile& profile, double x,
                           const PathRequest& req, const McConfig& cfg, double horizon,
                           PathRng& rng, std::vector<TracePoint>* trace) {
  const double dt = cfg.time_step;
  const double eps = cfg.barrier_epsilon.value_or(kOvershootConstant * p.sigma);
  const double threshold = eps * std::sqrt(dt);
  const double full_mean = p.drift * dt;
  const double full_sd = p.sigma * std::sqrt(dt);
  const bool has_jumps = p.lambda > 0.0;
  PathOutcome out;
  double t = 0.0;
  double xs = x;
  double s = x;
  double u = x;
  double next_claim = has_jumps ? rng.exponential(p.lambda) : kInf;
  record(trace, t, xs, s, u);
  while (t < horizon) {
    const double h = std::min({dt, next_claim - t, horizon - t});
    const double dx = h == dt ? full_mean + full_sd * rng.normal()
                              : p.drift * h + p.sigma * std::sqrt(h) * rng.normal();
    const double u_prev = u;
    const double t_prev = t;
    xs += dx;
    if (h == next_claim - t) {
      t = next_claim;
    } else if (h == horizon - t) {
      t = horizon;
    } else {
      t += h;
    }
    ++out.steps;
    // Maximum of the Brownian bridge from xs - dx to xs over the step, drawn
    // only when it can exceed the running supremum with non-negligible odds.
    double top = xs;
    const double var = p.sigma * p.sigma * h;
    const double below_prev = s - (xs - dx);
    const double below_now = s - xs;
    if (below_now <= 0.0 || 2.0 * below_prev * below_now < kBridgeCutoff * var) {
      const double mid = xs - 0.5 * dx;
      top = mid + 0.5 * std::sqrt(dx * dx - 2.0 * var * std::log(rng.uniform()));
    }
    if (top > s) {
      const double tax = gamma_integral(profile, s, top);
      if (tax != 0.0) {
        const double disc =
            req.q == 0.0 ? 1.0 : 0.5 * (std::exp(-req.q * t_prev) + std::exp(-req.q * t));
        out.tax_npv += disc * tax;
      }
      u += dx - tax;
      s = top;
    } else {
      u += dx;
    }
    if (u < threshold) {
      record(trace, t, xs, s, u);
      const double level = u + (s - xs);
      const RuinKind kind =
          level < threshold ? RuinKind::creep_supremum : RuinKind::creep_diffusive;
      mark_ruin(out, kind, t, s, level, u_prev, u);
      return out;
    }
    if (s >= req.stop_level) {
      record(trace, t, xs, s, u);
      out.reached_level = true;
      out.level_time = t;
      return out;
    }
    if (t == next_claim) {
      const double jump = rng.exponential(p.claim_rate);
      const double before = u;
      xs -= jump;
      u -= jump;
      next_claim = t + rng.exponential(p.lambda);
      if (u < threshold) {
        record(trace, t, xs, s, u);
        const RuinKind kind = u < 0.0 ? RuinKind::jump : RuinKind::creep_diffusive;
        mark_ruin(out, kind, t, s, before + (s - xs) - jump, before, u);
        return out;
      }
    }
    record(trace, t, xs, s, u);
  }
  out.censored = true;
  return out;
}

double discount(double q, double t) { return q == 0.0 ? 1.0 : std::exp(-q * t); }

}  // namespace

std::string step_warning(const LevyModel& model, double x, const McConfig& cfg) {
  const double sigma = gaussian_coefficient(model);
  if (sigma == 0.0) {
    return {};
  }
  const double h = cfg.time_step;
  if (sigma * std::sqrt(h) + std::abs(linear_drift(model)) * h > 0.05 * x) {
    return "time_step is coarse relative to x for this model";
  }
  return {};
}

namespace {

Estimate estimate_with(const LevyModel& model, const TaxProfile& profile, double x,
                       const PathRequest& req, const McConfig& cfg,
                       const std::function<double(const PathOutcome&)>& value) {
  const auto outcomes = simulate_paths(model, profile, x, req, cfg);
  std::vector<double> values;
  values.reserve(outcomes.size());
  std::int64_t censored = 0;
  for (const auto& o : outcomes) {
    values.push_back(value(o));
    censored += o.censored ? 1 : 0;
  }
  Estimate e = summarize(values, censored);
  e.warning = step_warning(model, x, cfg);
  return e;
}

void check_q(double q) {
  if (!(q >= 0.0) || !std::isfinite(q)) {
    throw DomainError("q must be finite and >= 0");
  }
}

}  // namespace

void McConfig::validate() const {
  if (n_paths <= 0) {
    throw ConfigError("mc.n_paths must be > 0");
  }
  if (!(time_step > 0.0) || !std::isfinite(time_step)) {
    throw ConfigError("mc.time_step must be > 0");
  }
  if (horizon && !(*horizon > 0.0)) {
    throw ConfigError("mc.horizon must be > 0");
  }
  if (barrier_epsilon && !(*barrier_epsilon >= 0.0)) {
    throw ConfigError("mc.barrier_epsilon must be >= 0");
  }
  if (threads < 0) {
    throw ConfigError("mc.threads must be >= 0");
  }
}

PathRng::PathRng(std::uint64_t seed, std::uint64_t path_index)
    : engine_(splitmix64(splitmix64(seed) ^ splitmix64(path_index + 0x632BE59BD9B4E019ULL))) {}

double PathRng::normal() {
  return boost::random::normal_distribution<double>()(engine_);
}

double PathRng::uniform() {
  // 53 random bits mapped to (0, 1].
  return static_cast<double>((engine_() >> 11) + 1) * 0x1p-53;
}

double PathRng::exponential(double rate) {
  return boost::random::exponential_distribution<double>(rate)(engine_);
}

double default_horizon(const LevyModel& model, double x) {
  return 10.0 * x / std::max(std::abs(psi_prime_at_zero(model)), 0.1);
}

PathOutcome simulate_path(const LevyModel& model, const TaxProfile& profile, double x,
                          const PathRequest& request, const McConfig& config, PathRng& rng,
                          std::vector<TracePoint>* trace) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("simulate_path: x must be finite and > 0");
  }
  check_q(request.q);
  const double horizon = config.horizon.value_or(default_horizon(model, x));
  return std::visit(
      [&](const auto& m) -> PathOutcome {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CramerLundberg>) {
          return simulate_lundberg(m, profile, x, request, horizon, rng, trace);
        } else if constexpr (std::is_same_v<T, BrownianDrift>) {
          return simulate_euler({m.mu, m.sigma, 0.0, 0.0}, profile, x, request, config,
                                horizon, rng, trace);
        } else {
          return simulate_euler({m.c, m.sigma, m.lambda, m.claim_rate}, profile, x, request,
                                config, horizon, rng, trace);
        }
      },
      model);
}

std::vector<PathOutcome> simulate_paths(const LevyModel& model, const TaxProfile& profile,
                                        double x, const PathRequest& request,
                                        const McConfig& config) {
  validate(model);
  validate(profile);
  config.validate();
  const auto n = config.n_paths;
  std::vector<PathOutcome> out(static_cast<std::size_t>(n));
  const auto run_range = [&](std::int64_t first, std::int64_t stride) {
    for (std::int64_t i = first; i < n; i += stride) {
      PathRng rng(config.seed, static_cast<std::uint64_t>(i));
      out[static_cast<std::size_t>(i)] = simulate_path(model, profile, x, request, config, rng);
    }
  };
  int threads = config.threads == 0 ? static_cast<int>(std::thread::hardware_concurrency())
                                    : config.threads;
  threads = static_cast<int>(std::clamp<std::int64_t>(threads, 1, n));
  if (threads == 1) {
    run_range(0, 1);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int k = 0; k < threads; ++k) {
    pool.emplace_back([&, k] {
      try {
        run_range(k, threads);
      } catch (...) {
        errors[static_cast<std::size_t>(k)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) {
    th.join();
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  return out;
}

Estimate summarize(const std::vector<double>& values, std::int64_t censored) {
  Estimate e;
  const auto n = static_cast<std::int64_t>(values.size());
  if (n == 0) {
    return e;
  }
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) {
    ss += (v - mean) * (v - mean);
  }
  e.value = mean;
  e.std_error = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  e.n_effective = n - censored;
  e.censored_fraction = static_cast<double>(censored) / static_cast<double>(n);
  return e;
}

Estimate estimate_exit_up(const LevyModel& model, const TaxProfile& profile, double q,
                          double x, double a, const McConfig& config) {
  check_q(q);
  if (!(a >= x) || a > a_star(profile, x)) {
    throw DomainError("estimate_exit_up: need x <= a <= a*(x)");
  }
  return estimate_with(model, profile, x, {q, a}, config, [q](const PathOutcome& o) {
    return o.reached_level ? discount(q, o.level_time) : 0.0;
  });
}

Estimate estimate_exit_down(const LevyModel& model, const TaxProfile& profile, double q,
                            double x, double a, const McConfig& config) {
  check_q(q);
  if (!(a >= x) || a > a_star(profile, x)) {
    throw DomainError("estimate_exit_down: need x <= a <= a*(x)");
  }
  return estimate_with(model, profile, x, {q, a}, config, [q](const PathOutcome& o) {
    return o.ruined && !o.reached_level ? discount(q, o.ruin_time) : 0.0;
  });
}

Estimate estimate_ruin(const LevyModel& model, const TaxProfile& profile, double q, double x,
                       const McConfig& config) {
  check_q(q);
  return estimate_with(model, profile, x, {q, kInf}, config, [q](const PathOutcome& o) {
    return o.ruined ? discount(q, o.ruin_time) : 0.0;
  });
}

Estimate estimate_npv(const LevyModel& model, const TaxProfile& profile, double q, double x,
                      const McConfig& config) {
  check_q(q);
  return estimate_with(model, profile, x, {q, kInf}, config,
                       [](const PathOutcome& o) { return o.tax_npv; });
}

Estimate estimate_creep2(const LevyModel& model, const TaxProfile& profile, double q,
                         double x, const McConfig& config) {
  check_q(q);
  return estimate_with(model, profile, x, {q, kInf}, config, [q](const PathOutcome& o) {
    return o.kind == RuinKind::creep_supremum ? discount(q, o.ruin_time) : 0.0;
  });
}

Estimate estimate_creep1(const LevyModel& model, const TaxProfile& profile, double q,
                         double x, const McConfig& config) {
  check_q(q);
  return estimate_with(model, profile, x, {q, kInf}, config, [q](const PathOutcome& o) {
    return o.kind == RuinKind::creep_diffusive ? discount(q, o.ruin_time) : 0.0;
  });
}

}  // namespace taxlevy
