#include "taxlevy/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <limits>
#include <ostream>
#include <sstream>

#include "taxlevy/errors.hpp"
#include "taxlevy/identities.hpp"
#include "taxlevy/scale.hpp"

namespace taxlevy::cli {
namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// JSON <-> config

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object()) {
    throw ConfigError(where + " must be an object");
  }
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) {
      throw ConfigError("unknown key '" + (where.empty() ? "" : where + ".") + item.key() + "'");
    }
  }
}

std::string field_name(const std::string& where, const char* key) {
  return where.empty() ? std::string(key) : where + "." + key;
}

double number(const json& j, const char* key, const std::string& where, double fallback) {
  if (!j.contains(key)) {
    return fallback;
  }
  const json& v = j.at(key);
  if (!v.is_number()) {
    throw ConfigError(field_name(where, key) + " must be a number");
  }
  return v.get<double>();
}

std::optional<double> maybe_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) {
    return std::nullopt;
  }
  return number(j, key, where, 0.0);
}

template <typename Int>
Int integer(const json& j, const char* key, const std::string& where, Int fallback) {
  if (!j.contains(key)) {
    return fallback;
  }
  const json& v = j.at(key);
  if (!v.is_number_integer()) {
    throw ConfigError(field_name(where, key) + " must be an integer");
  }
  if constexpr (std::is_unsigned_v<Int>) {
    if (v.is_number_unsigned()) {
      return v.get<Int>();
    }
    if (v.get<std::int64_t>() < 0) {
      throw ConfigError(field_name(where, key) + " must be >= 0");
    }
  }
  return v.get<Int>();
}

std::string text(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) {
    return {};
  }
  const json& v = j.at(key);
  if (!v.is_string()) {
    throw ConfigError(field_name(where, key) + " must be a string");
  }
  return v.get<std::string>();
}

json model_to_json(const LevyModel& model) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BrownianDrift>) {
          return {{"type", "brownian"}, {"mu", m.mu}, {"sigma", m.sigma}};
        } else if constexpr (std::is_same_v<T, CramerLundberg>) {
          return {{"type", "cl"}, {"c", m.c}, {"lambda", m.lambda}, {"claim_rate", m.claim_rate}};
        } else {
          return {{"type", "mixed"},     {"c", m.c},       {"lambda", m.lambda},
                  {"claim_rate", m.claim_rate}, {"sigma", m.sigma}};
        }
      },
      model);
}

LevyModel model_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) {
    throw ConfigError(where + " must be an object");
  }
  const std::string type = text(j, "type", where);
  if (type == "brownian") {
    check_keys(j, {"type", "mu", "sigma"}, where);
    BrownianDrift m;
    return BrownianDrift{number(j, "mu", where, m.mu), number(j, "sigma", where, m.sigma)};
  }
  if (type == "cl") {
    check_keys(j, {"type", "c", "lambda", "claim_rate"}, where);
    CramerLundberg m;
    return CramerLundberg{number(j, "c", where, m.c), number(j, "lambda", where, m.lambda),
                          number(j, "claim_rate", where, m.claim_rate)};
  }
  if (type == "mixed") {
    check_keys(j, {"type", "c", "lambda", "claim_rate", "sigma"}, where);
    MixedModel m;
    return MixedModel{number(j, "c", where, m.c), number(j, "lambda", where, m.lambda),
                      number(j, "claim_rate", where, m.claim_rate),
                      number(j, "sigma", where, m.sigma)};
  }
  throw ConfigError(where + ".type must be one of brownian, cl, mixed");
}

json profile_to_json(const TaxProfile& profile) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantTax>) {
          return {{"type", "constant"}, {"gamma", p.gamma}};
        } else if constexpr (std::is_same_v<T, TableTax>) {
          json knots = json::array();
          for (const auto& [s, g] : p.knots()) {
            knots.push_back({s, g});
          }
          return {{"type", "table"}, {"knots", knots}};
        } else {
          return {{"type", "sqrt_example"}, {"a", p.a}, {"tail_gamma", p.tail_gamma}};
        }
      },
      profile);
}

TaxProfile profile_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) {
    throw ConfigError(where + " must be an object");
  }
  const std::string type = text(j, "type", where);
  if (type == "constant") {
    check_keys(j, {"type", "gamma"}, where);
    return ConstantTax{number(j, "gamma", where, 0.0)};
  }
  if (type == "table") {
    check_keys(j, {"type", "knots"}, where);
    if (!j.contains("knots") || !j.at("knots").is_array()) {
      throw ConfigError(where + ".knots must be an array of [level, rate] pairs");
    }
    std::vector<std::pair<double, double>> knots;
    for (const auto& k : j.at("knots")) {
      if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number()) {
        throw ConfigError(where + ".knots must be an array of [level, rate] pairs");
      }
      knots.emplace_back(k[0].get<double>(), k[1].get<double>());
    }
    try {
      return TableTax(std::move(knots));
    } catch (const DomainError& e) {
      throw ConfigError(where + ".knots: " + e.what());
    }
  }
  if (type == "sqrt_example") {
    check_keys(j, {"type", "a", "tail_gamma"}, where);
    SqrtExampleTax p;
    return SqrtExampleTax{number(j, "a", where, p.a), number(j, "tail_gamma", where, p.tail_gamma)};
  }
  throw ConfigError(where + ".type must be one of constant, table, sqrt_example");
}

json quad_to_json(const QuadratureConfig& q) {
  return {{"rel_tol", q.rel_tol},
          {"abs_tol", q.abs_tol},
          {"max_subdivisions", q.max_subdivisions},
          {"singular_edge_fraction", q.singular_edge_fraction},
          {"infinity_map_scale", q.infinity_map_scale},
          {"divergence_cap", q.divergence_cap}};
}

QuadratureConfig quad_from_json(const json& j) {
  const std::string where = "quad";
  check_keys(j,
             {"rel_tol", "abs_tol", "max_subdivisions", "singular_edge_fraction",
              "infinity_map_scale", "divergence_cap"},
             where);
  QuadratureConfig q;
  q.rel_tol = number(j, "rel_tol", where, q.rel_tol);
  q.abs_tol = number(j, "abs_tol", where, q.abs_tol);
  q.max_subdivisions = integer(j, "max_subdivisions", where, q.max_subdivisions);
  q.singular_edge_fraction = number(j, "singular_edge_fraction", where, q.singular_edge_fraction);
  q.infinity_map_scale = number(j, "infinity_map_scale", where, q.infinity_map_scale);
  q.divergence_cap = number(j, "divergence_cap", where, q.divergence_cap);
  return q;
}

json mc_to_json(const McConfig& m) {
  json j = {{"n_paths", m.n_paths},
            {"seed", m.seed},
            {"time_step", m.time_step},
            {"threads", m.threads}};
  if (m.horizon) {
    j["horizon"] = *m.horizon;
  }
  if (m.barrier_epsilon) {
    j["barrier_epsilon"] = *m.barrier_epsilon;
  }
  return j;
}

McConfig mc_from_json(const json& j) {
  const std::string where = "mc";
  check_keys(j, {"n_paths", "seed", "time_step", "horizon", "barrier_epsilon", "threads"}, where);
  McConfig m;
  m.n_paths = integer(j, "n_paths", where, m.n_paths);
  m.seed = integer(j, "seed", where, m.seed);
  m.time_step = number(j, "time_step", where, m.time_step);
  m.horizon = maybe_number(j, "horizon", where);
  m.barrier_epsilon = maybe_number(j, "barrier_epsilon", where);
  m.threads = integer(j, "threads", where, m.threads);
  return m;
}

json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read file '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void set_param(RunConfig& c, const std::string& name, double v) {
  if (name == "q") {
    c.q = v;
  } else if (name == "x") {
    c.x = v;
  } else if (name == "a") {
    c.a = v;
  } else if (name == "alpha") {
    c.alpha = v;
  } else if (name == "beta") {
    c.beta = v;
  } else if (name == "theta") {
    c.theta = v;
  } else if (name == "y") {
    c.y = v;
  } else if (name == "z") {
    c.z = v;
  } else if (name == "gamma") {
    c.profile = ConstantTax{v};
  } else {
    throw ConfigError("grid.param '" + name +
                      "' is not one of q, x, a, alpha, beta, theta, y, z, gamma");
  }
}

// ---------------------------------------------------------------------------
// CSV output

std::string num(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Rows are written as they are produced; the header goes out with the first
// row so that a failed evaluation leaves no partial table behind.
class Csv {
 public:
  explicit Csv(std::ostream& out) : out_(out) {}

  void header(std::initializer_list<const char*> cols) {
    if (pending_.empty() && !header_done_) {
      pending_.assign(cols.begin(), cols.end());
    }
  }

  void row(const std::vector<std::string>& fields) {
    if (!header_done_) {
      header_done_ = true;
      write(pending_);
    }
    write(fields);
  }

 private:
  void write(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      out_ << (i ? "," : "") << fields[i];
    }
    out_ << '\n';
  }

  std::ostream& out_;
  std::vector<std::string> pending_;
  bool header_done_ = false;
};

double need(const std::optional<double>& v, const char* name) {
  if (!v) {
    throw ConfigError("missing required field '" + std::string(name) + "'");
  }
  return *v;
}

// ---------------------------------------------------------------------------
// Commands

void cmd_scale(const RunConfig& c, Csv& csv) {
  csv.header({"model", "q", "x", "phi", "W", "W_prime", "Z"});
  const double x = need(c.x, "x");
  const ScaleEvaluator s = make_scale(c.model, c.q);
  csv.row({describe(c.model), num(c.q), num(x), num(s.phi()), num(s.w(x)), num(s.w_prime(x)),
           num(s.z(x))});
}

void cmd_exit(const RunConfig& c, Csv& csv, bool up) {
  csv.header({"model", "profile", "q", "x", "a", "a_star", "value", "error"});
  const double x = need(c.x, "x");
  const double a = need(c.a, "a");
  const ScaleEvaluator s = make_scale(c.model, c.q);
  const Evaluation e = up ? two_sided_up(s, c.profile, x, a, c.quad)
                          : two_sided_down(s, c.profile, x, a, c.quad);
  csv.row({describe(c.model), describe(c.profile), num(c.q), num(x), num(a),
           num(a_star(c.profile, x)), num(e.value), num(e.error)});
}

void cmd_ruin(const RunConfig& c, Csv& csv) {
  csv.header({"model", "profile", "q", "x", "value", "error"});
  const double x = need(c.x, "x");
  const Evaluation e = ruin_laplace(make_scale(c.model, c.q), c.profile, x, c.quad);
  csv.row({describe(c.model), describe(c.profile), num(c.q), num(x), num(e.value), num(e.error)});
}

void cmd_npv(const RunConfig& c, Csv& csv) {
  csv.header({"model", "profile", "q", "x", "value", "error"});
  const double x = need(c.x, "x");
  const Evaluation e = npv_tax(make_scale(c.model, c.q), c.profile, x, c.quad);
  csv.row({describe(c.model), describe(c.profile), num(c.q), num(x), num(e.value), num(e.error)});
}

void cmd_creep(const RunConfig& c, Csv& csv) {
  csv.header({"model", "profile", "q", "x", "a_star", "test", "exponent", "laplace"});
  const double x = need(c.x, "x");
  const CreepTest t = creep2_test(make_scale(c.model, 0.0), c.profile, x, c.quad);
  const Evaluation l = creep2_laplace(make_scale(c.model, c.q), c.profile, x, c.quad);
  csv.row({describe(c.model), describe(c.profile), num(c.q), num(x), num(a_star(c.profile, x)),
           t.creeps ? "true" : "false", num(t.exponent.value), num(l.value)});
}

void cmd_triple(const RunConfig& c, Csv& csv) {
  csv.header({"model", "profile", "x", "theta", "y", "z", "alpha", "beta", "ac_density",
              "atom_density", "creep1_density"});
  const double x = need(c.x, "x");
  const TripleLawPoint p{need(c.theta, "theta"), need(c.y, "y"), need(c.z, "z"), c.alpha,
                         c.beta};
  const ScaleEvaluator sa = make_scale(c.model, c.alpha);
  const ScaleEvaluator sb = make_scale(c.model, c.beta);
  const TripleLawDensity d = triple_law_density(sa, sb, c.profile, x, p, c.quad);
  const double creep1 = creep1_density(sa, sb, c.profile, x, p.theta, c.quad);
  csv.row({describe(c.model), describe(c.profile), num(x), num(p.theta), num(p.y), num(p.z),
           num(c.alpha), num(c.beta), num(d.ac_density), num(d.atom_density), num(creep1)});
}

double disc(double q, double t) { return q == 0.0 ? 1.0 : std::exp(-q * t); }

void cmd_simulate(const RunConfig& c, Csv& csv) {
  csv.header({"model", "profile", "quantity", "q", "x", "a", "value", "std_error", "n_effective",
              "censored_fraction", "warning"});
  const double x = need(c.x, "x");
  const auto emit = [&](const char* quantity, double a, const Estimate& e) {
    csv.row({describe(c.model), describe(c.profile), quantity, num(c.q), num(x), num(a),
             num(e.value), num(e.std_error), std::to_string(e.n_effective),
             num(e.censored_fraction), e.warning});
  };
  if (c.a) {
    emit("exit_up", *c.a, estimate_exit_up(c.model, c.profile, c.q, x, *c.a, c.mc));
    emit("exit_down", *c.a, estimate_exit_down(c.model, c.profile, c.q, x, *c.a, c.mc));
  }
  // Ruin, tax and creeping share one set of paths.
  const auto paths = simulate_paths(c.model, c.profile, x, {c.q, kInf}, c.mc);
  std::int64_t censored = 0;
  for (const auto& o : paths) {
    censored += o.censored ? 1 : 0;
  }
  const std::string warning = step_warning(c.model, x, c.mc);
  const auto stat = [&](const std::function<double(const PathOutcome&)>& f) {
    std::vector<double> v;
    v.reserve(paths.size());
    for (const auto& o : paths) {
      v.push_back(f(o));
    }
    Estimate e = summarize(v, censored);
    e.warning = warning;
    return e;
  };
  const double q = c.q;
  emit("ruin", kInf, stat([q](const PathOutcome& o) { return o.ruined ? disc(q, o.ruin_time) : 0.0; }));
  emit("npv", kInf, stat([](const PathOutcome& o) { return o.tax_npv; }));
  emit("creep2", kInf, stat([q](const PathOutcome& o) {
         return o.kind == RuinKind::creep_supremum ? disc(q, o.ruin_time) : 0.0;
       }));
  emit("creep1", kInf, stat([q](const PathOutcome& o) {
         return o.kind == RuinKind::creep_diffusive ? disc(q, o.ruin_time) : 0.0;
       }));
}

struct SuiteRow {
  std::string quantity;
  double formula;
  Estimate mc;
};

// R > 0 with psi(-R) = 0; ruin from level u decays like exp(-R u).
double adjustment_coefficient(const LevyModel& model) {
  const auto psi = [&](double theta) {
    return laplace_exponent(model, std::complex<double>(theta, 0.0)).real();
  };
  double lo = claim_rate(model) > 0.0 ? -claim_rate(model) * (1.0 - 1e-12) : -1.0;
  while (claim_rate(model) == 0.0 && psi(lo) <= 0.0) {
    lo *= 2.0;
  }
  double hi = lo * 1e-9;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::abs(lo); ++i) {
    const double mid = 0.5 * (lo + hi);
    (psi(mid) > 0.0 ? lo : hi) = mid;
  }
  return -0.5 * (lo + hi);
}

std::vector<SuiteRow> verify_suite(const McConfig& base, const QuadratureConfig& quad) {
  const std::vector<LevyModel> models = {CramerLundberg{1.0, 0.5, 1.0}, BrownianDrift{1.0, 1.0},
                                         MixedModel{1.5, 0.5, 1.0, 0.5}};
  const std::vector<double> gammas = {0.0, 0.5, 2.0};
  const double x = 1.0;
  const double a = 1.5;
  std::vector<SuiteRow> rows;
  for (const auto& model : models) {
    const double drift = psi_prime_at_zero(model);
    const double adjust = adjustment_coefficient(model);
    const ScaleEvaluator s0 = make_scale(model, 0.0);
    const ScaleEvaluator s5 = make_scale(model, 0.5);
    for (double g : gammas) {
      const TaxProfile profile = ConstantTax{g};
      const std::string tag = describe(model) + " " + describe(profile) + " x=" + num(x);
      McConfig mc = base;
      rows.push_back({"exit_up " + tag + " q=0 a=" + num(a),
                      two_sided_up(s0, profile, x, a, quad).value,
                      estimate_exit_up(model, profile, 0.0, x, a, mc)});
      rows.push_back({"exit_up " + tag + " q=0.5 a=" + num(a),
                      two_sided_up(s5, profile, x, a, quad).value,
                      estimate_exit_up(model, profile, 0.5, x, a, mc)});
      rows.push_back({"exit_down " + tag + " q=0 a=" + num(a),
                      two_sided_down(s0, profile, x, a, quad).value,
                      estimate_exit_down(model, profile, 0.0, x, a, mc)});
      if (std::isinf(a_star(profile, x))) {
        // Long enough for U to drift about 12/R above x, where further ruin
        // is negligible.
        McConfig ruin_mc = mc;
        if (!ruin_mc.horizon) {
          ruin_mc.horizon = (12.0 / adjust + x) / ((1.0 - g) * drift);
        }
        rows.push_back({"ruin " + tag + " q=0", ruin_probability(s0, profile, x, quad).value,
                        estimate_ruin(model, profile, 0.0, x, ruin_mc)});
        if (g > 0.0) {
          McConfig npv_mc = mc;
          if (!npv_mc.horizon) {
            npv_mc.horizon = 28.0;
          }
          rows.push_back({"npv " + tag + " q=0.5", npv_tax(s5, profile, x, quad).value,
                          estimate_npv(model, profile, 0.5, x, npv_mc)});
        }
      } else {
        rows.push_back({"npv " + tag + " q=0", npv_tax(s0, profile, x, quad).value,
                        estimate_npv(model, profile, 0.0, x, mc)});
        if (gaussian_coefficient(model) > 0.0) {
          // The Euler classification of creeping at the supremum has an
          // O(sqrt(time_step)) bias, so it is not compared here.
          continue;
        }
        rows.push_back({"creep2 " + tag + " q=0", creep2_laplace(s0, profile, x, quad).value,
                        estimate_creep2(model, profile, 0.0, x, mc)});
      }
    }
  }
  return rows;
}

void cmd_verify(const RunConfig& c, Csv& csv) {
  csv.header({"quantity", "formula_value", "mc_value", "std_error", "z_score"});
  for (const auto& r : verify_suite(c.mc, c.quad)) {
    const double diff = r.mc.value - r.formula;
    const double z = r.mc.std_error > 0.0 ? diff / r.mc.std_error : (diff == 0.0 ? 0.0 : kInf);
    csv.row({r.quantity, num(r.formula), num(r.mc.value), num(r.mc.std_error), num(z)});
  }
}

void execute_one(const RunConfig& c, Csv& csv) {
  const std::string& cmd = c.command;
  if (cmd == "scale") {
    cmd_scale(c, csv);
  } else if (cmd == "exit-up") {
    cmd_exit(c, csv, true);
  } else if (cmd == "exit-down") {
    cmd_exit(c, csv, false);
  } else if (cmd == "ruin") {
    cmd_ruin(c, csv);
  } else if (cmd == "npv") {
    cmd_npv(c, csv);
  } else if (cmd == "creep") {
    cmd_creep(c, csv);
  } else if (cmd == "triple-law") {
    cmd_triple(c, csv);
  } else if (cmd == "simulate") {
    cmd_simulate(c, csv);
  } else if (cmd == "verify") {
    cmd_verify(c, csv);
  } else {
    throw ConfigError("command '" + cmd + "' is not a known subcommand");
  }
}

// ---------------------------------------------------------------------------
// Command line

struct Flags {
  std::string config_file;
  std::string model_file;
  std::string profile_file;
  std::string model_type;
  std::string out;
  std::string grid;
  double mu = 0.0;
  double sigma = 0.0;
  double c = 0.0;
  double lambda = 0.0;
  double claim_rate = 0.0;
  double gamma = 0.0;
  double q = 0.0;
  double x = 0.0;
  double a = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double theta = 0.0;
  double y = 0.0;
  double z = 0.0;
  double time_step = 0.0;
  double horizon = 0.0;
  std::int64_t n_paths = 0;
  std::uint64_t seed = 0;
  int threads = 0;
  bool dump = false;
};

void add_flags(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config_file, "JSON run config");
  app.add_option("--model-file", f.model_file, "JSON model description");
  app.add_option("--profile-file", f.profile_file, "JSON tax profile description");
  app.add_option("--model", f.model_type, "brownian, cl or mixed");
  app.add_option("--mu", f.mu, "Brownian drift");
  app.add_option("--sigma", f.sigma, "Gaussian coefficient");
  app.add_option("--c", f.c, "premium rate");
  app.add_option("--lambda", f.lambda, "claim arrival rate");
  app.add_option("--claim-rate", f.claim_rate, "rate of exponential claim sizes");
  app.add_option("--gamma", f.gamma, "constant tax rate");
  app.add_option("--q", f.q, "discount rate");
  app.add_option("--x", f.x, "initial surplus");
  app.add_option("--a", f.a, "upper exit level");
  app.add_option("--alpha", f.alpha, "discount rate before the last tax payment");
  app.add_option("--beta", f.beta, "discount rate after the last tax payment");
  app.add_option("--theta", f.theta, "triple law: A at ruin");
  app.add_option("--y", f.y, "triple law: undershoot");
  app.add_option("--z", f.z, "triple law: overshoot");
  app.add_option("--n-paths", f.n_paths, "Monte Carlo paths");
  app.add_option("--seed", f.seed, "Monte Carlo seed");
  app.add_option("--time-step", f.time_step, "Euler step");
  app.add_option("--horizon", f.horizon, "Monte Carlo censoring time");
  app.add_option("--threads", f.threads, "Monte Carlo worker threads (0 = all cores)");
  app.add_option("--out", f.out, "output CSV path (default: stdout)");
  app.add_option("--grid", f.grid, "sweep param:from:to:points");
  app.add_flag("--dump-config", f.dump, "print the merged config as JSON and exit");
}

void apply_model_flags(RunConfig& cfg, const Flags& f, const CLI::App& sub) {
  const auto given = [&](const char* name) { return sub.get_option(name)->count() > 0; };
  if (given("--model")) {
    if (f.model_type == "brownian") {
      if (!std::holds_alternative<BrownianDrift>(cfg.model)) cfg.model = BrownianDrift{};
    } else if (f.model_type == "cl") {
      if (!std::holds_alternative<CramerLundberg>(cfg.model)) cfg.model = CramerLundberg{};
    } else if (f.model_type == "mixed") {
      if (!std::holds_alternative<MixedModel>(cfg.model)) cfg.model = MixedModel{};
    } else {
      throw ConfigError("--model must be one of brownian, cl, mixed");
    }
  }
  const auto apply = [&](const char* flag, auto setter) {
    if (given(flag) && !std::visit(setter, cfg.model)) {
      throw ConfigError(std::string(flag) + " does not apply to model '" + model_tag(cfg.model) +
                        "'");
    }
  };
  apply("--mu", [&](auto& m) {
    if constexpr (requires { m.mu; }) {
      m.mu = f.mu;
      return true;
    }
    return false;
  });
  apply("--sigma", [&](auto& m) {
    if constexpr (requires { m.sigma; }) {
      m.sigma = f.sigma;
      return true;
    }
    return false;
  });
  apply("--c", [&](auto& m) {
    if constexpr (requires { m.c; }) {
      m.c = f.c;
      return true;
    }
    return false;
  });
  apply("--lambda", [&](auto& m) {
    if constexpr (requires { m.lambda; }) {
      m.lambda = f.lambda;
      return true;
    }
    return false;
  });
  apply("--claim-rate", [&](auto& m) {
    if constexpr (requires { m.claim_rate; }) {
      m.claim_rate = f.claim_rate;
      return true;
    }
    return false;
  });
}

RunConfig merge(const Flags& f, const CLI::App& sub) {
  const auto given = [&](const char* name) { return sub.get_option(name)->count() > 0; };
  RunConfig cfg;
  if (!f.config_file.empty()) {
    cfg = parse_config(read_file(f.config_file));
  }
  cfg.command = sub.get_name();
  if (!f.model_file.empty()) {
    cfg.model = model_from_json(parse_json(read_file(f.model_file), f.model_file), "model");
  }
  if (!f.profile_file.empty()) {
    cfg.profile =
        profile_from_json(parse_json(read_file(f.profile_file), f.profile_file), "profile");
  }
  apply_model_flags(cfg, f, sub);
  if (given("--gamma")) cfg.profile = ConstantTax{f.gamma};
  if (given("--q")) cfg.q = f.q;
  if (given("--x")) cfg.x = f.x;
  if (given("--a")) cfg.a = f.a;
  if (given("--alpha")) cfg.alpha = f.alpha;
  if (given("--beta")) cfg.beta = f.beta;
  if (given("--theta")) cfg.theta = f.theta;
  if (given("--y")) cfg.y = f.y;
  if (given("--z")) cfg.z = f.z;
  if (given("--n-paths")) cfg.mc.n_paths = f.n_paths;
  if (given("--seed")) cfg.mc.seed = f.seed;
  if (given("--time-step")) cfg.mc.time_step = f.time_step;
  if (given("--horizon")) cfg.mc.horizon = f.horizon;
  if (given("--threads")) cfg.mc.threads = f.threads;
  if (given("--out")) cfg.output_path = f.out;
  if (given("--grid")) cfg.grid = parse_grid(f.grid);
  return cfg;
}

}  // namespace

std::string dump_config(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["model"] = model_to_json(c.model);
  j["profile"] = profile_to_json(c.profile);
  j["q"] = c.q;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  const auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) {
      j[key] = *v;
    }
  };
  put("x", c.x);
  put("a", c.a);
  put("theta", c.theta);
  put("y", c.y);
  put("z", c.z);
  j["quad"] = quad_to_json(c.quad);
  j["mc"] = mc_to_json(c.mc);
  j["output_path"] = c.output_path;
  if (c.grid) {
    j["grid"] = {{"param", c.grid->param},
                 {"from", c.grid->from},
                 {"to", c.grid->to},
                 {"points", c.grid->points}};
  }
  return j.dump(2) + "\n";
}

RunConfig parse_config(std::string_view text_in) {
  const json j = parse_json(text_in, "config");
  check_keys(j,
             {"command", "model", "profile", "q", "x", "a", "alpha", "beta", "theta", "y", "z",
              "quad", "mc", "output_path", "grid"},
             "");
  RunConfig c;
  c.command = text(j, "command", "");
  if (!c.command.empty() &&
      std::find(commands().begin(), commands().end(), c.command) == commands().end()) {
    throw ConfigError("command '" + c.command + "' is not a known subcommand");
  }
  if (j.contains("model")) c.model = model_from_json(j.at("model"), "model");
  if (j.contains("profile")) c.profile = profile_from_json(j.at("profile"), "profile");
  c.q = number(j, "q", "", 0.0);
  c.alpha = number(j, "alpha", "", 0.0);
  c.beta = number(j, "beta", "", 0.0);
  c.x = maybe_number(j, "x", "");
  c.a = maybe_number(j, "a", "");
  c.theta = maybe_number(j, "theta", "");
  c.y = maybe_number(j, "y", "");
  c.z = maybe_number(j, "z", "");
  if (j.contains("quad")) c.quad = quad_from_json(j.at("quad"));
  if (j.contains("mc")) c.mc = mc_from_json(j.at("mc"));
  c.output_path = text(j, "output_path", "");
  if (j.contains("grid") && !j.at("grid").is_null()) {
    const json& g = j.at("grid");
    check_keys(g, {"param", "from", "to", "points"}, "grid");
    GridSpec spec;
    spec.param = text(g, "param", "grid");
    spec.from = number(g, "from", "grid", 0.0);
    spec.to = number(g, "to", "grid", 0.0);
    spec.points = integer(g, "points", "grid", 1);
    if (spec.points < 1) {
      throw ConfigError("grid.points must be >= 1");
    }
    RunConfig probe;
    set_param(probe, spec.param, 0.0);
    c.grid = spec;
  }
  return c;
}

LevyModel parse_model(std::string_view text_in) {
  return model_from_json(parse_json(text_in, "model"), "model");
}

TaxProfile parse_profile(std::string_view text_in) {
  return profile_from_json(parse_json(text_in, "profile"), "profile");
}

GridSpec parse_grid(std::string_view spec) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : spec) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  if (parts.size() != 4 || parts[0].empty()) {
    throw ConfigError("--grid must look like param:from:to:points");
  }
  GridSpec g;
  g.param = parts[0];
  try {
    std::size_t used = 0;
    g.from = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("from");
    g.to = std::stod(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("to");
    g.points = std::stoi(parts[3], &used);
    if (used != parts[3].size()) throw std::invalid_argument("points");
  } catch (const std::exception&) {
    throw ConfigError("--grid must look like param:from:to:points with numeric bounds");
  }
  if (g.points < 1) {
    throw ConfigError("--grid points must be >= 1");
  }
  RunConfig probe;
  set_param(probe, g.param, 0.0);
  return g;
}

void execute(const RunConfig& config, std::ostream& out) {
  config.quad.validate();
  config.mc.validate();
  Csv csv(out);
  if (!config.grid) {
    execute_one(config, csv);
    return;
  }
  const GridSpec& g = *config.grid;
  for (int i = 0; i < g.points; ++i) {
    RunConfig point = config;
    const double v = g.points == 1 ? g.from
                                   : g.from + (g.to - g.from) * i / static_cast<double>(g.points - 1);
    set_param(point, g.param, v);
    execute_one(point, csv);
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tax-adjusted spectrally negative Levy process toolkit"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<const char*, const char*>> subs = {
      {"scale", "scale functions W, W' and Z"},
      {"exit-up", "two-sided exit upwards"},
      {"exit-down", "two-sided exit downwards (ruin before a)"},
      {"ruin", "Laplace transform of the ruin time (a* infinite)"},
      {"npv", "net present value of tax paid until ruin"},
      {"creep", "type-II creeping test and Laplace transform"},
      {"triple-law", "joint density of A, undershoot and overshoot at ruin"},
      {"simulate", "Monte Carlo estimates"},
      {"verify", "formula vs Monte Carlo on the built-in suite"}};
  for (const auto& [name, help] : subs) {
    add_flags(*app.add_subcommand(name, help), flags);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    const RunConfig cfg = merge(flags, *sub);
    std::ofstream file;
    std::ostream* sink = &out;
    if (!cfg.output_path.empty()) {
      file.open(cfg.output_path);
      if (!file) {
        throw ConfigError("cannot write output_path '" + cfg.output_path + "'");
      }
      sink = &file;
    }
    if (flags.dump) {
      *sink << dump_config(cfg);
      return 0;
    }
    execute(cfg, *sink);
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const AccuracyError& e) {
    err << "accuracy error: " << e.what() << " (estimate " << num(e.estimate()) << ", error "
        << num(e.error_estimate()) << ")\n";
    return 3;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return 4;
  } catch (const UnsupportedError& e) {
    err << "domain error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace taxlevy::cli
