#ifndef TAXLEVY_CLI_HPP
#define TAXLEVY_CLI_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "taxlevy/levy_model.hpp"
#include "taxlevy/quadrature.hpp"
#include "taxlevy/simulate.hpp"
#include "taxlevy/tax_profile.hpp"

namespace taxlevy::cli {

/// Sweep of one scalar input over `points` evenly spaced values in [from, to].
struct GridSpec {
  std::string param;
  double from = 0.0;
  double to = 0.0;
  int points = 1;

  bool operator==(const GridSpec&) const = default;
};

struct RunConfig {
  std::string command;
  LevyModel model = BrownianDrift{};
  TaxProfile profile = ConstantTax{};
  double q = 0.0;
  std::optional<double> x;
  std::optional<double> a;
  double alpha = 0.0;
  double beta = 0.0;
  std::optional<double> theta;
  std::optional<double> y;
  std::optional<double> z;
  QuadratureConfig quad;
  McConfig mc;
  std::string output_path;
  std::optional<GridSpec> grid;

  bool operator==(const RunConfig&) const = default;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = {
      "scale", "exit-up", "exit-down", "ruin", "npv", "creep", "triple-law", "simulate", "verify"};
  return names;
}

/// JSON text of a config; parse_config(dump_config(c)) == c.
std::string dump_config(const RunConfig& config);

/// Parses a JSON config. Unknown keys and ill-typed values raise ConfigError.
RunConfig parse_config(std::string_view text);

LevyModel parse_model(std::string_view text);
TaxProfile parse_profile(std::string_view text);

/// "from:to:points" after "param:".
GridSpec parse_grid(std::string_view spec);

/// Executes the command of a complete config, writing CSV to `out`.
void execute(const RunConfig& config, std::ostream& out);

/// Entry point; returns 0 on success, 2 on config errors, 3 on accuracy
/// failures and 4 on domain errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace taxlevy::cli

#endif  // TAXLEVY_CLI_HPP
