// Command line front end for the netmarket library.
//
// Subcommands: solve, welfare-curve, transition, pmp, verify.  Every
// subcommand accepts --config FILE with key=value pairs; explicit flags
// override file values.  Exit codes: 0 success, 1 verification failure,
// 2 invalid input, 3 internal numerical error.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "netmarket/cli.hpp"
#include "netmarket/config.hpp"

namespace {

using netmarket::RunConfig;

/// Flags recognised in config files, applied before flag overrides.
void apply_config_file(const std::string& path, RunConfig& cfg) {
  const auto kv = netmarket::parse_config_file(path);
  static const char* known[] = {"gamma", "beta",   "lambda", "a",    "theta",
                                "a_min", "a_max",  "a_steps", "seed", "out"};
  for (const auto& [key, value] : kv) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) {
      throw netmarket::config_error("unknown config key '" + key + "'");
    }
    (void)value;
  }
  cfg.gamma = netmarket::config_double(kv, "gamma", cfg.gamma);
  cfg.beta = netmarket::config_double(kv, "beta", cfg.beta);
  cfg.lambda = netmarket::config_double(kv, "lambda", cfg.lambda);
  cfg.a = netmarket::config_double(kv, "a", cfg.a);
  cfg.theta = netmarket::config_double(kv, "theta", cfg.theta);
  cfg.a_min = netmarket::config_double(kv, "a_min", cfg.a_min);
  cfg.a_max = netmarket::config_double(kv, "a_max", cfg.a_max);
  cfg.a_steps = static_cast<std::size_t>(
      netmarket::config_int(kv, "a_steps", static_cast<long long>(cfg.a_steps)));
  cfg.seed = static_cast<std::uint64_t>(
      netmarket::config_int(kv, "seed", static_cast<long long>(cfg.seed)));
  if (auto it = kv.find("out"); it != kv.end()) cfg.out_csv = it->second;
}

/// Registers the options shared by all subcommands and returns the
/// config-file option so the caller can order the merge correctly.
struct CommonOpts {
  std::string config_path;
  CLI::Option* config_opt;
};

CommonOpts add_common(CLI::App* cmd, RunConfig& cfg) {
  CommonOpts common;
  common.config_opt =
      cmd->add_option("--config", common.config_path, "key=value config file");
  cmd->add_option("--gamma", cfg.gamma, "consumer type tail exponent (> 2)");
  cmd->add_option("--beta", cfg.beta, "provider type tail exponent (> 2)");
  cmd->add_option("--lambda", cfg.lambda, "provider value per unit speed");
  cmd->add_option("--theta", cfg.theta, "consumer value curve exponent in (0,1)");
  cmd->add_option("--out", cfg.out_csv, "CSV output path (default stdout)");
  cmd->add_option("--svg", cfg.out_svg, "SVG chart output path");
  return common;
}

/// Applies the config file, then re-applies any explicitly passed flags on
/// top of it (CLI11 has already stored flag values into cfg, so we capture
/// them first and restore the ones the user actually set).
template <typename Fn>
int run_merged(CLI::App* cmd, const CommonOpts& common, RunConfig& cfg,
               std::ostream& err, Fn&& body) {
  if (common.config_opt->count() > 0) {
    const RunConfig from_flags = cfg;
    try {
      apply_config_file(common.config_path, cfg);
    } catch (const netmarket::error& e) {
      err << "error: " << e.what() << '\n';
      return netmarket::kExitBadInput;
    }
    auto keep = [&](const char* flag, auto RunConfig::* member) {
      const CLI::Option* opt = cmd->get_option_no_throw(flag);
      if (opt != nullptr && opt->count() > 0) cfg.*member = from_flags.*member;
    };
    keep("--gamma", &RunConfig::gamma);
    keep("--beta", &RunConfig::beta);
    keep("--lambda", &RunConfig::lambda);
    keep("--a", &RunConfig::a);
    keep("--theta", &RunConfig::theta);
    keep("--a-min", &RunConfig::a_min);
    keep("--a-max", &RunConfig::a_max);
    keep("--a-steps", &RunConfig::a_steps);
    keep("--seed", &RunConfig::seed);
    keep("--out", &RunConfig::out_csv);
  }
  return body();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-sided bandwidth market pricing toolkit"};
  app.require_subcommand(1);

  RunConfig cfg;
  int exit_code = netmarket::kExitOk;

  // solve
  CLI::App* solve = app.add_subcommand(
      "solve", "solve one pricing problem (revenue, social, or revenue-c0)");
  CommonOpts solve_common = add_common(solve, cfg);
  solve->add_option("--a", cfg.a, "provider-side cost per unit type");
  solve->add_option("--mode", cfg.mode,
                    "objective: revenue | social | revenue-c0");
  solve->callback([&] {
    exit_code = run_merged(solve, solve_common, cfg, std::cerr, [&] {
      return netmarket::cmd_solve(cfg, std::cout, std::cerr);
    });
  });

  // welfare-curve
  CLI::App* curve = app.add_subcommand(
      "welfare-curve", "sweep the cost a and tabulate welfare under three fee policies");
  CommonOpts curve_common = add_common(curve, cfg);
  curve->add_option("--a-min", cfg.a_min, "sweep start (default 1.01 * zeta)");
  curve->add_option("--a-max", cfg.a_max, "sweep end (default 2.5 * zeta)");
  curve->add_option("--a-steps", cfg.a_steps, "number of sweep points (>= 2)");
  curve->callback([&] {
    exit_code = run_merged(curve, curve_common, cfg, std::cerr, [&] {
      return netmarket::cmd_welfare_curve(cfg, std::cout, std::cerr);
    });
  });

  // transition
  CLI::App* transition = app.add_subcommand(
      "transition", "locate the cost level where exclusion starts to hurt welfare");
  CommonOpts transition_common = add_common(transition, cfg);
  transition->callback([&] {
    exit_code = run_merged(transition, transition_common, cfg, std::cerr, [&] {
      return netmarket::cmd_transition(cfg, std::cout, std::cerr);
    });
  });

  // pmp
  CLI::App* pmp = app.add_subcommand(
      "pmp", "solve the two-channel (paid + free) capacity split problem");
  CommonOpts pmp_common = add_common(pmp, cfg);
  pmp->add_option("--gamma-list", cfg.gamma_list,
                  "scan these consumer exponents (overrides --gamma)")
      ->delimiter(',');
  pmp->add_option("--beta-list", cfg.beta_list,
                  "scan these provider exponents (overrides --beta)")
      ->delimiter(',');
  pmp->callback([&] {
    // The two-channel scans target the low-value regime, so the subcommand
    // ships its own lambda default; flags and config files still win.
    if (pmp->get_option_no_throw("--lambda")->count() == 0) cfg.lambda = 0.01;
    exit_code = run_merged(pmp, pmp_common, cfg, std::cerr, [&] {
      return netmarket::cmd_pmp(cfg, std::cout, std::cerr);
    });
  });

  // verify
  CLI::App* verify = app.add_subcommand(
      "verify", "re-derive the closed forms by quadrature, Monte Carlo and grid search");
  CommonOpts verify_common = add_common(verify, cfg);
  verify->add_option("--seed", cfg.seed, "RNG seed for the random check points");
  verify->add_option("--rel-tol", cfg.rel_tol, "relative tolerance for the checks");
  verify->add_option("--grid-x", cfg.grid_x, "grid resolution, consumer axis");
  verify->add_option("--grid-y", cfg.grid_y, "grid resolution, provider axis");
  verify->callback([&] {
    exit_code = run_merged(verify, verify_common, cfg, std::cerr, [&] {
      return netmarket::cmd_verify(cfg, std::cout, std::cerr);
    });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : netmarket::kExitBadInput;
  }
  return exit_code;
}
