#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rfet/contract.hpp"
#include "rfet/errors.hpp"
#include "rfet/harness.hpp"
#include "rfet/scenario.hpp"
#include "rfet/stackelberg.hpp"

namespace rfet::cli {
namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> mc_draws;
  bool exact = true;
  bool timing = false;
  unsigned workers = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Scenario JSON file")->required();
  cmd->add_option("--out", c.out, "Output CSV (default: stdout)");
  cmd->add_option("--seed", c.seed, "Monte Carlo seed, overrides the config");
  cmd->add_option("--mc-draws", c.mc_draws, "Monte Carlo draws, overrides the config");
  cmd->add_flag("--exact,!--no-exact", c.exact,
                "Also compute exact composition expectations when small enough");
  cmd->add_flag("--timing", c.timing, "Report per-scheme runtime (output not reproducible)");
  cmd->add_option("--workers", c.workers, "Monte Carlo worker threads (0: all cores)");
}

ScenarioConfig load(const Common& c) {
  ScenarioConfig cfg = load_scenario(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.mc_draws) cfg.mc_draws = *c.mc_draws;
  cfg.validate();
  return cfg;
}

RunOptions run_options(const Common& c) { return {c.exact, c.timing, c.workers}; }

// Writes to --out when given, else to the default stream.
void emit(const Common& c, std::ostream& fallback,
          const std::function<void(std::ostream&)>& write) {
  if (c.out.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(c.out, std::ios::binary);
  if (!file) throw ConfigError("cannot write " + c.out);
  write(file);
}

std::vector<Scheme> parse_schemes(const std::vector<std::string>& names) {
  std::vector<Scheme> out;
  for (const std::string& n : names) {
    if (n == "all") {
      for (Scheme s : all_schemes()) out.push_back(s);
    } else {
      out.push_back(parse_scheme(n));
    }
  }
  std::vector<Scheme> unique;
  for (Scheme s : out) {
    if (std::find(unique.begin(), unique.end(), s) == unique.end()) unique.push_back(s);
  }
  if (unique.empty()) throw ConfigError("no schemes requested");
  return unique;
}

int worst_code(const std::vector<ComparisonRow>& rows) {
  int code = 0;
  for (const ComparisonRow& r : rows) code = std::max(code, exit_code(r.status));
  return code;
}

void write_menu(std::ostream& os, const Market& market, const ContractMenu& menu) {
  os << "type,theta,q,pi,eap_utility\n";
  for (std::size_t k = 0; k < menu.size(); ++k) {
    const double u = eap_utility_contract(menu[k], EapType(market.theta(k)));
    os << k + 1 << ',' << format_number(market.theta(k)) << ',' << format_number(menu[k].q)
       << ',' << format_number(menu[k].pi) << ',' << format_number(u) << '\n';
  }
}

int solve(const Common& c, const std::string& scheme_name, std::int64_t draw,
          std::ostream& out, std::ostream& err) {
  const ScenarioConfig cfg = load(c);
  const Market market = generate_market(cfg);
  const Scheme scheme = parse_scheme(scheme_name);

  switch (scheme) {
    case Scheme::kContract:
    case Scheme::kCentralized: {
      const ContractSolution sol =
          scheme == Scheme::kContract ? solve_contract(market) : solve_centralized(market);
      emit(c, out, [&](std::ostream& os) { write_menu(os, market, sol.menu); });
      err << "expected_welfare " << format_number(sol.expected_welfare)
          << "\nexpected_dap_utility " << format_number(sol.expected_dap_utility)
          << "\nkkt_residual " << format_number(sol.solve.kkt_residual) << '\n';
      return 0;
    }
    case Scheme::kStackelbergAsym: {
      const StackelbergOutcome o = solve_asymmetric(market);
      emit(c, out, [&](std::ostream& os) {
        os << "type,theta,lambda,q,eap_utility\n";
        for (std::size_t k = 0; k < o.thetas.size(); ++k) {
          os << k + 1 << ',' << format_number(o.thetas[k]) << ','
             << format_number(o.lambda_star) << ',' << format_number(o.q_star[k]) << ','
             << format_number(o.eap_utilities[k]) << '\n';
        }
      });
      err << "expected_welfare " << format_number(o.welfare) << "\nexpected_dap_utility "
          << format_number(o.dap_utility) << '\n';
      return 0;
    }
    case Scheme::kStackelbergComplete: {
      // One realization: the types drawn for Monte Carlo draw `draw`.
      const int k_types = static_cast<int>(market.num_types());
      std::vector<int> types;
      std::vector<double> thetas;
      for (int i = 0; i < market.n_eaps(); ++i) {
        types.push_back(draw_type(cfg.seed, i, draw, k_types));
        thetas.push_back(market.theta(static_cast<std::size_t>(types.back())));
      }
      const StackelbergOutcome o = solve_complete(thetas, market);
      emit(c, out, [&](std::ostream& os) {
        os << "eap,type,theta,lambda,q,eap_utility\n";
        for (std::size_t i = 0; i < thetas.size(); ++i) {
          os << i + 1 << ',' << types[i] + 1 << ',' << format_number(thetas[i]) << ','
             << format_number(o.lambda_star) << ',' << format_number(o.q_star[i]) << ','
             << format_number(o.eap_utilities[i]) << '\n';
        }
      });
      err << "welfare " << format_number(o.welfare) << "\ndap_utility "
          << format_number(o.dap_utility) << '\n';
      return 0;
    }
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Incentive mechanisms for RF energy trading: contract, Stackelberg and "
               "centralized schemes"};
  app.require_subcommand(1);

  Common solve_opts;
  std::string solve_scheme;
  std::int64_t solve_draw = 0;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one scheme and print its menu or prices");
  solve_cmd->add_option("scheme", solve_scheme,
                        "contract | stackelberg-complete | stackelberg-asym | centralized")
      ->required();
  solve_cmd->add_option("--draw", solve_draw,
                        "Monte Carlo draw whose types stackelberg-complete is solved for");
  add_common(solve_cmd, solve_opts);

  Common sweep_opts;
  std::string sweep_param;
  std::vector<double> sweep_values;
  std::vector<std::string> sweep_schemes{"all"};
  auto* sweep_cmd = app.add_subcommand("sweep", "Compare schemes over a parameter grid");
  sweep_cmd->add_option("--param", sweep_param, "gamma | n")->required();
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated values")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--schemes", sweep_schemes, "Schemes or 'all'")->delimiter(',');
  add_common(sweep_cmd, sweep_opts);

  Common verify_opts;
  std::string verify_what;
  std::vector<int> probes;
  auto* verify_cmd = app.add_subcommand("verify", "Check incentive compatibility of the contract");
  verify_cmd->add_option("what", verify_what, "ic")->required()->check(CLI::IsMember({"ic"}));
  verify_cmd->add_option("--probes", probes, "1-based type indices")
      ->required()
      ->delimiter(',');
  add_common(verify_cmd, verify_opts);

  Common compare_opts;
  std::vector<std::string> compare_schemes{"all"};
  auto* compare_cmd = app.add_subcommand("compare", "Compare schemes on one scenario");
  compare_cmd->add_option("--schemes", compare_schemes, "Schemes or 'all'")->delimiter(',');
  add_common(compare_cmd, compare_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve_cmd) return solve(solve_opts, solve_scheme, solve_draw, out, err);

    if (*sweep_cmd) {
      const ScenarioConfig cfg = load(sweep_opts);
      const auto rows = sweep(cfg, parse_sweep_param(sweep_param), sweep_values,
                              parse_schemes(sweep_schemes), run_options(sweep_opts));
      emit(sweep_opts, out, [&](std::ostream& os) { write_comparison_csv(os, rows); });
      return worst_code(rows);
    }

    if (*compare_cmd) {
      const ScenarioConfig cfg = load(compare_opts);
      const auto rows =
          run_comparison(cfg, parse_schemes(compare_schemes), run_options(compare_opts));
      emit(compare_opts, out, [&](std::ostream& os) { write_comparison_csv(os, rows); });
      return worst_code(rows);
    }

    if (*verify_cmd) {
      const ScenarioConfig cfg = load(verify_opts);
      const IcProfile profile = emit_ic_profile(cfg, probes);
      emit(verify_opts, out, [&](std::ostream& os) { write_ic_profile_csv(os, profile); });
      for (int p : profile.violations) {
        err << "type " << p << " does not peak at its own item\n";
      }
      return profile.violations.empty() ? 0 : 4;
    }
  } catch (const FeasibilityError& e) {
    err << "feasibility violation: " << e.what() << '\n';
    return 4;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace rfet::cli
