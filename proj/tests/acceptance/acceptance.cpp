// Acceptance suite. Prints one PASS/FAIL line per criterion; with an
// argument, runs only that criterion. Exit status is nonzero when any
// criterion that ran failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rfet/combinatorics.hpp"
#include "rfet/contract.hpp"
#include "rfet/harness.hpp"
#include "rfet/scenario.hpp"
#include "rfet/solver.hpp"
#include "rfet/stackelberg.hpp"

using namespace rfet;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Worst KKT residual over every converged solve in the run.
double g_worst_kkt = 0.0;

void track(const SolveReport& r) {
  if (r.converged) g_worst_kkt = std::max(g_worst_kkt, r.kkt_residual);
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Market table_one_market(int n, int k, double gamma, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.n_eaps = n;
  cfg.n_types = k;
  cfg.gamma = gamma;
  TypeGenConfig gen;
  gen.seed = seed;
  cfg.type_gen = gen;
  return generate_market(cfg);
}

struct Welfare {
  double centralized, contract, complete, asym;
};

Welfare exact_welfare(const Market& m) {
  const CompositionTable table(m.n_eaps(), static_cast<int>(m.num_types()));
  const auto z = solve_centralized(m, table);
  const auto c = solve_contract(m, table);
  track(z.solve);
  track(c.solve);
  const double sc = table.expect(
      [&](std::span<const int> n) { return solve_complete_counts(n, m).welfare; });
  return {z.expected_welfare, c.expected_welfare, sc, solve_asymmetric(m, table).welfare};
}

// 1. Every type of a solved N=5, K=10 contract prefers its own item and gets
// nonnegative utility from it.
Outcome ic_self_selection() {
  Outcome o;
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Market m = table_one_market(5, 10, 2.2, seed);
    const auto c = solve_contract(m);
    track(c.solve);
    for (std::size_t k = 0; k < 10; ++k) {
      const auto profile = ic_profile(c.menu, EapType(m.theta(k)));
      ++checked;
      if (!peaks_at(profile, k) || profile[k] < 0.0) {
        o.pass = false;
        o.detail = "seed " + std::to_string(seed) + " type " + std::to_string(k + 1) +
                   " does not peak at its own item";
        return o;
      }
    }
  }
  o.detail = std::to_string(checked) + " type profiles over 10 markets peak at own item, own utility >= 0";
  return o;
}

// 2. centralized >= contract >= complete-information pricing >= one-price
// asymmetric pricing, exact expectations.
Outcome scheme_ordering() {
  Outcome o;
  double worst = INFINITY;
  std::string where;
  int markets = 0;
  auto check = [&](const Market& m, const std::string& tag) {
    const Welfare w = exact_welfare(m);
    ++markets;
    const double slack[3] = {w.centralized - w.contract, w.contract - w.complete,
                             w.complete - w.asym};
    for (int i = 0; i < 3; ++i) {
      if (slack[i] < worst) {
        worst = slack[i];
        where = tag + " link " + std::to_string(i + 1);
      }
    }
  };
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (double gamma : {0.5, 2.2, 5.0}) {
      check(table_one_market(2, 5, gamma, seed), "N=2 K=5 seed " + std::to_string(seed));
    }
  }
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (int n = 2; n <= 10; ++n) {
      check(table_one_market(n, 2, 2.2, seed), "K=2 N=" + std::to_string(n));
    }
  }
  o.pass = worst >= -1e-6;
  o.detail = std::to_string(markets) + " markets, min slack " + fmt("%.3g", worst) + " (" +
             where + ")";
  return o;
}

// 3. Normalized welfare thresholds over gamma in [0.5, 5], N=2, K=5,
// averaged over 20 markets per point.
Outcome gamma_thresholds() {
  Outcome o;
  std::string report;
  for (double gamma = 0.5; gamma <= 5.0 + 1e-9; gamma += 0.5) {
    double contract = 0.0, complete = 0.0, asym = 0.0;
    const int markets = 20;
    for (std::uint64_t seed = 1; seed <= markets; ++seed) {
      const Welfare w = exact_welfare(table_one_market(2, 5, gamma, seed));
      contract += w.contract / w.centralized / markets;
      complete += w.complete / w.centralized / markets;
      asym += w.asym / w.centralized / markets;
    }
    const bool low_end = gamma < 0.5 + 1e-9;
    bool ok = contract >= 0.80 && asym <= 0.60;
    if (low_end) ok = ok && complete <= 0.80;
    if (!ok) o.pass = false;
    if (low_end || !ok || gamma > 5.0 - 1e-9) {
      report += fmt(" g=%.1f:", gamma) + fmt(" contract %.3f", contract) +
                fmt(" complete %.3f", complete) + fmt(" asym %.3f", asym) + (ok ? "" : " [x]") +
                ";";
    }
  }
  o.detail = "targets contract>=0.80, complete<=0.80 at g=0.5, asym<=0.60;" + report;
  return o;
}

// 4. K=2, gamma=2.2: contract keeps >= 0.90 of centralized welfare at N=2,
// non-decreasing in N up to 10 within 0.02.
Outcome eap_count_threshold() {
  Outcome o;
  std::vector<double> ratio;
  const int markets = 20;
  for (int n = 2; n <= 10; ++n) {
    double r = 0.0;
    for (std::uint64_t seed = 1; seed <= markets; ++seed) {
      const Welfare w = exact_welfare(table_one_market(n, 2, 2.2, seed));
      r += w.contract / w.centralized / markets;
    }
    ratio.push_back(r);
  }
  o.pass = ratio.front() >= 0.90;
  for (std::size_t i = 1; i < ratio.size(); ++i) {
    if (ratio[i] < ratio[i - 1] - 0.02) o.pass = false;
  }
  o.detail = "contract normalized welfare N=2.." + std::to_string(1 + ratio.size()) + ":";
  for (double r : ratio) o.detail += fmt(" %.4f", r);
  return o;
}

// 5. In N (K=2, gamma=2.2): one-price asymmetric welfare non-increasing, the
// other three strictly increasing, per market with exact expectations.
Outcome eap_count_trend() {
  Outcome o;
  int asym_violations = 0, other_violations = 0, markets = 0;
  double worst_asym_rise = -INFINITY;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ++markets;
    Welfare prev{};
    for (int n = 2; n <= 10; ++n) {
      const Welfare w = exact_welfare(table_one_market(n, 2, 2.2, seed));
      if (n > 2) {
        worst_asym_rise = std::max(worst_asym_rise, w.asym - prev.asym);
        if (w.asym > prev.asym + 1e-6) ++asym_violations;
        if (!(w.centralized > prev.centralized) || !(w.contract > prev.contract) ||
            !(w.complete > prev.complete)) {
          ++other_violations;
        }
      }
      prev = w;
    }
  }
  o.pass = asym_violations == 0 && other_violations == 0;
  o.detail = std::to_string(markets) + " markets x 8 steps: asym rises in " +
             std::to_string(asym_violations) + " steps (largest rise " +
             fmt("%.4g", worst_asym_rise) + "), other schemes fail to increase in " +
             std::to_string(other_violations);
  return o;
}

// 6. Closed-form complete-information price vs numerical multi-price solve;
// per-EAP prices equal; the asymmetric analogue likewise.
Outcome closed_form_vs_numerical() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_match = 0.0, worst_spread = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + t % 5;
    const Market m = oracle::random_market(rng, n, 4, 0.5 + 4.5 * u(rng));
    std::vector<double> thetas(static_cast<std::size_t>(n));
    for (double& th : thetas) th = m.theta(static_cast<std::size_t>(4 * u(rng)) % 4);
    const double closed = solve_complete(thetas, m).lambda_star;
    ConcaveProblem p;
    p.dimension = thetas.size();
    p.evaluate = [&](std::span<const double> x, std::span<double> g) {
      return oracle::complete_leader_objective(x, thetas, m.gamma(), m.bandwidth(), g);
    };
    const auto r = maximize_concave_nonneg(p, std::vector<double>(thetas.size(), 0.0));
    track(r);
    if (!r.converged) o.pass = false;
    const auto [lo, hi] = std::minmax_element(r.x_star.begin(), r.x_star.end());
    worst_spread = std::max(worst_spread, (*hi - *lo) / *hi);
    for (double l : r.x_star) worst_match = std::max(worst_match, std::fabs(l / closed - 1.0));
  }
  double worst_asym = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Market m = oracle::random_market(rng, 2 + t % 3, 2 + t % 2, 0.5 + 4.5 * u(rng));
    ConcaveProblem p;
    p.dimension = static_cast<std::size_t>(m.n_eaps());
    p.evaluate = [&](std::span<const double> x, std::span<double> g) {
      return oracle::per_eap_leader_objective(x, m, g);
    };
    const auto r = maximize_concave_nonneg(p, std::vector<double>(p.dimension, 0.0));
    track(r);
    if (!r.converged) o.pass = false;
    const double lambda = solve_asymmetric(m).lambda_star;
    for (double l : r.x_star) worst_asym = std::max(worst_asym, std::fabs(l / lambda - 1.0));
  }
  o.pass = o.pass && worst_match <= 1e-6 && worst_spread <= 1e-6 && worst_asym <= 1e-6;
  o.detail = "100 complete-information instances: max rel gap " + fmt("%.2g", worst_match) +
             ", max price spread " + fmt("%.2g", worst_spread) +
             "; 20 asymmetric per-EAP solves: max rel gap " + fmt("%.2g", worst_asym);
  return o;
}

// 7. Brute force over the unreduced screening problem for N, K <= 3: a
// global grid at step 1e-2, then a 1e-3 grid around its best cell. Rewards
// at each grid point are the cheapest ones meeting every IR and IC
// inequality.
Outcome reduction_soundness() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_gap = 0.0, worst_coarse = 0.0, worst_excess = -INFINITY;
  int instances = 0;
  for (int n = 1; n <= 3; ++n) {
    for (int k = 1; k <= 3; ++k) {
      for (int rep = 0; rep < 2; ++rep) {
        const Market m = oracle::random_market(rng, n, k, 0.5 + 4.5 * u(rng));
        const auto c = solve_contract(m);
        track(c.solve);
        if (!check_feasibility(c.menu, m, 1e-8).feasible()) o.pass = false;
        double q_max = 0.0;
        for (double q : c.menu.powers()) q_max = std::max(q_max, q);
        const double box = std::ceil(1.5 * q_max * 100 + 5) / 100;
        const auto coarse = oracle::brute_force_contract(m, box, 1e-2);
        const auto bf = oracle::brute_force_contract_refined(m, box, 1e-2, 1e-3);
        worst_coarse = std::max(worst_coarse, c.expected_dap_utility - coarse.value);
        worst_gap = std::max(worst_gap, std::fabs(bf.value - c.expected_dap_utility));
        worst_excess = std::max(worst_excess, bf.value - c.expected_dap_utility);
        ++instances;
      }
    }
  }
  o.pass = o.pass && worst_gap <= 1e-3 && worst_excess <= 1e-9;
  o.detail = std::to_string(instances) + " markets: max |brute force - solved| " +
             fmt("%.3g", worst_gap) + " (1e-2 grid alone: " + fmt("%.3g", worst_coarse) +
             "), brute force better by at most " + fmt("%.3g", std::max(0.0, worst_excess)) +
             "; all menus pass the full audit";
  return o;
}

// 8. Finite-difference gradient checks and KKT residuals.
Outcome numerical_hygiene() {
  Outcome o;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst[3] = {0.0, 0.0, 0.0};
  for (int t = 0; t < 50; ++t) {
    const Market m = oracle::random_market(rng, 1 + t % 4, 1 + t % 5, 0.5 + 4.5 * u(rng));
    const CompositionTable table(m.n_eaps(), static_cast<int>(m.num_types()));
    std::vector<double> x(m.num_types());
    for (double& xi : x) xi = 0.01 + 2.0 * u(rng);
    const ExpectedLogQuadratic f[3] = {expected_leader_objective(m, table),
                                       contract_objective(m, table),
                                       centralized_objective(m, table)};
    for (int i = 0; i < 3; ++i) {
      worst[i] = std::max(worst[i], check_gradient(f[i].problem().evaluate, x, 1e-6));
    }
    track(solve_contract(m, table).solve);
    track(solve_centralized(m, table).solve);
    track(maximize_concave_nonneg(f[0].problem(), std::vector<double>(x.size(), 0.0)));
  }
  o.pass = worst[0] < 1e-5 && worst[1] < 1e-5 && worst[2] < 1e-5 && g_worst_kkt <= 1e-9;
  o.detail = "max FD deviation: per-type pricing " + fmt("%.2g", worst[0]) + ", contract " +
             fmt("%.2g", worst[1]) + ", centralized " + fmt("%.2g", worst[2]) +
             "; worst KKT residual " + fmt("%.2g", g_worst_kkt);
  return o;
}

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"IC self-selection", 5, ic_self_selection},
      {"scheme ordering", 60, scheme_ordering},
      {"normalized welfare vs gamma", 300, gamma_thresholds},
      {"normalized welfare vs N", 120, eap_count_threshold},
      {"welfare trend in N", 120, eap_count_trend},
      {"closed form vs numerical price", 30, closed_form_vs_numerical},
      {"reduction soundness", 120, reduction_soundness},
      {"numerical hygiene", 60, numerical_hygiene},
  };

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int c = std::atoi(argv[i]);
    if (c < 1 || c > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "usage: %s [criterion 1-%zu ...]\n", argv[0], criteria.size());
      return 2;
    }
    selected.push_back(c);
  }
  if (selected.empty()) {
    for (int c = 1; c <= static_cast<int>(criteria.size()); ++c) selected.push_back(c);
  }

  int failed = 0;
  for (int c : selected) {
    const Criterion& cr = criteria[static_cast<std::size_t>(c - 1)];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > cr.budget_s) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", cr.budget_s);
    }
    failed += !o.pass;
    std::printf("criterion %d %s: %s (%.2f s) %s\n", c, o.pass ? "PASS" : "FAIL", cr.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
