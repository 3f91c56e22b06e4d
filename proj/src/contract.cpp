#include "rfet/contract.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "rfet/errors.hpp"

namespace rfet {
namespace {

void require_ascending(std::span<const double> thetas) {
  if (thetas.empty()) throw DomainError("no types");
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    if (!(thetas[k] > 0.0)) throw DomainError("types must be positive");
    if (k > 0 && !(thetas[k - 1] < thetas[k])) {
      throw DomainError("types must be strictly increasing");
    }
  }
}

void require_table(const Market& market, const CompositionTable& table) {
  if (table.n() != market.n_eaps() ||
      static_cast<std::size_t>(table.k()) != market.num_types()) {
    throw DomainError("composition table does not match the market");
  }
}

SolveReport solve_or_throw(const ConcaveProblem& problem, std::size_t dim,
                           const SolveOptions& opts, const char* what) {
  SolveReport report = maximize_concave_nonneg(problem, std::vector<double>(dim, 0.0), opts);
  if (!report.converged) {
    throw SolverError(std::string(what) + " did not converge: KKT residual " +
                      std::to_string(report.kkt_residual) + " after " +
                      std::to_string(report.iterations) + " iterations");
  }
  return report;
}

}  // namespace

FeasibilityReport check_feasibility(const ContractMenu& menu, const Market& market,
                                    double tol) {
  return check_feasibility(menu, market.thetas(), tol);
}

FeasibilityReport check_feasibility(const ContractMenu& menu,
                                    std::span<const double> thetas, double tol) {
  if (menu.size() != thetas.size()) {
    throw DomainError("menu has " + std::to_string(menu.size()) + " items for " +
                      std::to_string(thetas.size()) + " types");
  }
  FeasibilityReport r;
  r.ir_margin = std::numeric_limits<double>::infinity();
  r.ic_margin = std::numeric_limits<double>::infinity();
  const std::size_t k_types = menu.size();
  for (std::size_t k = 0; k < k_types; ++k) {
    const EapType type(thetas[k]);
    const double own = eap_utility_contract(menu[k], type);
    if (own < r.ir_margin) {
      r.ir_margin = own;
      r.ir_worst_type = k;
    }
    for (std::size_t j = 0; j < k_types; ++j) {
      if (j == k) continue;
      const double margin = own - eap_utility_contract(menu[j], type);
      if (margin < r.ic_margin) {
        r.ic_margin = margin;
        r.ic_worst_type = k;
        r.ic_worst_item = j;
      }
    }
    if (k > 0 && thetas[k] >= thetas[k - 1] && menu[k].pi < menu[k - 1].pi - tol) {
      r.monotone_ok = false;
    }
  }
  if (k_types == 1) r.ic_margin = 0.0;
  r.ir_ok = r.ir_margin >= -tol;
  r.ic_ok = r.ic_margin >= -tol;
  return r;
}

std::vector<double> recover_rewards(std::span<const double> q,
                                    std::span<const double> thetas) {
  if (q.size() != thetas.size()) throw DomainError("powers and types differ in length");
  require_ascending(thetas);
  std::vector<double> pi(q.size());
  double rent = 0.0;  // sum_{n=2..k} (1/theta_{n-1} - 1/theta_n) q_{n-1}^2
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (!(q[k] >= 0.0)) throw DomainError("powers must be nonnegative");
    if (k > 0) rent += (1.0 / thetas[k - 1] - 1.0 / thetas[k]) * q[k - 1] * q[k - 1];
    pi[k] = q[k] * q[k] / thetas[k] + rent;
  }
  return pi;
}

ExpectedLogQuadratic contract_objective(const Market& market,
                                        const CompositionTable& table) {
  require_table(market, table);
  const std::size_t k_types = market.num_types();
  ExpectedLogQuadratic f(k_types, market.bandwidth(), market.gamma());
  std::vector<double> a(k_types), b(k_types);
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto n = table.counts(i);
    int tail = 0;  // S_{k+1}
    for (std::size_t k = k_types; k-- > 0;) {
      const int s_k = tail + n[k];
      a[k] = n[k];
      b[k] = s_k / market.theta(k) -
             (k + 1 < k_types ? tail / market.theta(k + 1) : 0.0);
      assert(b[k] >= 0.0 && "reduced contract objective lost concavity");
      tail = s_k;
    }
    f.add_term(table.prob(i), a, b);
  }
  return f;
}

ExpectedLogQuadratic centralized_objective(const Market& market,
                                           const CompositionTable& table) {
  require_table(market, table);
  const std::size_t k_types = market.num_types();
  ExpectedLogQuadratic f(k_types, market.bandwidth(), market.gamma());
  std::vector<double> a(k_types), b(k_types);
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto n = table.counts(i);
    for (std::size_t k = 0; k < k_types; ++k) {
      a[k] = n[k];
      b[k] = n[k] / market.theta(k);
    }
    f.add_term(table.prob(i), a, b);
  }
  return f;
}

double expected_dap_utility(const ContractMenu& menu, const Market& market,
                            const CompositionTable& table) {
  require_table(market, table);
  return table.expect([&](std::span<const int> n) {
    return dap_utility_contract(n, menu, market);
  });
}

double expected_welfare(std::span<const double> q, const Market& market,
                        const CompositionTable& table) {
  require_table(market, table);
  return table.expect([&](std::span<const int> n) { return social_welfare(n, q, market); });
}

ContractSolution solve_contract(const Market& market, const SolveOptions& opts,
                                std::uint64_t enumeration_cap) {
  const CompositionTable table(market.n_eaps(), static_cast<int>(market.num_types()),
                               enumeration_cap);
  return solve_contract(market, table, opts);
}

ContractSolution solve_contract(const Market& market, const CompositionTable& table,
                                const SolveOptions& opts) {
  const ExpectedLogQuadratic objective = contract_objective(market, table);
  const std::size_t k_types = market.num_types();

  ContractSolution sol;
  sol.solve = solve_or_throw(on_monotone_cone(objective.problem()), k_types, opts,
                             "contract solve");
  const std::vector<double> increments = sol.solve.x_star;
  const std::vector<double> q = cone_point(increments);
  for (std::size_t k = 1; k < k_types; ++k) {
    if (increments[k] == 0.0) sol.pooled.push_back(k - 1);
  }

  std::vector<double> pi = recover_rewards(q, market.thetas());
  // Pooled types get one shared item; the recursion only agrees to roundoff.
  for (std::size_t k : sol.pooled) pi[k + 1] = pi[k];
  sol.menu = ContractMenu(q, pi);
  const FeasibilityReport audit = check_feasibility(sol.menu, market);
  if (!audit.monotone_ok) {
    throw FeasibilityError("contract rewards are not monotone in type");
  }
  if (!audit.ir_ok || !audit.ic_ok) {
    throw FeasibilityError("contract menu fails IR/IC audit: IR margin " +
                           std::to_string(audit.ir_margin) + ", IC margin " +
                           std::to_string(audit.ic_margin));
  }
  sol.expected_dap_utility = expected_dap_utility(sol.menu, market, table);
  sol.expected_welfare = expected_welfare(q, market, table);
  return sol;
}

ContractSolution solve_centralized(const Market& market, const SolveOptions& opts,
                                   std::uint64_t enumeration_cap) {
  const CompositionTable table(market.n_eaps(), static_cast<int>(market.num_types()),
                               enumeration_cap);
  return solve_centralized(market, table, opts);
}

ContractSolution solve_centralized(const Market& market, const CompositionTable& table,
                                   const SolveOptions& opts) {
  const ExpectedLogQuadratic objective = centralized_objective(market, table);
  const std::size_t k_types = market.num_types();

  ContractSolution sol;
  sol.solve = solve_or_throw(objective.problem(), k_types, opts, "centralized solve");
  const std::vector<double>& q = sol.solve.x_star;
  std::vector<double> pi(k_types);
  for (std::size_t k = 0; k < k_types; ++k) pi[k] = q[k] * q[k] / market.theta(k);
  sol.menu = ContractMenu(q, pi);
  sol.expected_dap_utility = expected_dap_utility(sol.menu, market, table);
  sol.expected_welfare = expected_welfare(q, market, table);
  return sol;
}

std::vector<double> ic_profile(const ContractMenu& menu, EapType theta) {
  std::vector<double> out;
  out.reserve(menu.size());
  for (const auto& item : menu.items()) out.push_back(eap_utility_contract(item, theta));
  return out;
}

bool peaks_at(std::span<const double> profile, std::size_t own) {
  if (own >= profile.size()) throw DomainError("item index outside the menu");
  double scale = 1.0;
  for (double u : profile) scale = std::max(scale, std::fabs(u));
  const double tie = 1e-12 * scale;
  const double mine = profile[own];
  return std::all_of(profile.begin(), profile.end(),
                     [&](double u) { return mine >= u - tie; });
}

}  // namespace rfet
