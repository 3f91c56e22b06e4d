#pragma once

// Screening contracts. Under asymmetric information the leader offers one
// (q_k, pi_k) item per type and each EAP picks the item it likes best; the
// menu must be individually rational (IR) and incentive compatible (IC).
//
// The optimal menu is found on the reduced problem: IR binds for the lowest
// type, local downward IC binds between neighbours, and the rewards follow
// from q by the recursion in recover_rewards(). What is left is a concave
// problem in q over the monotone cone 0 <= q_1 <= ... <= q_K, which is the
// condition under which local IC implies global IC.
//
// The centralized benchmark knows every type, pays exactly the energy cost
// (pi_k = q_k^2 / theta_k) and therefore maximizes expected welfare.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rfet/combinatorics.hpp"
#include "rfet/model.hpp"
#include "rfet/objectives.hpp"
#include "rfet/solver.hpp"

namespace rfet {

inline constexpr double kFeasibilityTol = 1e-8;

struct FeasibilityReport {
  bool ir_ok = true;
  std::size_t ir_worst_type = 0;
  double ir_margin = 0.0;  // min_k pi_k - q_k^2 / theta_k

  bool ic_ok = true;
  std::size_t ic_worst_type = 0;  // k: the type tempted to deviate
  std::size_t ic_worst_item = 0;  // j: the item it is tempted by
  double ic_margin = 0.0;         // min_{k != j} U_k(item k) - U_k(item j)

  bool monotone_ok = true;  // pi nondecreasing in theta (within tol)

  bool feasible() const { return ir_ok && ic_ok && monotone_ok; }
};

struct ContractSolution {
  ContractMenu menu;
  double expected_dap_utility = 0.0;
  double expected_welfare = 0.0;
  SolveReport solve;
  /// k such that types k and k+1 receive the same item (0-based).
  std::vector<std::size_t> pooled;
};

/// Evaluates all K IR and K(K-1) IC inequalities explicitly.
FeasibilityReport check_feasibility(const ContractMenu& menu, const Market& market,
                                    double tol = kFeasibilityTol);
FeasibilityReport check_feasibility(const ContractMenu& menu,
                                    std::span<const double> thetas,
                                    double tol = kFeasibilityTol);

/// Rewards that make IR bind for the lowest type and every local downward
/// IC bind:
///   pi_k = q_k^2/theta_k + sum_{n=2..k} (1/theta_{n-1} - 1/theta_n) q_{n-1}^2.
std::vector<double> recover_rewards(std::span<const double> q,
                                    std::span<const double> thetas);

/// Expected leader utility of the optimal reduced problem, per composition
///   W log2(1 + gamma <n, q>)
///   - sum_{k<K} (S_k/theta_k - S_{k+1}/theta_{k+1}) q_k^2 - n_K q_K^2/theta_K
/// with S_k = n_k + ... + n_K.
ExpectedLogQuadratic contract_objective(const Market& market,
                                        const CompositionTable& table);

/// Expected welfare with per-type powers q (the centralized objective).
ExpectedLogQuadratic centralized_objective(const Market& market,
                                           const CompositionTable& table);

double expected_dap_utility(const ContractMenu& menu, const Market& market,
                            const CompositionTable& table);
double expected_welfare(std::span<const double> q, const Market& market,
                        const CompositionTable& table);

ContractSolution solve_contract(const Market& market, const SolveOptions& opts = {},
                                std::uint64_t enumeration_cap = kDefaultEnumerationCap);
ContractSolution solve_contract(const Market& market, const CompositionTable& table,
                                const SolveOptions& opts = {});

ContractSolution solve_centralized(const Market& market, const SolveOptions& opts = {},
                                   std::uint64_t enumeration_cap = kDefaultEnumerationCap);
ContractSolution solve_centralized(const Market& market, const CompositionTable& table,
                                   const SolveOptions& opts = {});

/// Utility a type-theta EAP would get from each item of the menu.
std::vector<double> ic_profile(const ContractMenu& menu, EapType theta);

/// True when profile[own] is a maximum of the profile. Values within
/// 1e-12 * max(1, max |profile|) of the maximum count as ties; binding local
/// IC makes each type exactly indifferent to the item just below its own.
bool peaks_at(std::span<const double> profile, std::size_t own);

}  // namespace rfet
