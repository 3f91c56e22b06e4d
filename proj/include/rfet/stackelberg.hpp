#pragma once

// Leader-follower pricing: the leader posts a price per unit of received
// energy, each EAP best-responds with q = theta * lambda / 2.
//
// Under complete information the leader sees the realized types and the
// optimal price has a closed form. Under asymmetric information it only
// knows the type set and the uniform prior, and posts one price that
// maximizes its expected utility over all type compositions.

#include <cstdint>
#include <span>
#include <vector>

#include "rfet/combinatorics.hpp"
#include "rfet/model.hpp"
#include "rfet/objectives.hpp"

namespace rfet {

enum class AsymmetricPriceRule {
  /// Stationary point of the expected leader utility at a common price:
  /// lambda * E[T] = W log2(e) gamma E[T / (2 + gamma lambda T)],
  /// T = sum_k n_k theta_k.
  kExpectedUtilityOptimal,
  /// lambda = W log2(e) gamma E[1 / (2 + gamma lambda T)], which drops the
  /// T weight inside the expectation. Kept for comparison runs only.
  kUnweightedFixedPoint,
};

struct StackelbergOutcome {
  double lambda_star = 0.0;
  /// Per-EAP types (complete information) or the market's type set
  /// (asymmetric information).
  std::vector<double> thetas;
  std::vector<double> q_star;
  /// Realized utility (complete) or expectation over compositions
  /// (asymmetric).
  double dap_utility = 0.0;
  std::vector<double> eap_utilities;
  double welfare = 0.0;
  bool expected = false;
};

struct RealizedOutcome {
  double dap_utility = 0.0;
  double welfare = 0.0;
};

/// theta * lambda / 2.
double best_response(double lambda, EapType theta);

/// Closed-form complete-information price for total type mass theta_sum,
/// written in the cancellation-free form
///   W log2(e) gamma / (sqrt(log2(e) gamma^2 W theta_sum + 1) + 1).
double complete_information_price(double theta_sum, double gamma,
                                  double bandwidth_w);

StackelbergOutcome solve_complete(std::span<const double> realized_thetas,
                                  const Market& market);

/// Convenience overload: n_k EAPs of each market type.
StackelbergOutcome solve_complete_counts(std::span<const int> counts,
                                         const Market& market);

StackelbergOutcome solve_asymmetric(
    const Market& market,
    AsymmetricPriceRule rule = AsymmetricPriceRule::kExpectedUtilityOptimal,
    std::uint64_t enumeration_cap = kDefaultEnumerationCap);

StackelbergOutcome solve_asymmetric(
    const Market& market, const CompositionTable& table,
    AsymmetricPriceRule rule = AsymmetricPriceRule::kExpectedUtilityOptimal);

/// Leader utility and welfare when the outcome's price is applied to a
/// realized composition; every EAP best-responds to lambda_star.
RealizedOutcome evaluate_realization(const StackelbergOutcome& outcome,
                                     std::span<const int> counts,
                                     const Market& market);

/// Expected leader utility with per-type prices lambda_k, after substituting
/// the best responses:
///   sum_c Phi_c [W log2(1 + gamma/2 sum n_k theta_k lambda_k)
///                - 1/2 sum n_k theta_k lambda_k^2].
ExpectedLogQuadratic expected_leader_objective(const Market& market,
                                               const CompositionTable& table);

}  // namespace rfet
