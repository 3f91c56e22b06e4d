#include "rfet/stackelberg.hpp"

#include <cmath>

#include "rfet/errors.hpp"
#include "rfet/solver.hpp"

namespace rfet {

double best_response(double lambda, EapType theta) {
  if (!(lambda >= 0.0)) throw DomainError("price must be nonnegative");
  return theta.value() * lambda / 2.0;
}

double complete_information_price(double theta_sum, double gamma,
                                  double bandwidth_w) {
  if (!(theta_sum > 0.0) || !(gamma > 0.0) || !(bandwidth_w > 0.0)) {
    throw DomainError("price needs positive type mass, gamma and bandwidth");
  }
  const double s = std::sqrt(kLog2E * gamma * gamma * bandwidth_w * theta_sum + 1.0);
  return kLog2E * gamma * bandwidth_w / (s + 1.0);
}

StackelbergOutcome solve_complete(std::span<const double> realized_thetas,
                                  const Market& market) {
  if (realized_thetas.empty()) throw DomainError("no EAPs in the realization");
  StackelbergOutcome out;
  out.thetas.assign(realized_thetas.begin(), realized_thetas.end());
  double theta_sum = 0.0;
  for (double t : out.thetas) theta_sum += EapType(t).value();

  const double lambda =
      complete_information_price(theta_sum, market.gamma(), market.bandwidth());
  out.lambda_star = lambda;
  double total_q = 0.0;
  double cost = 0.0;
  for (double t : out.thetas) {
    const double q = best_response(lambda, EapType(t));
    out.q_star.push_back(q);
    out.eap_utilities.push_back(eap_utility_stackelberg(lambda, q, EapType(t)));
    total_q += q;
    cost += q * q / t;
  }
  const double value = throughput(market.gamma(), total_q, market.bandwidth());
  out.dap_utility = value - lambda * total_q;
  out.welfare = value - cost;
  return out;
}

StackelbergOutcome solve_complete_counts(std::span<const int> counts,
                                         const Market& market) {
  if (counts.size() != market.num_types()) {
    throw DomainError("counts length differs from the number of types");
  }
  std::vector<double> thetas;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 0) throw DomainError("counts must be nonnegative");
    thetas.insert(thetas.end(), counts[k], market.theta(k));
  }
  return solve_complete(thetas, market);
}

StackelbergOutcome solve_asymmetric(const Market& market,
                                    AsymmetricPriceRule rule,
                                    std::uint64_t enumeration_cap) {
  const CompositionTable table(market.n_eaps(),
                               static_cast<int>(market.num_types()),
                               enumeration_cap);
  return solve_asymmetric(market, table, rule);
}

StackelbergOutcome solve_asymmetric(const Market& market,
                                    const CompositionTable& table,
                                    AsymmetricPriceRule rule) {
  if (table.n() != market.n_eaps() ||
      static_cast<std::size_t>(table.k()) != market.num_types()) {
    throw DomainError("composition table does not match the market");
  }
  const double gamma = market.gamma();
  const double bw = market.bandwidth();
  const double c = bw * kLog2E * gamma;

  // Total type mass of each composition.
  std::vector<double> mass(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto n = table.counts(i);
    double t = 0.0;
    for (std::size_t k = 0; k < n.size(); ++k) t += n[k] * market.theta(k);
    mass[i] = t;
  }
  auto expect_over = [&](auto&& f) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < table.size(); ++i) acc.add(table.prob(i) * f(mass[i]));
    return acc.value();
  };
  const double mean_mass = expect_over([](double t) { return t; });

  // Both rules satisfy g(0) = -c/2 < 0 and g(c/2) > 0 because the weighted
  // average of 1/(2 + gamma lambda T) is below 1/2 for lambda > 0.
  auto g = [&](double lambda) {
    if (rule == AsymmetricPriceRule::kExpectedUtilityOptimal) {
      const double w = expect_over(
          [&](double t) { return t / (2.0 + gamma * lambda * t); });
      return lambda - c * w / mean_mass;
    }
    return lambda - c * expect_over([&](double t) { return 1.0 / (2.0 + gamma * lambda * t); });
  };
  const double hi = c / 2.0;
  const double lambda = bisect_root(g, 0.0, hi, 1e-15 * hi);

  StackelbergOutcome out;
  out.expected = true;
  out.lambda_star = lambda;
  out.thetas.assign(market.thetas().begin(), market.thetas().end());
  for (double t : out.thetas) {
    const double q = best_response(lambda, EapType(t));
    out.q_star.push_back(q);
    out.eap_utilities.push_back(eap_utility_stackelberg(lambda, q, EapType(t)));
  }
  out.dap_utility = expect_over([&](double t) {
    return bw * kLog2E * std::log1p(gamma * lambda * t / 2.0) - lambda * lambda * t / 2.0;
  });
  out.welfare = expect_over([&](double t) {
    return bw * kLog2E * std::log1p(gamma * lambda * t / 2.0) - lambda * lambda * t / 4.0;
  });
  return out;
}

RealizedOutcome evaluate_realization(const StackelbergOutcome& outcome,
                                     std::span<const int> counts,
                                     const Market& market) {
  if (counts.size() != market.num_types()) {
    throw DomainError("counts length differs from the number of types");
  }
  const double lambda = outcome.lambda_star;
  std::vector<double> q(market.num_types());
  double total_q = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    q[k] = best_response(lambda, EapType(market.theta(k)));
    total_q += counts[k] * q[k];
  }
  RealizedOutcome r;
  r.welfare = social_welfare(counts, q, market);
  r.dap_utility =
      throughput(market.gamma(), total_q, market.bandwidth()) - lambda * total_q;
  return r;
}

ExpectedLogQuadratic expected_leader_objective(const Market& market,
                                               const CompositionTable& table) {
  const std::size_t k_types = market.num_types();
  ExpectedLogQuadratic f(k_types, market.bandwidth(), market.gamma() / 2.0);
  std::vector<double> a(k_types), b(k_types);
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto n = table.counts(i);
    for (std::size_t k = 0; k < k_types; ++k) {
      a[k] = n[k] * market.theta(k);
      b[k] = 0.5 * a[k];
    }
    f.add_term(table.prob(i), a, b);
  }
  return f;
}

}  // namespace rfet
