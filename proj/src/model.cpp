#include "rfet/model.hpp"

#include <cmath>
#include <string>

#include "rfet/errors.hpp"

namespace rfet {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

void require_lengths(std::size_t counts, std::size_t values, std::size_t types) {
  if (counts != types || values != types) {
    throw DomainError("length mismatch: counts=" + std::to_string(counts) +
                      " values=" + std::to_string(values) +
                      " types=" + std::to_string(types));
  }
}

}  // namespace

void PhysicalParams::validate() const {
  require(eta > 0.0 && eta < 1.0, "eta must lie in (0, 1)");
  require(bandwidth_w > 0.0, "bandwidth must be positive");
  require(noise_n0 > 0.0, "noise power must be positive");
  require(gain_das > 0.0, "source-to-DAP gain must be positive");
  require(unit_cost_c > 0.0, "unit cost must be positive");
}

double derive_gamma(const PhysicalParams& params) {
  params.validate();
  return params.eta * params.gain_das / params.noise_n0;
}

EapType::EapType(double theta) : theta_(theta) {
  require(std::isfinite(theta) && theta > 0.0, "type theta must be positive");
}

void EapPhysical::validate() const {
  require(cost_coeff_a > 0.0, "energy cost coefficient must be positive");
  require(gain_gms > 0.0, "EAP-to-source gain must be positive");
}

EapType EapPhysical::type() const {
  validate();
  return EapType(gain_gms * gain_gms / cost_coeff_a);
}

double EapPhysical::transmit_power(double received_q) const {
  validate();
  require(received_q >= 0.0, "received power must be nonnegative");
  return received_q / gain_gms;
}

ContractMenu::ContractMenu(std::vector<ContractItem> items)
    : items_(std::move(items)) {
  for (const auto& item : items_) {
    require(item.q >= 0.0 && item.pi >= 0.0,
            "contract items must have nonnegative power and reward");
  }
}

ContractMenu::ContractMenu(std::span<const double> q, std::span<const double> pi) {
  require(q.size() == pi.size(), "power and reward lists differ in length");
  std::vector<ContractItem> items;
  items.reserve(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) items.push_back({q[k], pi[k]});
  *this = ContractMenu(std::move(items));
}

std::vector<double> ContractMenu::powers() const {
  std::vector<double> out;
  out.reserve(items_.size());
  for (const auto& item : items_) out.push_back(item.q);
  return out;
}

std::vector<double> ContractMenu::rewards() const {
  std::vector<double> out;
  out.reserve(items_.size());
  for (const auto& item : items_) out.push_back(item.pi);
  return out;
}

PriceVector::PriceVector(std::vector<double> lambdas)
    : lambdas_(std::move(lambdas)) {
  for (double l : lambdas_) require(l >= 0.0, "prices must be nonnegative");
}

Market::Market(int n_eaps, std::vector<double> thetas, double gamma,
               double bandwidth_w)
    : n_eaps_(n_eaps),
      thetas_(std::move(thetas)),
      gamma_(gamma),
      bandwidth_w_(bandwidth_w) {
  require(n_eaps_ >= 1, "market needs at least one EAP");
  require(!thetas_.empty(), "market needs at least one type");
  for (std::size_t k = 0; k < thetas_.size(); ++k) {
    require(std::isfinite(thetas_[k]) && thetas_[k] > 0.0,
            "types must be positive");
    if (k > 0 && !(thetas_[k - 1] < thetas_[k])) {
      throw DomainError("types must be strictly increasing (index " +
                        std::to_string(k) + ")");
    }
  }
  require(std::isfinite(gamma_) && gamma_ > 0.0, "gamma must be positive");
  require(std::isfinite(bandwidth_w_) && bandwidth_w_ > 0.0,
          "bandwidth must be positive");
}

Market Market::FromPhysical(int n_eaps, std::vector<double> thetas,
                            const PhysicalParams& params) {
  // Rewards are expressed in units of the leader's cost coefficient.
  require(params.unit_cost_c == 1.0, "only unit_cost_c = 1 is supported");
  Market m(n_eaps, std::move(thetas), derive_gamma(params), params.bandwidth_w);
  m.physical_ = params;
  return m;
}

Market Market::WithGamma(double gamma) const {
  return Market(n_eaps_, thetas_, gamma, bandwidth_w_);
}

Market Market::WithEapCount(int n_eaps) const {
  Market m(n_eaps, thetas_, gamma_, bandwidth_w_);
  m.physical_ = physical_;
  return m;
}

double throughput(double gamma, double total_q, double bandwidth_w) {
  require(gamma > 0.0, "gamma must be positive");
  require(bandwidth_w > 0.0, "bandwidth must be positive");
  require(total_q >= 0.0, "received power must be nonnegative");
  return bandwidth_w * kLog2E * std::log1p(gamma * total_q);
}

double eap_utility_contract(const ContractItem& item, EapType theta) {
  require(item.q >= 0.0, "received power must be nonnegative");
  return item.pi - item.q * item.q / theta.value();
}

double eap_utility_stackelberg(double lambda, double q, EapType theta) {
  require(lambda >= 0.0, "price must be nonnegative");
  require(q >= 0.0, "received power must be nonnegative");
  return lambda * q - q * q / theta.value();
}

double social_welfare(std::span<const int> counts, std::span<const double> q,
                      const Market& market) {
  require_lengths(counts.size(), q.size(), market.num_types());
  double total_q = 0.0;
  double cost = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    require(counts[k] >= 0, "counts must be nonnegative");
    require(q[k] >= 0.0, "received power must be nonnegative");
    total_q += counts[k] * q[k];
    cost += counts[k] * q[k] * q[k] / market.theta(k);
  }
  return throughput(market.gamma(), total_q, market.bandwidth()) - cost;
}

double dap_utility_contract(std::span<const int> counts,
                            const ContractMenu& menu, const Market& market) {
  require_lengths(counts.size(), menu.size(), market.num_types());
  double total_q = 0.0;
  double paid = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    require(counts[k] >= 0, "counts must be nonnegative");
    total_q += counts[k] * menu[k].q;
    paid += counts[k] * menu[k].pi;
  }
  return throughput(market.gamma(), total_q, market.bandwidth()) - paid;
}

}  // namespace rfet
