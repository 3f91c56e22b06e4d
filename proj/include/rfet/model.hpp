#pragma once

// Domain types and the utility / welfare / throughput functions shared by
// every incentive scheme.
//
// Units: power and energy are interchangeable (block duration is 1) and are
// expressed in mW; bandwidth in Hz (or MHz when throughput is read in Mbps);
// rewards and prices in currency units with the leader's unit cost c = 1.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace rfet {

inline constexpr double kLog2E = 1.4426950408889634073599246810019;

struct PhysicalParams {
  double eta = 0.5;           // energy-harvesting efficiency, 0 < eta < 1
  double bandwidth_w = 1.0;   // Hz
  double noise_n0 = 1e-8;     // mW
  double gain_das = 1e-3;     // source -> leader channel power gain
  double unit_cost_c = 1.0;   // leader reward cost coefficient

  void validate() const;
};

/// gamma = eta * G_{a,s} / N0.
double derive_gamma(const PhysicalParams& params);

/// Market type theta = G^2 / a of an energy access point.
class EapType {
 public:
  explicit EapType(double theta);
  double value() const { return theta_; }

 private:
  double theta_;
};

/// Physical description of one energy access point.
struct EapPhysical {
  double cost_coeff_a = 1.0;  // cost per mW^2 of transmit power
  double gain_gms = 1.0;      // EAP -> source channel power gain

  void validate() const;
  EapType type() const;
  /// Transmit power needed to deliver `received_q` mW at the source.
  double transmit_power(double received_q) const;
};

struct ContractItem {
  double q = 0.0;   // received power at the source, mW
  double pi = 0.0;  // reward
};

class ContractMenu {
 public:
  ContractMenu() = default;
  explicit ContractMenu(std::vector<ContractItem> items);
  ContractMenu(std::span<const double> q, std::span<const double> pi);

  std::size_t size() const { return items_.size(); }
  const ContractItem& operator[](std::size_t k) const { return items_[k]; }
  std::span<const ContractItem> items() const { return items_; }
  std::vector<double> powers() const;
  std::vector<double> rewards() const;

 private:
  std::vector<ContractItem> items_;
};

/// Per-type (length K) or per-EAP (length N) prices per unit received energy.
class PriceVector {
 public:
  explicit PriceVector(std::vector<double> lambdas);
  std::span<const double> values() const { return lambdas_; }
  std::size_t size() const { return lambdas_.size(); }

 private:
  std::vector<double> lambdas_;
};

/// The leader-side world model: N EAPs, a strictly ascending set of K types
/// drawn uniformly, and the composite SNR coefficient gamma.
class Market {
 public:
  Market(int n_eaps, std::vector<double> thetas, double gamma,
         double bandwidth_w = 1.0);

  /// gamma derived from the physical block; bandwidth taken from it too.
  static Market FromPhysical(int n_eaps, std::vector<double> thetas,
                             const PhysicalParams& params);

  int n_eaps() const { return n_eaps_; }
  std::size_t num_types() const { return thetas_.size(); }
  std::span<const double> thetas() const { return thetas_; }
  double theta(std::size_t k) const { return thetas_[k]; }
  double gamma() const { return gamma_; }
  double bandwidth() const { return bandwidth_w_; }
  const std::optional<PhysicalParams>& physical() const { return physical_; }

  Market WithGamma(double gamma) const;
  Market WithEapCount(int n_eaps) const;

 private:
  int n_eaps_;
  std::vector<double> thetas_;
  double gamma_;
  double bandwidth_w_;
  std::optional<PhysicalParams> physical_;
};

/// W * log2(1 + gamma * total_q).
double throughput(double gamma, double total_q, double bandwidth_w);

/// pi - q^2 / theta.
double eap_utility_contract(const ContractItem& item, EapType theta);

/// lambda * q - q^2 / theta.
double eap_utility_stackelberg(double lambda, double q, EapType theta);

/// Throughput value minus the total energy cost of the realized population;
/// rewards are internal transfers and do not appear.
double social_welfare(std::span<const int> counts, std::span<const double> q,
                      const Market& market);

/// Throughput value minus total rewards paid for a realized population.
double dap_utility_contract(std::span<const int> counts,
                            const ContractMenu& menu, const Market& market);

}  // namespace rfet
