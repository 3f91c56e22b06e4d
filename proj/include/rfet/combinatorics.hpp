#pragma once

// Exact enumeration of how N EAPs split across K types, with multinomial
// probabilities under the uniform type prior, and the expectation operator
// every asymmetric-information objective is built on.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rfet {

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// Neumaier-compensated running sum. Order-independent to within a few ulps,
/// so partial sums from different workers can be merged.
class CompensatedSum {
 public:
  void add(double x);
  void merge(const CompensatedSum& other);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

struct Composition {
  std::vector<int> counts;  // (n_1, ..., n_K), sums to N
  double prob = 0.0;        // N! / (n_1! ... n_K! K^N)
};

/// C(n + k - 1, k - 1), saturating at UINT64_MAX.
std::uint64_t composition_count(int n, int k);

/// log of the multinomial weight of `counts` under a uniform prior on k types.
double log_multinomial_uniform(std::span<const int> counts);

/// All compositions of n into k nonnegative parts in ascending lexicographic
/// order of (n_1, ..., n_K); throws EnumerationLimitError above `cap`.
std::vector<Composition> enumerate_compositions(
    int n, int k, std::uint64_t cap = kDefaultEnumerationCap);

/// Flattened, immutable composition enumeration reused across objective
/// evaluations.
class CompositionTable {
 public:
  CompositionTable(int n, int k, std::uint64_t cap = kDefaultEnumerationCap);

  int n() const { return n_; }
  int k() const { return k_; }
  std::size_t size() const { return probs_.size(); }
  std::span<const int> counts(std::size_t i) const {
    return {counts_.data() + i * static_cast<std::size_t>(k_),
            static_cast<std::size_t>(k_)};
  }
  double prob(std::size_t i) const { return probs_[i]; }

  /// sum_i prob(i) * f(counts(i)).
  template <class F>
  double expect(F&& f) const {
    CompensatedSum acc;
    for (std::size_t i = 0; i < size(); ++i) acc.add(probs_[i] * f(counts(i)));
    return acc.value();
  }

  /// sum_i weights[i] * f(counts(i)) for an arbitrary prior over compositions.
  template <class F>
  double expect_weighted(std::span<const double> weights, F&& f) const;

 private:
  int n_;
  int k_;
  std::vector<int> counts_;
  std::vector<double> probs_;
};

template <class F>
double CompositionTable::expect_weighted(std::span<const double> weights,
                                         F&& f) const {
  CompensatedSum acc;
  for (std::size_t i = 0; i < size() && i < weights.size(); ++i) {
    acc.add(weights[i] * f(counts(i)));
  }
  return acc.value();
}

/// Expectation of f over the uniform-prior composition distribution of n
/// EAPs on k types.
template <class F>
double expect(F&& f, int n, int k, std::uint64_t cap = kDefaultEnumerationCap) {
  return CompositionTable(n, k, cap).expect(std::forward<F>(f));
}

}  // namespace rfet
