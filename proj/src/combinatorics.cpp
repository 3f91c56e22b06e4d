#include "rfet/combinatorics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rfet/errors.hpp"

namespace rfet {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::fabs(sum_) >= std::fabs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

void CompensatedSum::merge(const CompensatedSum& other) {
  add(other.sum_);
  add(other.compensation_);
}

std::uint64_t composition_count(int n, int k) {
  if (n < 0 || k < 1) throw DomainError("composition count needs n >= 0, k >= 1");
  // C(n + k - 1, r) with r = min(k - 1, n); each partial product is itself a
  // binomial coefficient, so the division is exact.
  const std::uint64_t top = static_cast<std::uint64_t>(n) + k - 1;
  const std::uint64_t r = std::min<std::uint64_t>(k - 1, n);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t c = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    const std::uint64_t factor = top - r + i;
    if (c > kMax / factor) return kMax;
    c = c * factor / i;
  }
  return c;
}

double log_multinomial_uniform(std::span<const int> counts) {
  if (counts.empty()) throw DomainError("empty composition");
  int n = 0;
  double log_p = 0.0;
  for (int c : counts) {
    if (c < 0) throw DomainError("negative count in composition");
    n += c;
    log_p -= std::lgamma(c + 1.0);
  }
  log_p += std::lgamma(n + 1.0) - n * std::log(static_cast<double>(counts.size()));
  return log_p;
}

namespace {

void check_cap(int n, int k, std::uint64_t cap) {
  const std::uint64_t count = composition_count(n, k);
  if (count > cap) {
    throw EnumerationLimitError(
        "C(" + std::to_string(n + k - 1) + ", " + std::to_string(k - 1) +
        ") compositions exceed the enumeration cap of " + std::to_string(cap));
  }
}

// Visits compositions in ascending lexicographic order.
template <class Visit>
void for_each_composition(int n, int k, Visit&& visit) {
  std::vector<int> c(k, 0);
  c[k - 1] = n;
  while (true) {
    visit(std::span<const int>(c));
    // Next in lexicographic order: find the rightmost position j < k-1 that
    // can be incremented (some mass to its right), move one unit there and
    // push the remainder to the last slot.
    int j = k - 2;
    while (j >= 0) {
      int right = 0;
      for (int i = j + 1; i < k; ++i) right += c[i];
      if (right > 0) break;
      --j;
    }
    if (j < 0) return;
    int rest = -1;
    for (int i = j + 1; i < k; ++i) rest += c[i];
    ++c[j];
    for (int i = j + 1; i < k; ++i) c[i] = 0;
    c[k - 1] = rest;
  }
}

}  // namespace

std::vector<Composition> enumerate_compositions(int n, int k, std::uint64_t cap) {
  check_cap(n, k, cap);
  std::vector<Composition> out;
  out.reserve(composition_count(n, k));
  for_each_composition(n, k, [&](std::span<const int> c) {
    out.push_back({std::vector<int>(c.begin(), c.end()),
                   std::exp(log_multinomial_uniform(c))});
  });
  return out;
}

CompositionTable::CompositionTable(int n, int k, std::uint64_t cap) : n_(n), k_(k) {
  check_cap(n, k, cap);
  const auto count = composition_count(n, k);
  counts_.reserve(count * static_cast<std::uint64_t>(k));
  probs_.reserve(count);
  for_each_composition(n, k, [&](std::span<const int> c) {
    counts_.insert(counts_.end(), c.begin(), c.end());
    probs_.push_back(std::exp(log_multinomial_uniform(c)));
  });
}

}  // namespace rfet
