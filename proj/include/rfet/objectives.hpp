#pragma once

// Every expected objective in this library has the same shape:
//
//   f(x) = sum_c w_c [ W log2(1 + beta * <a_c, x>) - sum_k b_{c,k} x_k^2 ]
//
// with nonnegative a_c, b_c. It is concave on x >= 0 and its gradient and
// Hessian are cheap to form; this class evaluates all three with compensated
// accumulation across compositions.

#include <cstddef>
#include <span>
#include <vector>

#include "rfet/solver.hpp"

namespace rfet {

class ExpectedLogQuadratic {
 public:
  ExpectedLogQuadratic(std::size_t dimension, double bandwidth_w, double beta);

  void add_term(double weight, std::span<const double> linear,
                std::span<const double> quadratic);

  std::size_t dimension() const { return dim_; }
  std::size_t num_terms() const { return weights_.size(); }

  /// Value; fills `grad` when it is non-empty.
  double evaluate(std::span<const double> x, std::span<double> grad = {}) const;
  /// Row-major dim x dim Hessian.
  void hessian(std::span<const double> x, std::span<double> hess) const;

  /// Bundles evaluate/hessian for maximize_concave_nonneg. The returned
  /// problem refers to *this, which must outlive it.
  ConcaveProblem problem() const;

 private:
  std::size_t dim_;
  double bandwidth_w_;
  double beta_;
  std::vector<double> weights_;
  std::vector<double> linear_;     // num_terms x dim
  std::vector<double> quadratic_;  // num_terms x dim
};

}  // namespace rfet
