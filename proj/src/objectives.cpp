#include "rfet/objectives.hpp"

#include <cmath>

#include "rfet/combinatorics.hpp"
#include "rfet/errors.hpp"
#include "rfet/model.hpp"

namespace rfet {

ExpectedLogQuadratic::ExpectedLogQuadratic(std::size_t dimension,
                                           double bandwidth_w, double beta)
    : dim_(dimension), bandwidth_w_(bandwidth_w), beta_(beta) {
  if (dim_ == 0) throw DomainError("objective needs at least one variable");
  if (!(bandwidth_w_ > 0.0) || !(beta_ > 0.0)) {
    throw DomainError("objective needs positive bandwidth and beta");
  }
}

void ExpectedLogQuadratic::add_term(double weight, std::span<const double> linear,
                                    std::span<const double> quadratic) {
  if (linear.size() != dim_ || quadratic.size() != dim_) {
    throw DomainError("objective term has wrong dimension");
  }
  weights_.push_back(weight);
  linear_.insert(linear_.end(), linear.begin(), linear.end());
  quadratic_.insert(quadratic_.end(), quadratic.begin(), quadratic.end());
}

double ExpectedLogQuadratic::evaluate(std::span<const double> x,
                                      std::span<double> grad) const {
  if (x.size() != dim_) throw DomainError("objective evaluated at wrong dimension");
  const bool want_grad = !grad.empty();
  if (want_grad && grad.size() != dim_) throw DomainError("gradient has wrong dimension");

  CompensatedSum value;
  std::vector<CompensatedSum> g(want_grad ? dim_ : 0);
  for (std::size_t c = 0; c < weights_.size(); ++c) {
    const double* a = &linear_[c * dim_];
    const double* b = &quadratic_[c * dim_];
    double inner = 0.0;
    double quad = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      inner += a[k] * x[k];
      quad += b[k] * x[k] * x[k];
    }
    const double u = 1.0 + beta_ * inner;
    const double w = weights_[c];
    value.add(w * (bandwidth_w_ * kLog2E * std::log1p(beta_ * inner) - quad));
    if (want_grad) {
      const double scale = bandwidth_w_ * kLog2E * beta_ / u;
      for (std::size_t k = 0; k < dim_; ++k) {
        g[k].add(w * (scale * a[k] - 2.0 * b[k] * x[k]));
      }
    }
  }
  for (std::size_t k = 0; k < g.size(); ++k) grad[k] = g[k].value();
  return value.value();
}

void ExpectedLogQuadratic::hessian(std::span<const double> x,
                                   std::span<double> hess) const {
  if (x.size() != dim_ || hess.size() != dim_ * dim_) {
    throw DomainError("hessian evaluated at wrong dimension");
  }
  std::vector<CompensatedSum> h(dim_ * dim_);
  for (std::size_t c = 0; c < weights_.size(); ++c) {
    const double* a = &linear_[c * dim_];
    const double* b = &quadratic_[c * dim_];
    double inner = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) inner += a[k] * x[k];
    const double u = 1.0 + beta_ * inner;
    const double w = weights_[c];
    const double curv = w * bandwidth_w_ * kLog2E * beta_ * beta_ / (u * u);
    for (std::size_t i = 0; i < dim_; ++i) {
      if (a[i] == 0.0 && b[i] == 0.0) continue;
      for (std::size_t j = 0; j < dim_; ++j) {
        h[i * dim_ + j].add(-curv * a[i] * a[j]);
      }
      h[i * dim_ + i].add(-2.0 * w * b[i]);
    }
  }
  for (std::size_t i = 0; i < h.size(); ++i) hess[i] = h[i].value();
}

ConcaveProblem ExpectedLogQuadratic::problem() const {
  ConcaveProblem p;
  p.dimension = dim_;
  p.evaluate = [this](std::span<const double> x, std::span<double> g) {
    return evaluate(x, g);
  };
  p.hessian = [this](std::span<const double> x, std::span<double> h) {
    hessian(x, h);
  };
  return p;
}

}  // namespace rfet
