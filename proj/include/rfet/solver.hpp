#pragma once

// Numerical kernels: concave maximization over the nonnegative orthant,
// scalar root bracketing, and finite-difference gradient auditing.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace rfet {

struct SolveOptions {
  double grad_tol = 1e-9;
  int max_iters = 10'000;
  /// Audit the supplied gradient against central differences at the start
  /// point; throws SolverError on a mismatch above fd_tol.
  bool fd_check = false;
  double fd_tol = 1e-5;
  /// Zero start coordinates are lifted to this interior value.
  double interior_start = 1e-3;
};

struct SolveReport {
  std::vector<double> x_star;
  double objective = 0.0;
  /// max_i |min(x_i, -df/dx_i)|; zero exactly at a KKT point of
  /// max f s.t. x >= 0.
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// A smooth concave objective on x >= 0. `evaluate` returns f(x) and fills
/// the gradient when the span is non-empty. `hessian` is optional (row-major)
/// and enables Newton steps on the free coordinates.
struct ConcaveProblem {
  std::size_t dimension = 0;
  std::function<double(std::span<const double>, std::span<double>)> evaluate;
  std::function<void(std::span<const double>, std::span<double>)> hessian;
};

/// Projected Newton ascent (projected gradient when no Hessian is given) with
/// Armijo backtracking along the projection arc. Non-convergence is reported
/// through `converged`; non-finite values throw SolverError.
SolveReport maximize_concave_nonneg(const ConcaveProblem& problem,
                                    std::vector<double> x0,
                                    const SolveOptions& opts = {});

/// KKT residual of max f s.t. x >= 0 at x with gradient g.
double kkt_residual(std::span<const double> x, std::span<const double> grad);

/// Re-expresses `problem` over increments d >= 0 with x_k = d_1 + ... + d_k,
/// i.e. over the monotone cone 0 <= x_1 <= ... <= x_K.
ConcaveProblem on_monotone_cone(ConcaveProblem problem);

/// Prefix sums: the cone point for a vector of increments.
std::vector<double> cone_point(std::span<const double> increments);

/// Bisection on a bracket with g(lo) * g(hi) <= 0, stopping when the bracket
/// width is at most tol (or g hits zero exactly). Throws DomainError when
/// the endpoints share a sign.
double bisect_root(const std::function<double(double)>& g, double lo, double hi,
                   double tol);

/// Max over coordinates of |fd_i - grad_i| / max(1, |grad_i|) using central
/// differences with step h.
double check_gradient(
    const std::function<double(std::span<const double>, std::span<double>)>& f,
    std::span<const double> x, double h);

}  // namespace rfet
