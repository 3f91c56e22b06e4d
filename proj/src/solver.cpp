#include "rfet/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>

#include "rfet/errors.hpp"

namespace rfet {
namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;
constexpr double kActiveEps = 1e-6;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw SolverError(std::string("non-finite ") + what);
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) require_finite(x, what);
}

// Evaluation state at one iterate.
struct Point {
  std::vector<double> x;
  std::vector<double> g;
  double f = 0.0;
};

Point evaluate_at(const ConcaveProblem& p, std::vector<double> x) {
  Point pt;
  pt.x = std::move(x);
  pt.g.assign(p.dimension, 0.0);
  pt.f = p.evaluate(pt.x, pt.g);
  require_finite(pt.f, "objective");
  require_finite(pt.g, "gradient");
  return pt;
}

// Newton direction on the free coordinates; gradient on the active ones.
// Returns false when no usable curvature is available.
bool newton_direction(const ConcaveProblem& p, const Point& pt,
                      const std::vector<bool>& active, std::vector<double>& d) {
  const std::size_t n = p.dimension;
  std::vector<double> hess(n * n, 0.0);
  p.hessian(pt.x, hess);
  require_finite(hess, "hessian");

  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i]) free.push_back(i);
  }
  for (std::size_t i = 0; i < n; ++i) d[i] = active[i] ? pt.g[i] : 0.0;
  if (free.empty()) return true;

  const auto m = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd neg_h(m, m);
  Eigen::VectorXd rhs(m);
  double diag_scale = 0.0;
  for (Eigen::Index a = 0; a < m; ++a) {
    rhs(a) = pt.g[free[a]];
    for (Eigen::Index b = 0; b < m; ++b) {
      neg_h(a, b) = -hess[free[a] * n + free[b]];
    }
    diag_scale = std::max(diag_scale, std::fabs(neg_h(a, a)));
  }
  if (diag_scale == 0.0) return false;

  // Shift until positive definite; a concave objective needs no shift unless
  // the free block is singular.
  double shift = 0.0;
  for (int attempt = 0; attempt < 12; ++attempt) {
    Eigen::MatrixXd shifted = neg_h;
    shifted.diagonal().array() += shift;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      const Eigen::VectorXd step = llt.solve(rhs);
      if (!step.allFinite()) return false;
      for (Eigen::Index a = 0; a < m; ++a) d[free[a]] = step(a);
      return true;
    }
    shift = shift == 0.0 ? 1e-12 * diag_scale : shift * 10.0;
  }
  return false;
}

// Armijo search along x(alpha) = max(0, x + alpha d). Returns true and
// overwrites `pt` on success.
bool projected_search(const ConcaveProblem& p, Point& pt,
                      const std::vector<double>& d, double alpha0) {
  const std::size_t n = p.dimension;
  const double roundoff = 8.0 * std::numeric_limits<double>::epsilon() *
                          (1.0 + std::fabs(pt.f));
  double alpha = alpha0;
  std::vector<double> trial(n);
  for (int k = 0; k < kMaxBacktracks; ++k, alpha *= 0.5) {
    double predicted = 0.0;
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      trial[i] = std::max(0.0, pt.x[i] + alpha * d[i]);
      predicted += pt.g[i] * (trial[i] - pt.x[i]);
      moved = moved || trial[i] != pt.x[i];
    }
    if (!moved) return false;
    if (predicted < 0.0) continue;
    Point next = evaluate_at(p, trial);
    if (next.f >= pt.f + kArmijo * predicted - roundoff) {
      pt = std::move(next);
      return true;
    }
  }
  return false;
}

}  // namespace

double kkt_residual(std::span<const double> x, std::span<const double> grad) {
  double r = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    r = std::max(r, std::fabs(std::min(x[i], -grad[i])));
  }
  return r;
}

SolveReport maximize_concave_nonneg(const ConcaveProblem& problem,
                                    std::vector<double> x0,
                                    const SolveOptions& opts) {
  const std::size_t n = problem.dimension;
  if (n == 0 || !problem.evaluate) throw DomainError("empty concave problem");
  if (x0.size() != n) throw DomainError("start point has wrong dimension");
  if (!(opts.grad_tol > 0.0) || opts.max_iters < 1) {
    throw DomainError("grad_tol must be positive and max_iters >= 1");
  }
  for (double& xi : x0) {
    if (!(xi >= 0.0)) throw DomainError("start point must be nonnegative");
    if (xi == 0.0) xi = opts.interior_start;
  }

  if (opts.fd_check) {
    const double dev = check_gradient(problem.evaluate, x0, 1e-6);
    if (dev > opts.fd_tol) {
      throw SolverError("gradient check failed: deviation " + std::to_string(dev));
    }
  }

  Point pt = evaluate_at(problem, std::move(x0));
  SolveReport report;
  double bb_step = 1.0;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    const double r = kkt_residual(pt.x, pt.g);
    if (r <= opts.grad_tol) break;

    const double eps = std::min(kActiveEps, r);
    std::vector<bool> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = pt.x[i] <= eps && pt.g[i] < 0.0;

    std::vector<double> d(n, 0.0);
    bool stepped = false;
    if (problem.hessian && newton_direction(problem, pt, active, d)) {
      stepped = projected_search(problem, pt, d, 1.0);
    }
    if (!stepped) {
      const Point before = pt;
      stepped = projected_search(problem, pt, pt.g, bb_step);
      if (stepped) {
        // Barzilai-Borwein step for the next gradient iteration.
        double ss = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double s = pt.x[i] - before.x[i];
          ss += s * s;
          sy -= s * (pt.g[i] - before.g[i]);
        }
        bb_step = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : 1.0;
      }
    }
    if (!stepped) break;  // stalled at roundoff level
  }

  // Snap coordinates sitting within tolerance of an active bound.
  std::vector<double> snapped = pt.x;
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (snapped[i] > 0.0 && snapped[i] <= opts.grad_tol && pt.g[i] < 0.0) {
      snapped[i] = 0.0;
      any = true;
    }
  }
  if (any) {
    Point candidate = evaluate_at(problem, std::move(snapped));
    if (kkt_residual(candidate.x, candidate.g) <= kkt_residual(pt.x, pt.g)) {
      pt = std::move(candidate);
    }
  }

  report.kkt_residual = kkt_residual(pt.x, pt.g);
  report.converged = report.kkt_residual <= opts.grad_tol;
  report.iterations = it;
  report.objective = pt.f;
  report.x_star = std::move(pt.x);
  return report;
}

ConcaveProblem on_monotone_cone(ConcaveProblem problem) {
  const std::size_t n = problem.dimension;
  ConcaveProblem cone;
  cone.dimension = n;
  auto inner = std::make_shared<ConcaveProblem>(std::move(problem));
  cone.evaluate = [inner, n](std::span<const double> inc, std::span<double> g) {
    const std::vector<double> x = cone_point(inc);
    if (g.empty()) return inner->evaluate(x, {});
    std::vector<double> gx(n);
    const double f = inner->evaluate(x, gx);
    // d f / d inc_j = sum_{k >= j} df/dx_k
    double suffix = 0.0;
    for (std::size_t j = n; j-- > 0;) {
      suffix += gx[j];
      g[j] = suffix;
    }
    return f;
  };
  if (inner->hessian) {
    cone.hessian = [inner, n](std::span<const double> inc, std::span<double> h) {
      const std::vector<double> x = cone_point(inc);
      std::vector<double> hx(n * n);
      inner->hessian(x, hx);
      // H_inc(i, j) = sum_{a >= i} sum_{b >= j} H_x(a, b): 2-D suffix sums.
      for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = n; j-- > 0;) {
          double v = hx[i * n + j];
          if (i + 1 < n) v += h[(i + 1) * n + j];
          if (j + 1 < n) v += h[i * n + j + 1];
          if (i + 1 < n && j + 1 < n) v -= h[(i + 1) * n + j + 1];
          h[i * n + j] = v;
        }
      }
    };
  }
  return cone;
}

std::vector<double> cone_point(std::span<const double> increments) {
  std::vector<double> x(increments.size());
  std::partial_sum(increments.begin(), increments.end(), x.begin());
  return x;
}

double bisect_root(const std::function<double(double)>& g, double lo, double hi,
                   double tol) {
  if (!(lo <= hi)) throw DomainError("bisection needs lo <= hi");
  if (!(tol > 0.0)) throw DomainError("bisection tolerance must be positive");
  double g_lo = g(lo);
  const double g_hi = g(hi);
  require_finite(g_lo, "bracket value");
  require_finite(g_hi, "bracket value");
  if (g_lo == 0.0) return lo;
  if (g_hi == 0.0) return hi;
  if ((g_lo < 0.0) == (g_hi < 0.0)) {
    throw DomainError("bisection bracket does not change sign");
  }
  while (hi - lo > tol) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;  // bracket at ulp resolution
    const double g_mid = g(mid);
    require_finite(g_mid, "function value");
    if (g_mid == 0.0) return mid;
    if ((g_mid < 0.0) == (g_lo < 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

double check_gradient(
    const std::function<double(std::span<const double>, std::span<double>)>& f,
    std::span<const double> x, double h) {
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  const std::size_t n = x.size();
  std::vector<double> grad(n);
  require_finite(f(x, grad), "objective");
  require_finite(grad, "gradient");

  std::vector<double> probe(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = probe[i];
    probe[i] = xi + h;
    const double up = f(probe, {});
    probe[i] = xi - h;
    const double down = f(probe, {});
    probe[i] = xi;
    require_finite(up, "objective");
    require_finite(down, "objective");
    const double fd = (up - down) / (2.0 * h);
    worst = std::max(worst, std::fabs(fd - grad[i]) / std::max(1.0, std::fabs(grad[i])));
  }
  return worst;
}

}  // namespace rfet
