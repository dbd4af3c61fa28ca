#include "negcurv/quadrature.hpp"

#include "negcurv/types.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace negcurv {

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "gauss_legendre: order must be >= 1");
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n from the Tricomi initial guess.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = (n == 1) ? z : p1;
      const double pnm1 = (n == 1) ? 1.0 : p0;
      dp = n * (z * pn - pnm1) / (z * z - 1.0);
      const double dz = pn / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) {
        // refresh derivative at the converged node
        p0 = 1.0;
        p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = (n == 1) ? 1.0 : n * (z * p1 - p0) / (z * z - 1.0);
        break;
      }
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = mid - half * z;
    rule.nodes[n - 1 - i] = mid + half * z;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = mid;
  return rule;
}

const QuadratureRule& gauss_legendre_unit(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<QuadratureRule>(gauss_legendre(n, 0.0, 1.0));
  return *slot;
}

namespace {

double gl10(const std::function<double(double)>& f, double a, double b) {
  static const QuadratureRule rule = gauss_legendre(10);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * s;
}

}  // namespace

AdaptiveResult integrate_adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol,
                                  double abs_tol, int max_intervals) {
  struct Piece {
    double a, b, whole;
  };
  AdaptiveResult res;
  std::vector<Piece> stack{{a, b, gl10(f, a, b)}};
  res.converged = true;
  while (!stack.empty()) {
    const Piece p = stack.back();
    stack.pop_back();
    const double m = 0.5 * (p.a + p.b);
    const double left = gl10(f, p.a, m), right = gl10(f, m, p.b);
    const double refined = left + right;
    const double err = std::abs(refined - p.whole);
    if (err <= std::max(abs_tol, rel_tol * std::abs(refined)) || res.intervals + static_cast<int>(stack.size()) >= max_intervals) {
      if (err > std::max(abs_tol, rel_tol * std::abs(refined))) res.converged = false;
      res.value += refined;
      res.error_estimate += err;
      ++res.intervals;
      continue;
    }
    stack.push_back({m, p.b, right});
    stack.push_back({p.a, m, left});
  }
  return res;
}

}  // namespace negcurv
