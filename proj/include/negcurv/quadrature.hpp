#pragma once

#include <functional>
#include <vector>

namespace negcurv {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [a, b]. Nodes ascending.
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

// Cached rule on [0, 1]; safe to call concurrently.
const QuadratureRule& gauss_legendre_unit(int n);

struct AdaptiveResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int intervals = 0;
  bool converged = false;
};

// Bisection with a 10-point Gauss-Legendre rule compared against the sum over
// both halves.
AdaptiveResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  double rel_tol = 1e-13, double abs_tol = 1e-300, int max_intervals = 4096);

}  // namespace negcurv
