#pragma once

#include "negcurv/model_space.hpp"
#include "negcurv/types.hpp"

#include <vector>

namespace negcurv {

struct GeodesicRay {
  ChartPoint base;
  ChartVector direction;  // unit in h at base
  double max_param = 0.0;
};

struct GeodesicState {
  ChartPoint x;
  ChartVector v;
};

// Classical RK4 with a fixed step of at most max_step_fraction * length and a
// Richardson step-halving check on the end state.
struct OdeOptions {
  int min_steps = 1000;
  double max_step_fraction = 1e-3;
  bool richardson = true;
  double richardson_tol = 1e-7;
  // Reject trajectories leaving the truncated chart (kTruncation). When false
  // only the coordinate formula's own domain is enforced.
  bool enforce_chart = true;
};

GeodesicState geodesic_flow(const ModelSpace& space, const GeodesicRay& ray, double s,
                            const OdeOptions& opts = {});

// Geodesic x(s) with x(0) = x0, x'(0) = v0 together with the fundamental
// matrix of the linearized (Jacobi) equation: jac[i] = d x(params[i]) / d v0,
// i.e. the Jacobi fields with J(0) = 0, J'(0) = e_c in the columns.
struct LinearizedFlow {
  std::vector<double> params;
  std::vector<ChartPoint> x;
  std::vector<ChartVector> v;
  std::vector<Matrix> jac;
  double richardson_error = 0.0;
};

LinearizedFlow integrate_linearized(const ModelSpace& space, const ChartPoint& x0, const ChartVector& v0,
                                    const std::vector<double>& record_params, const OdeOptions& opts = {});

ChartPoint exp_map(const ModelSpace& space, const ChartPoint& base, const ChartVector& v,
                   const OdeOptions& opts = {});
// Newton shooting on exp_map unless a closed form is available.
ChartVector log_map(const ModelSpace& space, const ChartPoint& base, const ChartPoint& x,
                    const OdeOptions& opts = {});
double distance(const ModelSpace& space, const ChartPoint& base, const ChartPoint& x);

// tau_t(x) = exp_base(t exp_base^{-1}(x)), 0 <= t <= 1.
ChartPoint geodesic_scaling(const ModelSpace& space, const ChartPoint& base, const ChartPoint& x, double t);

// (tau_t)_* xi, obtained from the Jacobi field along the geodesic from base to
// x with J(0) = 0 and J(r) = xi, evaluated at t r.
ChartVector pushforward_scaling(const ModelSpace& space, const ChartPoint& base, const ChartPoint& x,
                                double t, const ChartVector& xi, const OdeOptions& opts = {});

enum class ScalingMethod {
  kAuto,        // closed form when base is the chart origin, else Jacobi ODE
  kClosedForm,  // chart-origin closed forms only
  kJacobi,      // fundamental matrix of the Jacobi equation
};

// Everything the radial homotopy needs at a batch of scaling parameters:
// tau_t(x), the unit radial field there, and the Jacobian of tau_t at x.
struct RadialTransport {
  double r = 0.0;
  std::vector<double> t;
  std::vector<ChartPoint> points;
  std::vector<ChartVector> radial;
  std::vector<Matrix> jacobian;
};

RadialTransport radial_transport(const ModelSpace& space, const ChartPoint& base, const ChartPoint& x,
                                 const std::vector<double>& ts, ScalingMethod method = ScalingMethod::kAuto,
                                 const OdeOptions& opts = {});

struct JacobiSolution {
  GeodesicRay ray;
  std::vector<double> s;     // arclength samples in (0, r]
  std::vector<double> norm;  // |J(s)|_h
  double boundary_norm = 0.0;
  double richardson_error = 0.0;

  double eta(std::size_t i) const;
  // max over consecutive samples of eta(i) - eta(i + 1), clamped at 0
  double max_monotonicity_violation() const;
  // max_i |eta(i) - eta(r)|
  double max_deviation_from_endpoint() const;
};

// Normal Jacobi field with J(0) = 0, J(r) = xi_perp along the ray.
JacobiSolution jacobi_comparison(const ModelSpace& space, const GeodesicRay& ray, double r,
                                 const ChartVector& xi_perp, int n_samples = 200,
                                 const OdeOptions& opts = {});

struct RatioCheckReport {
  bool passed = false;
  bool precondition_ok = false;  // f/g nondecreasing on the grid
  int first_violation = -1;
  int first_precondition_violation = -1;
  std::vector<double> ratios;   // cumulative-integral ratios, index 0 is unused
};

// Checks that (int_{s0}^{s} f) / (int_{s0}^{s} g) is nondecreasing on the grid
// (trapezoid cumulative sums), given positive samples f and g.
RatioCheckReport ratio_monotone_check(const std::vector<double>& grid, const std::vector<double>& f,
                                      const std::vector<double>& g, double slack = 1e-12);

}  // namespace negcurv
