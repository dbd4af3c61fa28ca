#pragma once

#include "negcurv/model_space.hpp"
#include "negcurv/types.hpp"

#include <functional>

namespace negcurv {

// Curvature sign convention (kept from the source construction):
//
//   R(X, Y) Z = -nabla_X nabla_Y Z + nabla_Y nabla_X Z + nabla_[X,Y] Z
//
// i.e. the negative of the usual Riemann operator. With it the sectional
// curvature of span{u, v} is <R(u, v) u, v> / (|u|^2 |v|^2 - <u, v>^2), so
// space forms of curvature -1 return -1, and the Jacobi equation reads
// J'' + R(sigma', J) sigma' = 0.

// Finite-difference step policy: h = base * max(1, |x|), shrunk to
// boundary_fraction * boundary_distance(x) near a chart singularity. Stencils
// are always central.
struct FdSteps {
  double first = 1e-4;
  double second = 1e-3;
  double first_boundary_fraction = 1e-3;
  double second_boundary_fraction = 1e-2;
  // Geodesic length of the frame-aligned steps used by fd_jacobian.
  double frame = 1e-3;
  // Frame step for the nested differences behind the finite-difference
  // curvature path. Chart rounding near the ball boundary makes 1e-3 too small
  // there.
  double curvature = 3e-3;
};

double fd_step(const ModelSpace& space, const ChartPoint& x, double base, double boundary_fraction);

// Chart Jacobian P(i, J) = d_i f_J by central differences along an
// h-orthonormal frame at x, each step of geodesic length steps.frame. The
// realized displacements are used to map back to chart axes. Coordinate steps
// are badly conditioned wherever the chart is strongly anisotropic (tangential
// and radial length scales 1 - |x| and sqrt(1 - |x|) near the ball boundary).
Matrix fd_jacobian(const ModelSpace& space, const ChartPoint& x,
                   const std::function<Vector(const ChartPoint&)>& f, const FdSteps& steps = {});

// Christoffel symbols Gamma(l, i, j) = Gamma^l_ij.
Tensor3 christoffel_at(const ModelSpace& space, const ChartPoint& x,
                       DerivativePath path = DerivativePath::kClosedForm, const FdSteps& steps = {});
// Same without the chart-truncation check (formula domain only).
Tensor3 christoffel_raw(const ModelSpace& space, const ChartPoint& x,
                        DerivativePath path = DerivativePath::kClosedForm, const FdSteps& steps = {});
Tensor3 christoffel_from_jet(const MetricJet& jet);

// dGamma(p, l, i, j) = d_p Gamma^l_ij.
Tensor4 christoffel_derivative_raw(const ModelSpace& space, const ChartPoint& x,
                                   DerivativePath path = DerivativePath::kClosedForm,
                                   const FdSteps& steps = {});

// R(l, i, j, k) with R(d_i, d_j) d_k = R^l_ijk d_l in the convention above.
Tensor4 riemann_at(const ModelSpace& space, const ChartPoint& x,
                   DerivativePath path = DerivativePath::kClosedForm, const FdSteps& steps = {});

// <R(u, v) w, z> for the tensor above.
double riemann_form(const Tensor4& riemann, const Matrix& metric, const ChartVector& u,
                    const ChartVector& v, const ChartVector& w, const ChartVector& z);

double sectional_curvature(const ModelSpace& space, const ChartPoint& x, const ChartVector& u,
                           const ChartVector& v, DerivativePath path = DerivativePath::kClosedForm,
                           const FdSteps& steps = {});

struct CurvatureAudit {
  ChartPoint point;
  ChartVector u;  // h-orthonormal pair spanning the plane
  ChartVector v;
  double sectional = 0.0;
  // |sectional - value recomputed in a rotated basis of the same plane|
  double basis_discrepancy = 0.0;
};

// Orthonormalizes (u, v) in h, evaluates the sectional curvature, and
// re-evaluates it in the basis rotated by `angle` to check plane-basis
// independence.
CurvatureAudit audit_plane(const ModelSpace& space, const ChartPoint& x, const ChartVector& u,
                           const ChartVector& v, DerivativePath path = DerivativePath::kClosedForm,
                           double angle = 0.7);

// Gram-Schmidt in the metric at x. Throws kDegenerate if a vector is
// (numerically) dependent on the previous ones.
std::vector<ChartVector> h_orthonormalize(const Matrix& metric, const std::vector<ChartVector>& vs,
                                          double rel_tol = 1e-10);

}  // namespace negcurv
