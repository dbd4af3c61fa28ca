#pragma once

#include "negcurv/connection.hpp"
#include "negcurv/forms.hpp"
#include "negcurv/geodesic.hpp"
#include "negcurv/model_space.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace negcurv {

// Conventions (all relative to the chart complex structure J):
//   omega(X, Y) = h(JX, Y), so omega(X, JX) = |X|^2 > 0;
//   beta(w)     = dr(Jw),   so beta(grad r) = 0 and beta(J grad r) = -1;
//   d beta(X, JX) = -(Hess r(X, X) + Hess r(JX, JX)).
// With X~ = (X - i JX)/sqrt(2), d beta(X~, conj X~) = i d beta(X, JX); the
// Levi value reported below is Hess r(X, X) + Hess r(JX, JX) = -d beta(X, JX).
// Every routine here takes p to be the chart origin.

double distance_function(const ModelSpace& space, const ChartPoint& x);
ChartVector gradient_r(const ModelSpace& space, const ChartPoint& x,
                       DerivativePath path = DerivativePath::kClosedForm, const FdSteps& steps = {});

// Components of beta = J^T dr at x.
Vector beta_at(const ModelSpace& space, const ChartPoint& x);
KFormField beta_field(const SpacePtr& space);

// Covariant Hessian of r in chart components: H_ab = d_a d_b r - Gamma^c_ab d_c r.
Matrix hessian_matrix(const ModelSpace& space, const ChartPoint& x);

// Hess r(X, X) for X tangent to the geodesic sphere through x. The closed-form
// path uses the exact coordinate Hessian of r; the finite-difference path is a
// second difference of r along the geodesic through x with velocity X.
double hessian_r(const ModelSpace& space, const ChartPoint& x, const ChartVector& X,
                 DerivativePath path = DerivativePath::kClosedForm, double geodesic_step = 0.0);

// Hess r(X, X) + Hess r(JX, JX) for X in the contact distribution.
double levi_positivity(const ModelSpace& space, const ChartPoint& x, const ChartVector& X);
// -d beta(X, JX) with d beta from central differences of beta_at.
double levi_pairing_fd(const ModelSpace& space, const ChartPoint& x, const ChartVector& X,
                       const FdSteps& steps = {});

// d beta components from the closed-form Hessian: d beta(u, v) = H(u, Jv) - H(v, Ju).
Vector dbeta_at(const ModelSpace& space, const ChartPoint& x);

// h-orthonormal frame of T_x(dB_r): vectors[0] = J grad r, then J-adapted
// pairs (X_i, J X_i) spanning the contact distribution.
struct SphereFrame {
  ChartPoint point;
  ChartVector grad;
  std::vector<ChartVector> vectors;
};
SphereFrame sphere_frame(const ModelSpace& space, const ChartPoint& x);

struct ContactDefect {
  double min_value = 0.0;
  double max_value = 0.0;
  std::size_t argmin = 0;
  std::vector<double> values;  // |beta ^ (d beta)^{n-1}| on the frame at each sample
};
// Closed-form d beta; the finite-difference route is used when fd is set.
ContactDefect contact_defect(const ModelSpace& space, const std::vector<ChartPoint>& points, bool fd = false);
// 2^{n-1} (n-1)! coth^{n-1}(r)
double contact_defect_closed_form(int complex_dim, double r);

// F_p(v) = exp_p(v / (1 - |v|)) on the open unit ball of T_pM (|v| in h at p).
struct HorizonChart {
  SpacePtr space;
  ChartPoint map(const Vector& v) const;
  Vector inverse(const ChartPoint& x) const;
};

enum class SpherePatch { kNorth, kSouth };

// Stereographic coordinates on the unit sphere S^{m-1}, projecting from
// +e_{m-1} (north) or -e_{m-1} (south). The transition is y -> y / |y|^2.
Vector stereographic_point(SpherePatch patch, const Vector& y);
Matrix stereographic_jacobian(SpherePatch patch, const Vector& y);  // m x (m-1)
Vector stereographic_coords(SpherePatch patch, const Vector& theta);

// Pullback of a 1-form on M to the unit sphere through theta -> exp_p(r theta),
// divided by N(r) = exp(a r) / (2a) (a = pinching) when normalized.
class HorizonPullback {
 public:
  HorizonPullback(SpacePtr space, double r, KFormField form, bool normalize = true);
  // beta, evaluated in geodesic polar form (r, theta) rather than through the
  // chart point, which keeps full relative precision near the ball boundary.
  static HorizonPullback of_beta(SpacePtr space, double r, bool normalize = true);
  int dimension() const { return space_->dim(); }
  double r() const { return r_; }
  double normalization() const { return normalization_; }
  // Components of the pulled-back form in R^m, tangential part only.
  Vector ambient(const Vector& theta) const;
  Vector patch(SpherePatch which, const Vector& y) const;
  KFormField patch_field(SpherePatch which) const;

 private:
  SpacePtr space_;
  double r_;
  double chart_rho_;
  double normalization_;
  KFormField form_;
  std::function<Vector(const Vector&)> polar_;
};

// Largest discrepancy between the two patch representations over sample
// points in the overlap, after transforming by the transition map.
double patch_overlap_discrepancy(const HorizonPullback& pb, std::uint64_t seed, std::size_t n);

// theta_0(w) = <theta, J w>
Vector standard_contact_form(const Vector& theta);

// Levi matrix L_ij = -d theta(X_i, J X_j) of a sphere 1-form theta at a point
// of the patch, on an orthonormal basis of ker theta_0.
Matrix levi_matrix(const KFormField& patch_form, SpherePatch which, const Vector& y);

struct HorizonLimitReport {
  std::vector<double> r_grid;
  std::vector<double> sup_differences;  // between consecutive grid radii
  bool differences_decreasing = false;
  double min_decay_factor = 0.0;
  double fitted_scale = 0.0;
  double standard_discrepancy = 0.0;  // relative, after the scale fit
  std::vector<Vector> samples;        // unit-sphere sample points
  std::vector<Vector> limit;          // extrapolated beta_inf (ambient components)
  std::vector<double> levi_min_eigenvalue;
  std::vector<double> levi_max_eigenvalue;
  bool levi_spd = false;
  double overlap_discrepancy = 0.0;
  bool passed = false;
};

HorizonLimitReport horizon_limit_report(const SpacePtr& space, const std::vector<double>& r_grid,
                                        std::size_t n_samples, std::size_t n_levi, std::uint64_t seed);

// Aitken delta-squared for three consecutive values. Falls back to the last
// value when the second difference is negligible.
double aitken(double a0, double a1, double a2);

// sup over h-unit X tangent to the geodesic sphere of |nabla_X beta|_h, with
// nabla beta from central differences of beta_at.
double beta_derivative_sup(const ModelSpace& space, const ChartPoint& x, const FdSteps& steps = {});
// Operator norm of nabla F for a 1-form field (over all h-unit X).
double covariant_derivative_norm(const ModelSpace& space, const KFormField& form, const ChartPoint& x,
                                 const FdSteps& steps = {});

// Kaehler form omega(X, Y) = h(JX, Y).
KFormField kaehler_form(const SpacePtr& space);

}  // namespace negcurv
