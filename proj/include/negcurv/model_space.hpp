#pragma once

#include "negcurv/complex_structure.hpp"
#include "negcurv/types.hpp"

#include <memory>
#include <string>
#include <vector>

namespace negcurv {

enum class SpaceKind { kEuclidean, kHyperbolic, kComplexHyperbolic, kWarpedProfile };

const char* space_kind_name(SpaceKind kind);

// Metric together with its exact first and (optionally) second partials.
//   dg[k](i, j)       = d_k g_ij
//   ddg[k * m + l]    = d_k d_l g_ij
struct MetricJet {
  Matrix g;
  std::vector<Matrix> dg;
  std::vector<Matrix> ddg;
};

// A model space realized in one fixed chart with base point p at the chart
// origin. Hyperbolic and warped spaces use geodesic normal coordinates at p;
// complex hyperbolic space uses the unit-ball model.
//
// chart_radius() is a geodesic radius about p. Samplers stay inside it.
// Public evaluators reject points farther than chart_radius() + kStencilMargin,
// so finite-difference stencils centred on the truncation sphere remain
// evaluable; the raw/jet evaluators only require the formula to make sense.
constexpr double kStencilMargin = 1e-2;

class ModelSpace {
 public:
  virtual ~ModelSpace() = default;
  ModelSpace(const ModelSpace&) = delete;
  ModelSpace& operator=(const ModelSpace&) = delete;

  SpaceKind kind() const { return kind_; }
  int dim() const { return dim_; }
  // The a in -a^2 <= sec <= -1 over the truncated chart.
  double pinching() const { return pinching_; }
  double chart_radius() const { return chart_radius_; }
  virtual std::string name() const;

  bool in_domain(const ChartPoint& x) const;
  void require_domain(const ChartPoint& x, const char* op) const;

  Matrix metric_at(const ChartPoint& x) const;
  double norm(const ChartPoint& x, const ChartVector& v) const;
  double inner(const ChartPoint& x, const ChartVector& u, const ChartVector& v) const;

  virtual Matrix metric_raw(const ChartPoint& x) const = 0;
  virtual MetricJet metric_jet(const ChartPoint& x, int order) const = 0;
  virtual bool formula_valid(const ChartPoint& x) const;
  // Chart distance to where the coordinate formula breaks down.
  virtual double boundary_distance(const ChartPoint& x) const;

  // Closed forms relative to the chart origin.
  virtual double origin_distance(const ChartPoint& x) const = 0;
  virtual ChartPoint exp_origin(const ChartVector& v) const = 0;
  virtual ChartVector log_origin(const ChartPoint& x) const = 0;
  // Unit (in h) outward radial field d/dr; x must differ from the origin.
  virtual ChartVector radial_unit(const ChartPoint& x) const = 0;
  // tau_t(x) = exp_0(t log_0 x) and its chart Jacobian.
  virtual ChartPoint scale_origin(const ChartPoint& x, double t) const;
  virtual Matrix scaling_jacobian_origin(const ChartPoint& x, double t) const = 0;

  // Only the Euclidean model has closed-form exp/log from an arbitrary base.
  virtual bool has_global_exp() const { return false; }

 protected:
  ModelSpace(SpaceKind kind, int dim, double pinching, double chart_radius);

 private:
  SpaceKind kind_;
  int dim_;
  double pinching_;
  double chart_radius_;
};

using SpacePtr = std::shared_ptr<const ModelSpace>;

struct SpaceSpec {
  SpaceKind kind = SpaceKind::kHyperbolic;
  int dim = 2;                   // real dimension m
  double chart_radius = 8.0;
  double warp_coefficient = 1.0; // WarpedProfile: K(r) = -(1 + c r^2)
};

SpacePtr make_euclidean(int dim, double chart_radius = 8.0);
SpacePtr make_hyperbolic(int dim, double chart_radius = 8.0);
// complex_dim = n, real dimension 2n.
SpacePtr make_complex_hyperbolic(int complex_dim, double chart_radius = 8.0);
SpacePtr make_warped_profile(int dim, double warp_coefficient = 1.0, double chart_radius = 4.0);
SpacePtr make_space(const SpaceSpec& spec);

// Scale applied to the Bergman potential Hessian of -log(1 - |z|^2) so that
// the holomorphic sectional curvature is -4 and the maximum is -1.
double complex_hyperbolic_metric_scale();

// Radial curvature of a WarpedProfile space at geodesic radius r.
double warped_radial_curvature(double warp_coefficient, double r);

// The complex structure of a ComplexHyperbolic space; throws otherwise.
const ComplexStructure& complex_structure_of(const ModelSpace& space);

}  // namespace negcurv
