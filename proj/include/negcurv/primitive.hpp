#pragma once

#include "negcurv/forms.hpp"
#include "negcurv/geodesic.hpp"
#include "negcurv/model_space.hpp"
#include "negcurv/sampler.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace negcurv {

struct ClosednessAudit {
  int samples = 0;
  double max_defect = 0.0;  // max |dPsi|_h / (1 + |Psi|_h)
  ChartPoint worst_point;
  bool passed = false;
};

struct PrimitiveOptions {
  int quadrature_order = 32;
  // Relative discrepancy allowed between order n and 2n.
  double convergence_tol = 1e-8;
  bool check_convergence = true;
  ScalingMethod method = ScalingMethod::kAuto;
  int closedness_samples = 50;
  double closedness_tol = 1e-5;
  // Geodesic radius of the closedness audit ball; <= 0 means the chart radius.
  double audit_radius = 0.0;
  std::uint64_t audit_seed = 0x5eed;
};

// A closed k-form (k >= 2) on a model space together with the base point of
// the radial homotopy. Construction runs the closedness audit and rejects
// forms that fail it.
class PrimitiveProblem {
 public:
  PrimitiveProblem(SpacePtr space, ChartPoint base, KFormField psi, PrimitiveOptions opts = {});

  const ModelSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  const ChartPoint& base() const { return base_; }
  const KFormField& psi() const { return psi_; }
  int degree() const { return psi_.degree(); }
  const PrimitiveOptions& options() const { return opts_; }
  const ClosednessAudit& audit() const { return audit_; }

 private:
  SpacePtr space_;
  ChartPoint base_;
  KFormField psi_;
  PrimitiveOptions opts_;
  ClosednessAudit audit_;
};

ClosednessAudit closedness_audit(const ModelSpace& space, const KFormField& psi, int samples, double radius,
                                 std::uint64_t seed, double tol);

// Phi(x) = r * int_0^1 [tau_t^*(Psi _| d/dr)](x) dt, components of degree k - 1.
// Returns the zero form at the base point.
Vector primitive_at(const PrimitiveProblem& prob, const ChartPoint& x);
// Same, with the quadrature order overridden and no convergence check.
Vector primitive_at_order(const PrimitiveProblem& prob, const ChartPoint& x, int order);
KFormField primitive_field(const PrimitiveProblem& prob);

// int_0^r sinh(s)^{k-1} ds / sinh(r)^{k-1}
double sinh_ratio_bound(int k, double r);

// Flat analogue: int_0^r s^{k-1} ds / r^{k-1} = r / k.
double linear_ratio_bound(int k, double r);

// One sample of the estimate chain
//   |Phi(x)| <= middle <= ratio(r) * segment_sup <= bound_global
// with middle = int_0^r (f(s)/f(r))^{k-1} |Psi _| d/dr|(sigma(s)) ds, f = sinh
// for negatively curved spaces and f(s) = s for the flat control. Each link
// holds up to the relative and absolute slack kChainTolerance.
constexpr double kChainTolerance = 1e-8;

struct ChainSample {
  std::size_t index = 0;
  ChartPoint point;
  double r = 0.0;
  double primitive_norm = 0.0;
  double middle = 0.0;
  double ratio = 0.0;
  double segment_sup = 0.0;
  double bound_segment = 0.0;
  double bound_global = 0.0;
  double margin = 0.0;  // bound_global - primitive_norm
  bool chain_ok = false;
};

struct BoundCertificate {
  bool passed = false;
  bool theorem_instance = true;  // false for the flat control
  std::string label;
  int degree = 0;
  double sup_primitive = 0.0;
  double sup_source = 0.0;
  double theoretical_ratio = 0.0;  // 1/(k-1), or R/k on the flat control
  double margin = 0.0;             // theoretical_ratio * sup_source - sup_primitive
  double slack = 1e-3;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  double domain_radius = 0.0;
  std::vector<ChainSample> samples;
  std::vector<ChainSample> worst;  // ten smallest relative margins
};

struct CertificateOptions {
  std::size_t n_samples = 1000;
  std::uint64_t seed = 1;
  double r_min = 0.0;
  double r_max = 0.0;  // <= 0 means the chart radius
  RadialLaw law = RadialLaw::kUniform;
  double slack = 1e-3;
  int segment_points = 48;
  int jobs = 1;
};

BoundCertificate bound_certificate(const PrimitiveProblem& prob, const CertificateOptions& opts = {});
// Chain for a single point (also used for replay).
ChainSample chain_sample(const PrimitiveProblem& prob, const ChartPoint& x, int segment_points = 48);

// beta* = primitive of the Kaehler form on complex hyperbolic space, based at p.
PrimitiveProblem kaehler_problem(const SpacePtr& space, PrimitiveOptions opts = {});
KFormField kaehler_primitive(const SpacePtr& space, PrimitiveOptions opts = {});

}  // namespace negcurv
