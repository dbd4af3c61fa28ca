#pragma once

#include "negcurv/connection.hpp"
#include "negcurv/geodesic.hpp"
#include "negcurv/model_space.hpp"
#include "negcurv/types.hpp"

#include <functional>
#include <random>
#include <span>
#include <vector>

namespace negcurv {

// Strictly increasing multi-indices (i_1 < ... < i_k) over {0, ..., m-1}, in
// lexicographic order. Component vectors of k-forms use this order.
using MultiIndex = std::vector<int>;
const std::vector<MultiIndex>& multi_indices(int m, int k);
int multi_index_rank(int m, const MultiIndex& idx);
long binomial(int n, int k);

using VectorField = std::function<ChartVector(const ChartPoint&)>;

// Degree-k alternating form field on an m-dimensional chart, held as closures
// (no grid storage). A field is either defined by its components or by its
// action on k-tuples; the missing half is derived from the other.
class KFormField {
 public:
  using ComponentFn = std::function<Vector(const ChartPoint&)>;
  using EvaluateFn = std::function<double(const ChartPoint&, std::span<const ChartVector>)>;

  KFormField(int dim, int degree, ComponentFn components);
  static KFormField from_evaluator(int dim, int degree, EvaluateFn evaluate);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int component_count() const { return static_cast<int>(binomial(dim_, degree_)); }

  Vector components(const ChartPoint& x) const;
  double evaluate(const ChartPoint& x, std::span<const ChartVector> vectors) const;

 private:
  KFormField(int dim, int degree, ComponentFn components, EvaluateFn evaluate);
  int dim_;
  int degree_;
  ComponentFn components_;
  EvaluateFn evaluate_;
};

// Contracts a component vector against k vectors. The vectors are first put in
// a canonical order, so a transposition flips the sign exactly and a repeated
// vector gives exactly zero.
double eval_components(int m, int k, const Vector& comps, std::span<const ChartVector> vectors);
double eval_form(const KFormField& form, const ChartPoint& x, std::span<const ChartVector> vectors);

// Component-level kernels.
Vector interior_components(int m, int k, const Vector& comps, const ChartVector& z);
Vector wedge_components(int m, int k1, const Vector& a, int k2, const Vector& b);
// Pullback of a k-covector by the linear map d: (d^* F)_J = sum_I F_I det(d[I, J]).
Vector pullback_components(int m, int k, const Vector& comps, const Matrix& d);
// k-th compound matrix: entry (I, J) = det(a[I, J]).
Matrix compound_matrix(const Matrix& a, int k);

// F _| Z : (F _| Z)(xi_1, ...) = F(Z, xi_1, ...).
KFormField interior_product(const KFormField& form, const VectorField& z);
KFormField wedge(const KFormField& a, const KFormField& b);

// Central differences of components. `space` (optional) supplies the step
// policy near chart singularities.
KFormField exterior_derivative(const KFormField& form, const ModelSpace* space = nullptr,
                               const FdSteps& steps = {});

// (tau_t)^* F with tau_t the geodesic scaling about `base`.
KFormField pullback_scaling(const ModelSpace& space, const ChartPoint& base, const KFormField& form, double t,
                            ScalingMethod method = ScalingMethod::kAuto);

// Inner-product norm on Lambda^k induced by the metric, via an h-orthonormal
// coframe from the Cholesky factor of the Gram matrix.
double h_norm_components(const Matrix& metric, int k, const Vector& comps);
double h_norm_form(const ModelSpace& space, const KFormField& form, const ChartPoint& x);

// Comass estimate: max |F(e_1, ..., e_k)| over random h-orthonormal k-tuples.
double comass_estimate(const Matrix& metric, int k, const Vector& comps, std::mt19937_64& rng, int trials);

struct SupEstimate {
  double value = 0.0;
  std::size_t argmax = 0;
  ChartPoint point;
};
SupEstimate sup_norm_estimate(const ModelSpace& space, const KFormField& form, std::span<const ChartPoint> points);

// Fixture forms.
KFormField constant_form(int m, int k, const Vector& comps);
KFormField coordinate_form(int m, const MultiIndex& idx);  // dx_{i1} ^ ... ^ dx_{ik}
KFormField volume_form(const ModelSpace& space);            // Riemannian volume form
KFormField zero_form(int m, int k);

}  // namespace negcurv
