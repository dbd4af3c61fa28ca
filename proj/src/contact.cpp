#include "negcurv/contact.hpp"

#include "negcurv/sampler.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <sstream>

namespace negcurv {

namespace {

const Matrix& j_matrix(const ModelSpace& space) { return complex_structure_of(space).matrix(); }

// r = f(|x|) in every chart used here. Returns (f'(rho), f''(rho)).
std::pair<double, double> radial_profile(const ModelSpace& space, double rho) {
  if (space.kind() == SpaceKind::kComplexHyperbolic) {
    const double sc = std::sqrt(complex_hyperbolic_metric_scale());
    const double q = 1.0 - rho * rho;
    return {sc / q, 2.0 * sc * rho / (q * q)};
  }
  return {1.0, 0.0};
}

// f'(rho) written in terms of the geodesic radius, and rho itself.
std::pair<double, double> radial_profile_at_radius(const ModelSpace& space, double r) {
  if (space.kind() == SpaceKind::kComplexHyperbolic) {
    const double sc = std::sqrt(complex_hyperbolic_metric_scale());
    const double ch = std::cosh(r / sc);
    return {sc * ch * ch, std::tanh(r / sc)};
  }
  return {1.0, r};
}

ChartVector dr_covector(const ModelSpace& space, const ChartPoint& x) {
  const double rho = x.norm();
  if (!(rho > 0.0)) throw Error(ErrorCode::kDegenerate, "dr is undefined at the base point");
  return radial_profile(space, rho).first / rho * x;
}

void require_tangent(const ModelSpace& space, const ChartPoint& x, const ChartVector& X, const ChartVector& dir,
                     const char* op, const char* what) {
  const double nx = space.norm(x, X);
  if (std::abs(space.inner(x, X, dir)) > 1e-6 * std::max(nx, 1e-300)) {
    std::ostringstream os;
    os << op << ": vector is not orthogonal to " << what;
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
}

Matrix pinv_tall(const Matrix& d) { return (d.transpose() * d).ldlt().solve(d.transpose()); }

}  // namespace

double distance_function(const ModelSpace& space, const ChartPoint& x) {
  space.require_domain(x, "distance_function");
  return space.origin_distance(x);
}

ChartVector gradient_r(const ModelSpace& space, const ChartPoint& x, DerivativePath path, const FdSteps& steps) {
  space.require_domain(x, "gradient_r");
  if (x.cwiseAbs().maxCoeff() == 0.0) throw Error(ErrorCode::kDegenerate, "gradient_r: undefined at the base point");
  if (path == DerivativePath::kClosedForm) return space.radial_unit(x);
  auto r_of = [&space](const ChartPoint& p) { return Vector::Constant(1, space.origin_distance(p)); };
  const Vector dr = fd_jacobian(space, x, r_of, steps).col(0);
  return space.metric_raw(x).ldlt().solve(dr);
}

Vector beta_at(const ModelSpace& space, const ChartPoint& x) {
  return j_matrix(space).transpose() * dr_covector(space, x);
}

KFormField beta_field(const SpacePtr& space) {
  j_matrix(*space);
  return KFormField(space->dim(), 1, [space](const ChartPoint& x) { return beta_at(*space, x); });
}

Matrix hessian_matrix(const ModelSpace& space, const ChartPoint& x) {
  space.require_domain(x, "hessian_r");
  const int m = space.dim();
  const double rho = x.norm();
  if (!(rho > 0.0)) throw Error(ErrorCode::kDegenerate, "hessian_r: undefined at the base point");
  const auto [f1, f2] = radial_profile(space, rho);
  const Vector n = x / rho;
  const Matrix nn = n * n.transpose();
  Matrix h = f2 * nn + (f1 / rho) * (Matrix::Identity(m, m) - nn);
  const Vector dr = f1 * n;
  const Tensor3 gamma = christoffel_raw(space, x);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      double s = 0.0;
      for (int c = 0; c < m; ++c) s += gamma(c, a, b) * dr[c];
      h(a, b) -= s;
    }
  return 0.5 * (h + h.transpose());
}

double hessian_r(const ModelSpace& space, const ChartPoint& x, const ChartVector& X, DerivativePath path,
                 double geodesic_step) {
  space.require_domain(x, "hessian_r");
  require_tangent(space, x, X, space.radial_unit(x), "hessian_r", "grad r (not tangent to the geodesic sphere)");
  if (path == DerivativePath::kClosedForm) return X.dot(hessian_matrix(space, x) * X);

  const double len = space.norm(x, X);
  if (len == 0.0) return 0.0;
  const ChartVector u = X / len;
  const double r0 = space.origin_distance(x);
  const double h = geodesic_step > 0.0 ? geodesic_step : 1e-3 * std::max(1.0, r0);
  OdeOptions o;
  o.min_steps = 16;
  o.max_step_fraction = 1.0 / 16.0;
  o.richardson = false;
  o.enforce_chart = false;
  const ChartPoint xp = geodesic_flow(space, {x, u, h}, h, o).x;
  const ChartPoint xm = geodesic_flow(space, {x, -u, h}, h, o).x;
  const double second = (space.origin_distance(xp) - 2.0 * r0 + space.origin_distance(xm)) / (h * h);
  return len * len * second;
}

double levi_positivity(const ModelSpace& space, const ChartPoint& x, const ChartVector& X) {
  const ChartVector grad = space.radial_unit(x);
  const Matrix& j = j_matrix(space);
  require_tangent(space, x, X, grad, "levi_positivity", "grad r");
  require_tangent(space, x, X, j * grad, "levi_positivity", "J grad r (not in the contact distribution)");
  const Matrix h = hessian_matrix(space, x);
  const Vector jx = j * X;
  return X.dot(h * X) + jx.dot(h * jx);
}

double levi_pairing_fd(const ModelSpace& space, const ChartPoint& x, const ChartVector& X, const FdSteps& steps) {
  const ModelSpace* sp = &space;
  const KFormField beta(space.dim(), 1, [sp](const ChartPoint& y) { return beta_at(*sp, y); });
  const Vector db = exterior_derivative(beta, &space, steps).components(x);
  const std::vector<ChartVector> pair{X, j_matrix(space) * X};
  return -eval_components(space.dim(), 2, db, pair);
}

Vector dbeta_at(const ModelSpace& space, const ChartPoint& x) {
  const int m = space.dim();
  const Matrix hj = hessian_matrix(space, x) * j_matrix(space);
  const auto& idx = multi_indices(m, 2);
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const int i = idx[a][0], jj = idx[a][1];
    out[static_cast<Eigen::Index>(a)] = hj(i, jj) - hj(jj, i);
  }
  return out;
}

SphereFrame sphere_frame(const ModelSpace& space, const ChartPoint& x) {
  const int m = space.dim();
  const Matrix& j = j_matrix(space);
  const Matrix g = space.metric_at(x);
  SphereFrame f;
  f.point = x;
  f.grad = space.radial_unit(x);
  std::vector<ChartVector> span{f.grad, j * f.grad};
  auto ip = [&](const Vector& a, const Vector& b) { return a.dot(g * b); };
  for (int c = 0; c < m && static_cast<int>(span.size()) < m; ++c) {
    Vector v = Vector::Unit(m, c);
    const double start = std::sqrt(ip(v, v));
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& s : span) v -= ip(v, s) * s;
    }
    const double len = std::sqrt(ip(v, v));
    if (len <= 1e-6 * start) continue;
    v /= len;
    span.push_back(v);
    span.push_back(j * v);
  }
  if (static_cast<int>(span.size()) != m) throw Error(ErrorCode::kDegenerate, "sphere_frame: could not complete the frame");
  f.vectors.assign(span.begin() + 1, span.end());
  return f;
}

ContactDefect contact_defect(const ModelSpace& space, const std::vector<ChartPoint>& points, bool fd) {
  if (points.empty()) throw Error(ErrorCode::kInvalidArgument, "contact_defect: no sample points");
  const int m = space.dim();
  const int n = m / 2;
  const ModelSpace* sp = &space;
  const KFormField beta(m, 1, [sp](const ChartPoint& y) { return beta_at(*sp, y); });
  const KFormField dbeta_fd = exterior_derivative(beta, &space);
  ContactDefect out;
  out.min_value = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < points.size(); ++s) {
    const SphereFrame frame = sphere_frame(space, points[s]);
    Vector form = beta_at(space, points[s]);
    int degree = 1;
    if (n > 1) {
      const Vector db = fd ? dbeta_fd.components(points[s]) : dbeta_at(space, points[s]);
      for (int i = 1; i < n; ++i) {
        form = wedge_components(m, degree, form, 2, db);
        degree += 2;
      }
    }
    const double v = std::abs(eval_components(m, degree, form, frame.vectors));
    out.values.push_back(v);
    if (v < out.min_value) {
      out.min_value = v;
      out.argmin = s;
    }
    out.max_value = std::max(out.max_value, v);
  }
  return out;
}

double contact_defect_closed_form(int complex_dim, double r) {
  double v = 1.0;
  for (int i = 1; i < complex_dim; ++i) v *= 2.0 * i / std::tanh(r);
  return v;
}

ChartPoint HorizonChart::map(const Vector& v) const {
  const ChartPoint origin = Vector::Zero(space->dim());
  const double len = space->norm(origin, v);
  if (!(len < 1.0)) throw Error(ErrorCode::kDomain, "HorizonChart: |v| must be < 1");
  return space->exp_origin(v / (1.0 - len));
}

Vector HorizonChart::inverse(const ChartPoint& x) const {
  const ChartVector w = space->log_origin(x);
  return w / (1.0 + space->norm(Vector::Zero(space->dim()), w));
}

Vector stereographic_point(SpherePatch patch, const Vector& y) {
  const Eigen::Index k = y.size();
  const double s = y.squaredNorm();
  Vector t(k + 1);
  t.head(k) = 2.0 * y / (s + 1.0);
  t[k] = (patch == SpherePatch::kNorth ? 1.0 : -1.0) * (s - 1.0) / (s + 1.0);
  return t;
}

Matrix stereographic_jacobian(SpherePatch patch, const Vector& y) {
  const Eigen::Index k = y.size();
  const double s = y.squaredNorm(), q = s + 1.0;
  Matrix d(k + 1, k);
  d.topRows(k) = 2.0 / q * Matrix::Identity(k, k) - 4.0 / (q * q) * y * y.transpose();
  d.row(k) = (patch == SpherePatch::kNorth ? 4.0 : -4.0) / (q * q) * y.transpose();
  return d;
}

Vector stereographic_coords(SpherePatch patch, const Vector& theta) {
  const Eigen::Index k = theta.size() - 1;
  const double denom = patch == SpherePatch::kNorth ? 1.0 - theta[k] : 1.0 + theta[k];
  if (!(denom > 1e-12)) throw Error(ErrorCode::kDomain, "stereographic_coords: point is at the projection pole");
  return theta.head(k) / denom;
}

HorizonPullback::HorizonPullback(SpacePtr space, double r, KFormField form, bool normalize)
    : space_(std::move(space)), r_(r), form_(std::move(form)) {
  if (form_.degree() != 1 || form_.dim() != space_->dim()) {
    throw Error(ErrorCode::kInvalidArgument, "HorizonPullback: expects a 1-form on the space");
  }
  if (!(r > 0.0 && r <= space_->chart_radius())) throw Error(ErrorCode::kInvalidArgument, "HorizonPullback: radius outside the chart");
  chart_rho_ = radial_profile_at_radius(*space_, r).second;
  const double a = space_->pinching();
  normalization_ = normalize ? std::exp(a * r) / (2.0 * a) : 1.0;
}

HorizonPullback HorizonPullback::of_beta(SpacePtr space, double r, bool normalize) {
  const SpacePtr sp = space;
  HorizonPullback pb(space, r, beta_field(sp), normalize);
  // dr = f'(r) theta on dB_r.
  const double fprime = radial_profile_at_radius(*sp, r).first;
  const Matrix jt = j_matrix(*sp).transpose();
  pb.polar_ = [jt, fprime](const Vector& theta) -> Vector { return fprime * (jt * theta); };
  return pb;
}

Vector HorizonPullback::ambient(const Vector& theta_in) const {
  if (theta_in.size() != space_->dim()) throw Error(ErrorCode::kInvalidArgument, "HorizonPullback: dimension mismatch");
  const Vector theta = theta_in / theta_in.norm();
  const Vector comps = polar_ ? polar_(theta) : form_.components(chart_rho_ * theta);
  Vector out = (chart_rho_ / normalization_) * comps;
  out -= out.dot(theta) * theta;
  return out;
}

Vector HorizonPullback::patch(SpherePatch which, const Vector& y) const {
  const Vector theta = stereographic_point(which, y);
  return stereographic_jacobian(which, y).transpose() * ambient(theta);
}

KFormField HorizonPullback::patch_field(SpherePatch which) const {
  const HorizonPullback self = *this;
  return KFormField(space_->dim() - 1, 1, [self, which](const Vector& y) { return self.patch(which, y); });
}

double patch_overlap_discrepancy(const HorizonPullback& pb, std::uint64_t seed, std::size_t n) {
  const int m = static_cast<int>(pb.dimension());
  double worst = 0.0;
  std::size_t used = 0;
  for (const Vector& theta : sample_unit_sphere(m, seed, 4 * n)) {
    if (std::abs(theta[m - 1]) > 0.5) continue;
    const Vector yn = stereographic_coords(SpherePatch::kNorth, theta);
    const Vector ys = stereographic_coords(SpherePatch::kSouth, theta);
    const double s = yn.squaredNorm();
    const Matrix t = (Matrix::Identity(m - 1, m - 1) * s - 2.0 * yn * yn.transpose()) / (s * s);
    const Vector north = pb.patch(SpherePatch::kNorth, yn);
    const Vector south = pb.patch(SpherePatch::kSouth, ys);
    worst = std::max(worst, (north - t.transpose() * south).norm() / std::max(1.0, north.norm()));
    if (++used == n) break;
  }
  return worst;
}

Vector standard_contact_form(const Vector& theta) {
  const ComplexStructure j(static_cast<int>(theta.size()) / 2);
  return j.matrix().transpose() * theta;
}

Matrix levi_matrix(const KFormField& patch_form, SpherePatch which, const Vector& y) {
  const int k = patch_form.dim();
  const int m = k + 1;
  const ComplexStructure cs(m / 2);
  const Matrix& j = cs.matrix();
  const Vector theta = stereographic_point(which, y);
  // Round-metric orthonormal J-adapted basis of the contact distribution at theta.
  std::vector<Vector> span{theta, j * theta};
  std::vector<Vector> basis;
  for (int c = 0; c < m && static_cast<int>(span.size()) < m; ++c) {
    Vector v = Vector::Unit(m, c);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& s : span) v -= v.dot(s) * s;
    }
    if (v.norm() <= 1e-6) continue;
    v.normalize();
    span.push_back(v);
    span.push_back(j * v);
    basis.push_back(v);
    basis.push_back(j * v);
  }
  const int q = static_cast<int>(basis.size());
  Matrix levi(q, q);
  if (q == 0) return levi;
  const Matrix p = pinv_tall(stereographic_jacobian(which, y));
  const Vector dtheta = exterior_derivative(patch_form).components(y);
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b) {
      const std::vector<ChartVector> pair{p * basis[a], p * (j * basis[b])};
      levi(a, b) = -eval_components(k, 2, dtheta, pair);
    }
  return levi;
}

double aitken(double a0, double a1, double a2) {
  const double denom = a2 - 2.0 * a1 + a0;
  const double scale = std::max({std::abs(a0), std::abs(a1), std::abs(a2), 1e-300});
  if (std::abs(denom) <= 1e-12 * scale) return a2;
  const double d = a2 - a1;
  const double corrected = a2 - d * d / denom;
  // Accept only a correction no larger than the last step.
  return std::abs(corrected - a2) <= std::abs(d) ? corrected : a2;
}

HorizonLimitReport horizon_limit_report(const SpacePtr& space, const std::vector<double>& r_grid,
                                        std::size_t n_samples, std::size_t n_levi, std::uint64_t seed) {
  if (space->kind() != SpaceKind::kComplexHyperbolic) {
    throw Error(ErrorCode::kKindMismatch, "horizon_limit_report: requires a complex hyperbolic space");
  }
  if (r_grid.size() < 3) throw Error(ErrorCode::kInvalidArgument, "horizon_limit_report: need at least three radii");
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    if (!(r_grid[i] > 0.0 && r_grid[i] <= space->chart_radius()) || (i > 0 && !(r_grid[i] > r_grid[i - 1]))) {
      throw Error(ErrorCode::kInvalidArgument, "horizon_limit_report: radii must increase inside the chart");
    }
  }
  const int m = space->dim();
  HorizonLimitReport rep;
  rep.r_grid = r_grid;
  rep.samples = sample_unit_sphere(m, seed, n_samples);
  std::vector<HorizonPullback> pbs;
  for (double r : r_grid) pbs.push_back(HorizonPullback::of_beta(space, r));

  std::vector<std::vector<Vector>> values(r_grid.size());
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    for (const auto& th : rep.samples) values[i].push_back(pbs[i].ambient(th));
  }
  for (std::size_t i = 0; i + 1 < r_grid.size(); ++i) {
    double d = 0.0;
    for (std::size_t s = 0; s < rep.samples.size(); ++s) d = std::max(d, (values[i + 1][s] - values[i][s]).norm());
    rep.sup_differences.push_back(d);
  }
  rep.differences_decreasing = true;
  rep.min_decay_factor = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < rep.sup_differences.size(); ++i) {
    const double a = rep.sup_differences[i], b = rep.sup_differences[i + 1];
    if (!(b < a)) rep.differences_decreasing = false;
    rep.min_decay_factor = std::min(rep.min_decay_factor, b > 0.0 ? a / b : std::numeric_limits<double>::infinity());
  }

  const std::size_t n = r_grid.size();
  double num = 0.0, den = 0.0;
  std::vector<Vector> standard;
  for (std::size_t s = 0; s < rep.samples.size(); ++s) {
    Vector lim(m);
    for (int c = 0; c < m; ++c) lim[c] = aitken(values[n - 3][s][c], values[n - 2][s][c], values[n - 1][s][c]);
    rep.limit.push_back(lim);
    standard.push_back(standard_contact_form(rep.samples[s]));
    num += lim.dot(standard.back());
    den += standard.back().squaredNorm();
  }
  rep.fitted_scale = num / den;
  double err = 0.0, ref = 0.0;
  for (std::size_t s = 0; s < rep.samples.size(); ++s) {
    err = std::max(err, (rep.limit[s] - rep.fitted_scale * standard[s]).norm());
    ref = std::max(ref, std::abs(rep.fitted_scale) * standard[s].norm());
  }
  rep.standard_discrepancy = ref > 0.0 ? err / ref : std::numeric_limits<double>::infinity();

  std::array<KFormField, 3> north{pbs[n - 3].patch_field(SpherePatch::kNorth), pbs[n - 2].patch_field(SpherePatch::kNorth),
                                  pbs[n - 1].patch_field(SpherePatch::kNorth)};
  std::array<KFormField, 3> south{pbs[n - 3].patch_field(SpherePatch::kSouth), pbs[n - 2].patch_field(SpherePatch::kSouth),
                                  pbs[n - 1].patch_field(SpherePatch::kSouth)};
  rep.levi_spd = true;
  for (const Vector& th : sample_unit_sphere(m, splitmix64(seed ^ 0x1e71ULL), n_levi)) {
    const SpherePatch which = th[m - 1] <= 0.0 ? SpherePatch::kNorth : SpherePatch::kSouth;
    const Vector y = stereographic_coords(which, th);
    const auto& fields = which == SpherePatch::kNorth ? north : south;
    const Matrix l0 = levi_matrix(fields[0], which, y), l1 = levi_matrix(fields[1], which, y),
                 l2 = levi_matrix(fields[2], which, y);
    Matrix lim(l2.rows(), l2.cols());
    for (Eigen::Index a = 0; a < l2.rows(); ++a)
      for (Eigen::Index b = 0; b < l2.cols(); ++b) lim(a, b) = aitken(l0(a, b), l1(a, b), l2(a, b));
    if (lim.size() == 0) {
      rep.levi_min_eigenvalue.push_back(std::numeric_limits<double>::infinity());
      rep.levi_max_eigenvalue.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    // The Levi form is Hermitian; its symmetric part carries the metric.
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (lim + lim.transpose()));
    rep.levi_min_eigenvalue.push_back(es.eigenvalues()[0]);
    rep.levi_max_eigenvalue.push_back(es.eigenvalues()[es.eigenvalues().size() - 1]);
    if (!(es.eigenvalues()[0] > 0.0)) rep.levi_spd = false;
  }
  rep.overlap_discrepancy = patch_overlap_discrepancy(pbs.back(), seed, 200);
  rep.passed = rep.differences_decreasing && rep.standard_discrepancy < 1e-2 && rep.levi_spd &&
               rep.overlap_discrepancy < 1e-8;
  return rep;
}

namespace {

// n(i, j) = (nabla_i F)_j by central differences of the components.
Matrix covariant_derivative_matrix(const ModelSpace& space, const KFormField& form, const ChartPoint& x,
                                   const FdSteps& steps) {
  const int m = space.dim();
  Matrix d = fd_jacobian(space, x, [&form](const ChartPoint& y) { return form.components(y); }, steps);
  const Vector f = form.components(x);
  const Tensor3 gamma = christoffel_raw(space, x);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int k = 0; k < m; ++k) s += gamma(k, i, j) * f[k];
      d(i, j) -= s;
    }
  return d;
}

}  // namespace

double covariant_derivative_norm(const ModelSpace& space, const KFormField& form, const ChartPoint& x,
                                 const FdSteps& steps) {
  if (form.degree() != 1) throw Error(ErrorCode::kInvalidArgument, "covariant_derivative_norm: expects a 1-form");
  const int m = space.dim();
  const Matrix d = covariant_derivative_matrix(space, form, x, steps);
  Eigen::LLT<Matrix> llt(space.metric_raw(x));
  const Matrix e = llt.matrixU().solve(Matrix::Identity(m, m));  // h-orthonormal columns
  return Eigen::JacobiSVD<Matrix>(e.transpose() * d * e).singularValues()[0];
}

double beta_derivative_sup(const ModelSpace& space, const ChartPoint& x, const FdSteps& steps) {
  const int m = space.dim();
  const ModelSpace* sp = &space;
  const KFormField beta(m, 1, [sp](const ChartPoint& y) { return beta_at(*sp, y); });
  const Matrix d = covariant_derivative_matrix(space, beta, x, steps);
  const SphereFrame frame = sphere_frame(space, x);
  Matrix tangent(m, m - 1), full(m, m);
  full.col(0) = frame.grad;
  for (int a = 0; a < m - 1; ++a) {
    tangent.col(a) = frame.vectors[a];
    full.col(a + 1) = frame.vectors[a];
  }
  return Eigen::JacobiSVD<Matrix>(tangent.transpose() * d * full).singularValues()[0];
}

KFormField kaehler_form(const SpacePtr& space) {
  const Matrix j = j_matrix(*space);
  const int m = space->dim();
  return KFormField(m, 2, [space, j, m](const ChartPoint& x) {
    const Matrix w = j.transpose() * space->metric_raw(x);
    const auto& idx = multi_indices(m, 2);
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a) out[static_cast<Eigen::Index>(a)] = w(idx[a][0], idx[a][1]);
    return out;
  });
}

}  // namespace negcurv
