#include "negcurv/model_space.hpp"

#include "negcurv/connection.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace negcurv {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "ok";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kTruncation: return "truncation";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kConvergence: return "convergence";
    case ErrorCode::kKindMismatch: return "kind_mismatch";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

const char* space_kind_name(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::kEuclidean: return "euclidean";
    case SpaceKind::kHyperbolic: return "hyperbolic";
    case SpaceKind::kComplexHyperbolic: return "chn";
    case SpaceKind::kWarpedProfile: return "warped";
  }
  return "unknown";
}

ComplexStructure::ComplexStructure(int complex_dim) : n_(complex_dim) {
  if (complex_dim < 1) throw Error(ErrorCode::kInvalidArgument, "complex dimension must be >= 1");
  mat_ = Matrix::Zero(2 * n_, 2 * n_);
  for (int i = 0; i < n_; ++i) {
    mat_(2 * i + 1, 2 * i) = 1.0;
    mat_(2 * i, 2 * i + 1) = -1.0;
  }
}

ChartVector ComplexStructure::apply(const ChartVector& v) const {
  ChartVector out(v.size());
  for (int i = 0; i < n_; ++i) {
    out[2 * i] = -v[2 * i + 1];
    out[2 * i + 1] = v[2 * i];
  }
  return out;
}

ModelSpace::ModelSpace(SpaceKind kind, int dim, double pinching, double chart_radius)
    : kind_(kind), dim_(dim), pinching_(pinching), chart_radius_(chart_radius) {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "dimension must be >= 1");
  if (!(chart_radius > 0.0)) throw Error(ErrorCode::kInvalidArgument, "chart radius must be positive");
}

std::string ModelSpace::name() const {
  std::ostringstream os;
  os << space_kind_name(kind_) << "(" << dim_ << ")";
  return os.str();
}

bool ModelSpace::formula_valid(const ChartPoint&) const { return true; }

double ModelSpace::boundary_distance(const ChartPoint&) const {
  return std::numeric_limits<double>::infinity();
}

bool ModelSpace::in_domain(const ChartPoint& x) const {
  if (x.size() != dim_ || !x.allFinite() || !formula_valid(x)) return false;
  return origin_distance(x) <= chart_radius_ * (1.0 + 1e-9) + kStencilMargin;
}

void ModelSpace::require_domain(const ChartPoint& x, const char* op) const {
  if (x.size() != dim_) {
    std::ostringstream os;
    os << op << ": point has dimension " << x.size() << ", expected " << dim_;
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  if (!in_domain(x)) {
    std::ostringstream os;
    os << op << ": point outside truncated chart of " << name() << " (radius "
       << chart_radius_ << ")";
    throw Error(ErrorCode::kDomain, os.str());
  }
}

Matrix ModelSpace::metric_at(const ChartPoint& x) const {
  require_domain(x, "metric_at");
  return metric_raw(x);
}

double ModelSpace::inner(const ChartPoint& x, const ChartVector& u, const ChartVector& v) const {
  return u.dot(metric_raw(x) * v);
}

double ModelSpace::norm(const ChartPoint& x, const ChartVector& v) const {
  return std::sqrt(std::max(0.0, inner(x, v, v)));
}

ChartPoint ModelSpace::scale_origin(const ChartPoint& x, double t) const {
  return exp_origin(t * log_origin(x));
}

namespace {

// Metrics of the form g = a(s) I + b(s) sum_alpha (L_alpha x)(L_alpha x)^T,
// s = |x|^2. Both model families used here have this shape.
struct StructureCoefficients {
  double a, da, dda;
  double b, db, ddb;
};

MetricJet structured_jet(const Vector& x, const StructureCoefficients& c,
                         const std::vector<Matrix>& lin, int order) {
  const int m = static_cast<int>(x.size());
  std::vector<Vector> ys;
  ys.reserve(lin.size());
  Matrix p = Matrix::Zero(m, m);
  for (const auto& l : lin) {
    ys.push_back(l * x);
    p += ys.back() * ys.back().transpose();
  }

  MetricJet jet;
  jet.g = c.a * Matrix::Identity(m, m) + c.b * p;
  if (order < 1) return jet;

  std::vector<Matrix> dp(m, Matrix::Zero(m, m));
  for (int k = 0; k < m; ++k) {
    for (std::size_t al = 0; al < lin.size(); ++al) {
      const Matrix& l = lin[al];
      const Vector& y = ys[al];
      dp[k] += l.col(k) * y.transpose() + y * l.col(k).transpose();
    }
  }
  jet.dg.resize(m);
  for (int k = 0; k < m; ++k) {
    jet.dg[k] = 2.0 * x[k] * c.da * Matrix::Identity(m, m) + 2.0 * x[k] * c.db * p + c.b * dp[k];
  }
  if (order < 2) return jet;

  jet.ddg.resize(static_cast<std::size_t>(m) * m);
  for (int k = 0; k < m; ++k) {
    for (int l = k; l < m; ++l) {
      const double dkl = (k == l) ? 1.0 : 0.0;
      Matrix h = (2.0 * dkl * c.da + 4.0 * x[k] * x[l] * c.dda) * Matrix::Identity(m, m) +
                 (2.0 * dkl * c.db + 4.0 * x[k] * x[l] * c.ddb) * p +
                 2.0 * x[k] * c.db * dp[l] + 2.0 * x[l] * c.db * dp[k];
      for (const auto& lm : lin) {
        h += c.b * (lm.col(k) * lm.col(l).transpose() + lm.col(l) * lm.col(k).transpose());
      }
      jet.ddg[k * m + l] = h;
      jet.ddg[l * m + k] = h;
    }
  }
  return jet;
}

class EuclideanSpace final : public ModelSpace {
 public:
  EuclideanSpace(int dim, double radius) : ModelSpace(SpaceKind::kEuclidean, dim, 0.0, radius) {}

  Matrix metric_raw(const ChartPoint&) const override { return Matrix::Identity(dim(), dim()); }

  MetricJet metric_jet(const ChartPoint&, int order) const override {
    const int m = dim();
    MetricJet jet;
    jet.g = Matrix::Identity(m, m);
    if (order >= 1) jet.dg.assign(m, Matrix::Zero(m, m));
    if (order >= 2) jet.ddg.assign(static_cast<std::size_t>(m) * m, Matrix::Zero(m, m));
    return jet;
  }

  double origin_distance(const ChartPoint& x) const override { return x.norm(); }
  ChartPoint exp_origin(const ChartVector& v) const override { return v; }
  ChartVector log_origin(const ChartPoint& x) const override { return x; }
  ChartVector radial_unit(const ChartPoint& x) const override { return x / x.norm(); }
  ChartPoint scale_origin(const ChartPoint& x, double t) const override { return t * x; }
  Matrix scaling_jacobian_origin(const ChartPoint&, double t) const override {
    return t * Matrix::Identity(dim(), dim());
  }
  bool has_global_exp() const override { return true; }
};

// Rotationally symmetric metric dr^2 + phi(r)^2 dOmega^2 in normal coordinates.
// phi(r)/r is an even entire function, stored as a power series in s = r^2, so
// the Cartesian metric is smooth through the origin with no special casing.
class NormalCoordinateSpace final : public ModelSpace {
 public:
  NormalCoordinateSpace(SpaceKind kind, int dim, double pinching, double radius,
                        std::vector<double> phi_over_r)
      : ModelSpace(kind, dim, pinching, radius), p_(std::move(phi_over_r)) {
    q_.assign(p_.begin() + 1, p_.end());
  }

  Matrix metric_raw(const ChartPoint& x) const override { return metric_jet(x, 0).g; }

  MetricJet metric_jet(const ChartPoint& x, int order) const override {
    const double s = x.squaredNorm();
    double p, dp, ddp, q, dq, ddq;
    horner(p_, s, p, dp, ddp);
    horner(q_, s, q, dq, ddq);
    StructureCoefficients c;
    c.a = p * p;
    c.da = 2.0 * p * dp;
    c.dda = 2.0 * (dp * dp + p * ddp);
    c.b = -q * (p + 1.0);
    c.db = -(dq * (p + 1.0) + q * dp);
    c.ddb = -(ddq * (p + 1.0) + 2.0 * dq * dp + q * ddp);
    static thread_local std::vector<Matrix> identity_lin;
    if (identity_lin.empty() || identity_lin[0].rows() != dim()) {
      identity_lin = {Matrix::Identity(dim(), dim())};
    }
    return structured_jet(x, c, identity_lin, order);
  }

  double origin_distance(const ChartPoint& x) const override { return x.norm(); }
  ChartPoint exp_origin(const ChartVector& v) const override { return v; }
  ChartVector log_origin(const ChartPoint& x) const override { return x; }
  ChartVector radial_unit(const ChartPoint& x) const override { return x / x.norm(); }
  ChartPoint scale_origin(const ChartPoint& x, double t) const override { return t * x; }
  Matrix scaling_jacobian_origin(const ChartPoint&, double t) const override {
    return t * Matrix::Identity(dim(), dim());
  }

 private:
  static void horner(const std::vector<double>& c, double s, double& f, double& df, double& ddf) {
    f = df = ddf = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
      ddf = ddf * s + 2.0 * df;
      df = df * s + f;
      f = f * s + *it;
    }
  }

  std::vector<double> p_;
  std::vector<double> q_;
};

// Unit-ball model with metric scale * [ |v|^2/(1-s) + |<v,z>|^2/(1-s)^2 ].
class ComplexHyperbolicSpace final : public ModelSpace {
 public:
  ComplexHyperbolicSpace(int complex_dim, double radius, double scale)
      : ModelSpace(SpaceKind::kComplexHyperbolic, 2 * complex_dim, 2.0, radius),
        j_(complex_dim),
        scale_(scale),
        root_scale_(std::sqrt(scale)) {
    lin_ = {Matrix::Identity(dim(), dim()), j_.matrix()};
  }

  const ComplexStructure& complex_structure() const { return j_; }
  double scale() const { return scale_; }

  bool formula_valid(const ChartPoint& x) const override { return x.squaredNorm() < 1.0; }
  double boundary_distance(const ChartPoint& x) const override { return 1.0 - x.norm(); }

  Matrix metric_raw(const ChartPoint& x) const override { return metric_jet(x, 0).g; }

  MetricJet metric_jet(const ChartPoint& x, int order) const override {
    const double s = x.squaredNorm();
    if (!(s < 1.0)) throw Error(ErrorCode::kDomain, "complex hyperbolic metric evaluated outside the unit ball");
    const double u = 1.0 / (1.0 - s);
    const double u2 = u * u;
    StructureCoefficients c;
    c.a = scale_ * u;
    c.da = scale_ * u2;
    c.dda = scale_ * 2.0 * u2 * u;
    c.b = scale_ * u2;
    c.db = scale_ * 2.0 * u2 * u;
    c.ddb = scale_ * 6.0 * u2 * u2;
    return structured_jet(x, c, lin_, order);
  }

  double origin_distance(const ChartPoint& x) const override {
    return root_scale_ * std::atanh(x.norm());
  }
  ChartPoint exp_origin(const ChartVector& v) const override {
    const double len = v.norm();
    if (len == 0.0) return v;
    return (std::tanh(len) / len) * v;
  }
  ChartVector log_origin(const ChartPoint& x) const override {
    const double rho = x.norm();
    if (rho == 0.0) return x;
    return (std::atanh(rho) / rho) * x;
  }
  ChartVector radial_unit(const ChartPoint& x) const override {
    const double rho = x.norm();
    return ((1.0 - rho * rho) / (rho * root_scale_)) * x;
  }
  ChartPoint scale_origin(const ChartPoint& x, double t) const override {
    const double rho = x.norm();
    if (rho == 0.0) return x;
    return (std::tanh(t * std::atanh(rho)) / rho) * x;
  }
  Matrix scaling_jacobian_origin(const ChartPoint& x, double t) const override {
    // tau_t(x) = psi(rho) x with psi = tanh(t atanh rho) / rho.
    const int m = dim();
    const double rho = x.norm();
    double psi, dpsi_over_rho;
    if (rho < 1e-5) {
      const double r2 = rho * rho;
      psi = t + t * (1.0 - t * t) * r2 / 3.0;
      dpsi_over_rho = 2.0 * t * (1.0 - t * t) / 3.0;
    } else {
      const double th = std::tanh(t * std::atanh(rho));
      psi = th / rho;
      const double dth = t * (1.0 - th * th) / (1.0 - rho * rho);
      dpsi_over_rho = (dth * rho - th) / (rho * rho * rho);
    }
    return psi * Matrix::Identity(m, m) + dpsi_over_rho * x * x.transpose();
  }

 private:
  ComplexStructure j_;
  double scale_;
  double root_scale_;
  std::vector<Matrix> lin_;
};

std::vector<double> sinh_over_r_series(int terms) {
  std::vector<double> p(terms);
  double fact = 1.0;  // (2j+1)!
  for (int j = 0; j < terms; ++j) {
    if (j > 0) fact *= (2.0 * j) * (2.0 * j + 1.0);
    p[j] = 1.0 / fact;
  }
  return p;
}

// phi'' = (1 + c r^2) phi, phi(0) = 0, phi'(0) = 1 as a power series.
std::vector<double> warped_series(double c, int terms) {
  const int top = 2 * terms + 2;
  std::vector<double> a(top + 1, 0.0);
  a[1] = 1.0;
  for (int n = 0; n + 2 <= top; ++n) {
    const double prev = (n >= 2) ? a[n - 2] : 0.0;
    a[n + 2] = (a[n] + c * prev) / ((n + 2.0) * (n + 1.0));
  }
  std::vector<double> p(terms);
  for (int j = 0; j < terms; ++j) p[j] = a[2 * j + 1];
  return p;
}

}  // namespace

double warped_radial_curvature(double warp_coefficient, double r) {
  return -(1.0 + warp_coefficient * r * r);
}

SpacePtr make_euclidean(int dim, double chart_radius) {
  return std::make_shared<EuclideanSpace>(dim, chart_radius);
}

SpacePtr make_hyperbolic(int dim, double chart_radius) {
  if (dim < 2) throw Error(ErrorCode::kInvalidArgument, "hyperbolic space needs dimension >= 2");
  return std::make_shared<NormalCoordinateSpace>(SpaceKind::kHyperbolic, dim, 1.0, chart_radius,
                                                 sinh_over_r_series(64));
}

SpacePtr make_warped_profile(int dim, double warp_coefficient, double chart_radius) {
  if (dim < 2) throw Error(ErrorCode::kInvalidArgument, "warped profile needs dimension >= 2");
  if (warp_coefficient < 0.0) throw Error(ErrorCode::kInvalidArgument, "warp coefficient must be >= 0");
  // Radial curvature -(1 + c r^2) dominates the tangential one.
  const double a = std::sqrt(1.0 + warp_coefficient * chart_radius * chart_radius);
  return std::make_shared<NormalCoordinateSpace>(SpaceKind::kWarpedProfile, dim, a, chart_radius,
                                                 warped_series(warp_coefficient, 160));
}

double complex_hyperbolic_metric_scale() {
  // Audit the unscaled Bergman-type metric at the origin: the maximum
  // sectional curvature there (attained on totally real planes) fixes the
  // scale that turns it into -1. Sectional curvature scales as 1/scale.
  static const double scale = [] {
    ComplexHyperbolicSpace unit(2, 1.0, 1.0);
    const ChartPoint origin = Vector::Zero(4);
    const Vector e0 = Vector::Unit(4, 0);
    const Vector e1 = Vector::Unit(4, 1);
    const Vector e2 = Vector::Unit(4, 2);
    const double totally_real = sectional_curvature(unit, origin, e0, e2, DerivativePath::kClosedForm);
    const double holomorphic = sectional_curvature(unit, origin, e0, e1, DerivativePath::kClosedForm);
    return -std::max(totally_real, holomorphic);
  }();
  return scale;
}

SpacePtr make_complex_hyperbolic(int complex_dim, double chart_radius) {
  return std::make_shared<ComplexHyperbolicSpace>(complex_dim, chart_radius,
                                                  complex_hyperbolic_metric_scale());
}

SpacePtr make_space(const SpaceSpec& spec) {
  switch (spec.kind) {
    case SpaceKind::kEuclidean: return make_euclidean(spec.dim, spec.chart_radius);
    case SpaceKind::kHyperbolic: return make_hyperbolic(spec.dim, spec.chart_radius);
    case SpaceKind::kComplexHyperbolic:
      if (spec.dim % 2 != 0) throw Error(ErrorCode::kInvalidArgument, "chn needs an even real dimension");
      return make_complex_hyperbolic(spec.dim / 2, spec.chart_radius);
    case SpaceKind::kWarpedProfile:
      return make_warped_profile(spec.dim, spec.warp_coefficient, spec.chart_radius);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown space kind");
}

const ComplexStructure& complex_structure_of(const ModelSpace& space) {
  const auto* ch = dynamic_cast<const ComplexHyperbolicSpace*>(&space);
  if (ch == nullptr) {
    throw Error(ErrorCode::kKindMismatch, space.name() + " has no complex structure");
  }
  return ch->complex_structure();
}

}  // namespace negcurv
