#include "negcurv/primitive.hpp"

#include "negcurv/contact.hpp"
#include "negcurv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

namespace negcurv {

namespace {

bool is_base(const ChartPoint& x, const ChartPoint& base) { return (x - base).cwiseAbs().maxCoeff() == 0.0; }

// sinh(s) / sinh(r) without overflow for 0 <= s <= r.
double sinh_quotient(double s, double r) {
  if (r < 1.0) return std::sinh(s) / std::sinh(r);
  return std::exp(s - r) * (-std::expm1(-2.0 * s)) / (-std::expm1(-2.0 * r));
}

}  // namespace

ClosednessAudit closedness_audit(const ModelSpace& space, const KFormField& psi, int samples, double radius,
                                 std::uint64_t seed, double tol) {
  ClosednessAudit audit;
  audit.worst_point = Vector::Zero(space.dim());
  if (psi.degree() == space.dim() || samples <= 0) {
    audit.passed = true;  // top-degree forms are closed
    return audit;
  }
  const KFormField d = exterior_derivative(psi, &space);
  const auto points = sample_geodesic_ball(space, seed, static_cast<std::size_t>(samples), 0.0, radius);
  for (const ChartPoint& x : points) {
    const Matrix g = space.metric_raw(x);
    const double scale = 1.0 + h_norm_components(g, psi.degree(), psi.components(x));
    const double defect = h_norm_components(g, psi.degree() + 1, d.components(x)) / scale;
    if (defect >= audit.max_defect) {
      audit.max_defect = defect;
      audit.worst_point = x;
    }
  }
  audit.samples = samples;
  audit.passed = audit.max_defect <= tol;
  return audit;
}

PrimitiveProblem::PrimitiveProblem(SpacePtr space, ChartPoint base, KFormField psi, PrimitiveOptions opts)
    : space_(std::move(space)), base_(std::move(base)), psi_(std::move(psi)), opts_(opts) {
  if (!space_) throw Error(ErrorCode::kInvalidArgument, "PrimitiveProblem: null space");
  if (psi_.dim() != space_->dim()) throw Error(ErrorCode::kInvalidArgument, "PrimitiveProblem: form dimension mismatch");
  if (psi_.degree() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "PrimitiveProblem: the bounded-primitive construction needs degree k >= 2 (got k = " +
                    std::to_string(psi_.degree()) + ")");
  }
  if (opts_.quadrature_order < 1) throw Error(ErrorCode::kInvalidArgument, "PrimitiveProblem: quadrature order must be >= 1");
  space_->require_domain(base_, "PrimitiveProblem");
  const double radius = opts_.audit_radius > 0.0 ? opts_.audit_radius : space_->chart_radius();
  audit_ = closedness_audit(*space_, psi_, opts_.closedness_samples, radius, opts_.audit_seed, opts_.closedness_tol);
  if (!audit_.passed) {
    std::ostringstream os;
    os << "PrimitiveProblem: form failed the closedness audit (max |d psi| / (1 + |psi|) = " << audit_.max_defect
       << " > " << opts_.closedness_tol << ")";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
}

Vector primitive_at_order(const PrimitiveProblem& prob, const ChartPoint& x, int order) {
  const ModelSpace& space = prob.space();
  const int m = space.dim(), k = prob.degree();
  space.require_domain(x, "primitive_at");
  if (is_base(x, prob.base())) return Vector::Zero(binomial(m, k - 1));
  const QuadratureRule& rule = gauss_legendre_unit(order);
  const RadialTransport tr = radial_transport(space, prob.base(), x, rule.nodes, prob.options().method);
  Vector acc = Vector::Zero(binomial(m, k - 1));
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const Vector contracted = interior_components(m, k, prob.psi().components(tr.points[i]), tr.radial[i]);
    acc += rule.weights[i] * pullback_components(m, k - 1, contracted, tr.jacobian[i]);
  }
  return tr.r * acc;
}

Vector primitive_at(const PrimitiveProblem& prob, const ChartPoint& x) {
  const int n = prob.options().quadrature_order;
  Vector phi = primitive_at_order(prob, x, n);
  if (prob.options().check_convergence) {
    const Vector fine = primitive_at_order(prob, x, 2 * n);
    const double diff = (fine - phi).norm();
    if (diff > prob.options().convergence_tol * (1.0 + fine.norm())) {
      std::ostringstream os;
      os << "primitive_at: quadrature not converged (order " << n << " vs " << 2 * n << " differ by " << diff << ")";
      throw Error(ErrorCode::kConvergence, os.str());
    }
  }
  return phi;
}

KFormField primitive_field(const PrimitiveProblem& prob) {
  return KFormField(prob.space().dim(), prob.degree() - 1, [prob](const ChartPoint& x) { return primitive_at(prob, x); });
}

double sinh_ratio_bound(int k, double r) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "sinh_ratio_bound: k must be >= 2");
  if (!(r > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sinh_ratio_bound: r must be positive");
  if (k == 2) return std::tanh(0.5 * r);
  const auto res = integrate_adaptive([k, r](double s) { return std::pow(sinh_quotient(s, r), k - 1); }, 0.0, r, 1e-14);
  return res.value;
}

double linear_ratio_bound(int k, double r) {
  if (k < 1 || !(r >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "linear_ratio_bound: bad arguments");
  return r / k;
}

ChainSample chain_sample(const PrimitiveProblem& prob, const ChartPoint& x, int segment_points) {
  const ModelSpace& space = prob.space();
  const int m = space.dim(), k = prob.degree();
  const bool flat = space.kind() == SpaceKind::kEuclidean;
  ChainSample cs;
  cs.point = x;
  const Vector phi = primitive_at(prob, x);
  cs.primitive_norm = h_norm_components(space.metric_raw(x), k - 1, phi);

  const ChartPoint& base = prob.base();
  if (is_base(x, base)) {
    cs.segment_sup = h_norm_components(space.metric_raw(x), k, prob.psi().components(x));
    cs.chain_ok = true;
    return cs;
  }

  // Middle term on the quadrature nodes, segment sup on nodes plus a uniform grid.
  const QuadratureRule& rule = gauss_legendre_unit(prob.options().quadrature_order);
  std::vector<double> ts = rule.nodes;
  for (int j = 1; j <= segment_points; ++j) ts.push_back(static_cast<double>(j) / segment_points);
  const RadialTransport tr = radial_transport(space, base, x, ts, prob.options().method);
  cs.r = tr.r;
  auto profile = [&](double s) { return flat ? s / cs.r : sinh_quotient(s, cs.r); };

  double middle = 0.0, sup = h_norm_components(space.metric_raw(base), k, prob.psi().components(base));
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Matrix g = space.metric_raw(tr.points[i]);
    const Vector psi = prob.psi().components(tr.points[i]);
    sup = std::max(sup, h_norm_components(g, k, psi));
    if (i < rule.nodes.size()) {
      const double contracted = h_norm_components(g, k - 1, interior_components(m, k, psi, tr.radial[i]));
      middle += rule.weights[i] * std::pow(profile(ts[i] * cs.r), k - 1) * contracted;
    }
  }
  cs.middle = cs.r * middle;
  cs.segment_sup = sup;
  cs.ratio = flat ? linear_ratio_bound(k, cs.r) : sinh_ratio_bound(k, cs.r);
  cs.bound_segment = cs.ratio * sup;
  cs.chain_ok = cs.primitive_norm <= cs.middle * (1.0 + kChainTolerance) + kChainTolerance &&
                cs.middle <= cs.bound_segment * (1.0 + kChainTolerance) + kChainTolerance;
  return cs;
}

BoundCertificate bound_certificate(const PrimitiveProblem& prob, const CertificateOptions& opts) {
  const ModelSpace& space = prob.space();
  const int k = prob.degree();
  if (opts.n_samples == 0) throw Error(ErrorCode::kInvalidArgument, "bound_certificate: n_samples must be >= 1");
  BoundCertificate cert;
  cert.degree = k;
  cert.slack = opts.slack;
  cert.n_samples = opts.n_samples;
  cert.seed = opts.seed;
  cert.domain_radius = opts.r_max > 0.0 ? opts.r_max : space.chart_radius();
  cert.theorem_instance = space.kind() != SpaceKind::kEuclidean;
  cert.theoretical_ratio = cert.theorem_instance ? 1.0 / (k - 1) : linear_ratio_bound(k, cert.domain_radius);
  cert.label = cert.theorem_instance ? "curvature <= -1: uniform bound"
                                     : "flat control: domain-restricted, no uniform bound";

  const auto points = sample_geodesic_ball(space, opts.seed, opts.n_samples, opts.r_min, cert.domain_radius, opts.law);
  cert.samples.resize(points.size());
  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(points.size())));
  std::vector<std::exception_ptr> errors(points.size());
  auto worker = [&](int w) {
    for (std::size_t i = static_cast<std::size_t>(w); i < points.size(); i += static_cast<std::size_t>(jobs)) {
      try {
        cert.samples[i] = chain_sample(prob, points[i], opts.segment_points);
        cert.samples[i].index = i;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      throw Error(e.code(), "bound_certificate: sample " + std::to_string(i) + ": " + e.what());
    }
  }

  bool chain_ok = true;
  for (const auto& s : cert.samples) {
    cert.sup_primitive = std::max(cert.sup_primitive, s.primitive_norm);
    cert.sup_source = std::max(cert.sup_source, s.segment_sup);
    chain_ok = chain_ok && s.chain_ok;
  }
  const double global = cert.theoretical_ratio * cert.sup_source;
  for (auto& s : cert.samples) {
    s.bound_global = global;
    s.margin = global - s.primitive_norm;
  }
  cert.margin = global - cert.sup_primitive;
  cert.passed = chain_ok && cert.sup_primitive <= global * (1.0 + opts.slack);

  std::vector<ChainSample> sorted = cert.samples;
  auto rel = [](const ChainSample& s) { return s.bound_global > 0.0 ? s.margin / s.bound_global : s.margin; };
  std::stable_sort(sorted.begin(), sorted.end(), [&](const ChainSample& a, const ChainSample& b) { return rel(a) < rel(b); });
  sorted.resize(std::min<std::size_t>(10, sorted.size()));
  cert.worst = std::move(sorted);
  return cert;
}

PrimitiveProblem kaehler_problem(const SpacePtr& space, PrimitiveOptions opts) {
  if (!space || space->kind() != SpaceKind::kComplexHyperbolic) {
    throw Error(ErrorCode::kKindMismatch, "kaehler_primitive: requires a complex hyperbolic space");
  }
  return PrimitiveProblem(space, Vector::Zero(space->dim()), kaehler_form(space), opts);
}

KFormField kaehler_primitive(const SpacePtr& space, PrimitiveOptions opts) {
  return primitive_field(kaehler_problem(space, opts));
}

}  // namespace negcurv
