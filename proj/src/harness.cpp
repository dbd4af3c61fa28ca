#include "negcurv/harness.hpp"

#include "negcurv/connection.hpp"
#include "negcurv/contact.hpp"
#include "negcurv/forms.hpp"
#include "negcurv/geodesic.hpp"
#include "negcurv/primitive.hpp"
#include "negcurv/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#ifndef NEGCURV_VERSION
#define NEGCURV_VERSION "0.0.0"
#endif

namespace negcurv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double coth(double x) { return 1.0 / std::tanh(x); }

std::vector<double> linspace(double a, double b, int n) {
  if (n == 1) return {b};
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  v.back() = b;
  return v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_point(const Vector& x) {
  std::string s;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += (i ? "," : "") + fmt(x[i]);
  return s;
}

// Per-sample stream, keyed by the point itself so a replay sees the same draws.
std::mt19937_64 sample_rng(std::uint64_t seed, const Vector& x) {
  const std::string bytes(reinterpret_cast<const char*>(x.data()), sizeof(double) * static_cast<std::size_t>(x.size()));
  return std::mt19937_64(splitmix64(seed ^ fnv1a64(bytes)));
}

Vector gaussian(std::mt19937_64& rng, int m) {
  std::normal_distribution<double> n;
  Vector v(m);
  for (int i = 0; i < m; ++i) v[i] = n(rng);
  return v;
}

ResultRow make_row(std::size_t i, const char* q, const char* rel, double r, const Vector& x, double measured,
                   double bound) {
  ResultRow row;
  row.index = i;
  row.quantity = q;
  row.relation = rel;
  row.r = r;
  row.point = x;
  row.measured = measured;
  row.bound = bound;
  const std::string op = rel;
  if (op == "<=" || op == "<") {
    row.margin = bound - measured;
  } else if (op == ">=" || op == ">") {
    row.margin = measured - bound;
  } else {
    row.margin = kNaN;
  }
  if (op == "<=" || op == ">=") row.ok = row.margin >= 0.0;
  if (op == "<" || op == ">") row.ok = row.margin > 0.0;
  return row;
}

ResultRow upper(std::size_t i, const char* q, double r, const Vector& x, double v, double b) {
  return make_row(i, q, "<=", r, x, v, b);
}
ResultRow lower(std::size_t i, const char* q, double r, const Vector& x, double v, double b) {
  return make_row(i, q, ">=", r, x, v, b);
}
ResultRow info(std::size_t i, const char* q, double r, const Vector& x, double v) {
  return make_row(i, q, "", r, x, v, kNaN);
}

// measured in [lo - tol, hi + tol], reported against the nearer endpoint.
ResultRow interval_row(std::size_t i, const char* q, double r, const Vector& x, double v, double lo, double hi,
                       double tol) {
  const double to_hi = hi + tol - v, to_lo = v - (lo - tol);
  return to_hi <= to_lo ? make_row(i, q, "<=", r, x, v, hi + tol) : make_row(i, q, ">=", r, x, v, lo - tol);
}

[[noreturn]] void rethrow_with_context(const std::exception_ptr& e, std::size_t i, const Vector& x) {
  const std::string where = "sample " + std::to_string(i) + " at (" + format_point(x) + "): ";
  try {
    std::rethrow_exception(e);
  } catch (const Error& err) {
    throw Error(err.code(), where + err.what());
  } catch (const std::exception& err) {
    throw Error(ErrorCode::kInternal, where + err.what());
  }
}

using Rows = std::vector<ResultRow>;

// Evaluates fn(i, points[i]) on `jobs` threads with a strided partition and
// concatenates the results in index order.
template <typename F>
Rows map_samples(const std::vector<Vector>& points, int jobs, std::size_t first_index, F&& fn) {
  std::vector<Rows> out(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  const std::size_t nw = static_cast<std::size_t>(std::max(1, std::min<int>(jobs, static_cast<int>(points.size()))));
  auto worker = [&](std::size_t w) {
    for (std::size_t i = w; i < points.size(); i += nw) {
      try {
        out[i] = fn(first_index + i, points[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (nw == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < nw; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  Rows rows;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (errors[i]) rethrow_with_context(errors[i], first_index + i, points[i]);
    rows.insert(rows.end(), out[i].begin(), out[i].end());
  }
  return rows;
}

struct Context {
  ExperimentConfig cfg;
  SpacePtr space;
  FdSteps steps;
};

Context make_context(const ExperimentConfig& in) {
  Context c;
  c.cfg = resolve(in);
  c.space = make_model(c.cfg);
  c.steps.frame = c.cfg.fd_step;
  return c;
}

void require_point(const Context& c, const Vector& x) {
  if (x.size() != c.space->dim()) {
    throw Error(ErrorCode::kInvalidArgument, "replay: point has " + std::to_string(x.size()) + " coordinates, expected " +
                                                 std::to_string(c.space->dim()));
  }
  c.space->require_domain(x, "replay");
}

// ---- curvature audit -------------------------------------------------------

Rows curvature_rows(const Context& c, std::size_t i, const ChartPoint& x) {
  const ModelSpace& s = *c.space;
  const Tolerances& tol = c.cfg.tol;
  auto rng = sample_rng(c.cfg.seed, x);
  const Vector u = gaussian(rng, s.dim());
  const Vector v = gaussian(rng, s.dim());
  const CurvatureAudit a = audit_plane(s, x, u, v, DerivativePath::kClosedForm);
  const double fd = sectional_curvature(s, x, a.u, a.v, DerivativePath::kFiniteDifference, c.steps);
  const double r = s.origin_distance(x);

  double lo = -s.pinching() * s.pinching(), hi = -1.0;
  const bool space_form = s.kind() == SpaceKind::kEuclidean || s.kind() == SpaceKind::kHyperbolic;
  if (s.kind() == SpaceKind::kEuclidean) lo = hi = 0.0;
  Rows rows;
  rows.push_back(interval_row(i, "sectional_closed", r, x, a.sectional, lo, hi,
                              space_form ? tol.curvature_closed : tol.curvature_interval));
  rows.push_back(interval_row(i, "sectional_fd", r, x, fd, lo, hi, std::max(tol.curvature_fd, space_form ? 0.0 : tol.curvature_interval)));
  rows.push_back(info(i, "basis_discrepancy", r, x, a.basis_discrepancy));
  if (s.kind() == SpaceKind::kComplexHyperbolic) {
    const ChartVector ju = complex_structure_of(s).apply(a.u);
    const double kh = sectional_curvature(s, x, a.u, ju, DerivativePath::kClosedForm);
    const double kh_fd = sectional_curvature(s, x, a.u, ju, DerivativePath::kFiniteDifference, c.steps);
    rows.push_back(interval_row(i, "holomorphic_closed", r, x, kh, -4.0, -4.0, tol.holomorphic));
    rows.push_back(interval_row(i, "holomorphic_fd", r, x, kh_fd, -4.0, -4.0, tol.holomorphic));
  }
  return rows;
}

// ---- Jacobi comparison -----------------------------------------------------

Rows comparison_rows(const Context& c, std::size_t i, const ChartPoint& x) {
  const ModelSpace& s = *c.space;
  const int m = s.dim();
  const ChartPoint origin = Vector::Zero(m);
  const double r = s.origin_distance(x);
  if (!(r > 0.0)) throw Error(ErrorCode::kInvalidArgument, "comparison: sample at the base point");
  ChartVector dir = s.log_origin(x);
  dir /= s.norm(origin, dir);
  const GeodesicRay ray{origin, dir, r};
  const ChartVector radial = s.radial_unit(x);
  auto rng = sample_rng(c.cfg.seed, x);
  ChartVector xi = gaussian(rng, m);
  xi -= s.inner(x, xi, radial) * radial;
  // |xi| = sinh r, so eta(r) = 1 and deviations are relative.
  xi *= std::sinh(r) / s.norm(x, xi);
  OdeOptions ode;
  ode.richardson_tol = std::numeric_limits<double>::infinity();
  const JacobiSolution sol = jacobi_comparison(s, ray, r, xi, 200, ode);

  Rows rows;
  rows.push_back(upper(i, "monotonicity", r, x, sol.max_monotonicity_violation(), c.cfg.tol.monotonicity));
  if (s.kind() == SpaceKind::kHyperbolic) {
    rows.push_back(upper(i, "equality", r, x, sol.max_deviation_from_endpoint(), c.cfg.tol.equality));
  }
  rows.push_back(info(i, "eta_growth", r, x, sol.eta(sol.s.size() - 1) / sol.eta(0)));
  rows.push_back(upper(i, "richardson_error", r, x, sol.richardson_error, c.cfg.tol.richardson));
  return rows;
}

// ---- primitives --------------------------------------------------------------

KFormField source_form(const Context& c) {
  const ModelSpace& s = *c.space;
  switch (c.cfg.form) {
    case FormFixture::kVolume: return volume_form(s);
    case FormFixture::kKaehler: return kaehler_form(c.space);
    default: {
      MultiIndex idx(c.cfg.k);
      std::iota(idx.begin(), idx.end(), 0);
      return coordinate_form(s.dim(), idx);
    }
  }
}

PrimitiveOptions primitive_options(const Context& c) {
  PrimitiveOptions o;
  o.quadrature_order = c.cfg.quad_order;
  o.convergence_tol = c.cfg.tol.quadrature;
  o.closedness_tol = c.cfg.tol.closedness;
  o.audit_seed = c.cfg.seed;
  return o;
}

// |Phi| where a closed form is known, as a function of r.
std::function<double(double)> primitive_reference(const Context& c) {
  const ModelSpace& s = *c.space;
  const int m = s.dim();
  const bool volume = c.cfg.form == FormFixture::kVolume;
  if (s.kind() == SpaceKind::kHyperbolic && volume) return [m](double r) { return r > 0.0 ? sinh_ratio_bound(m, r) : 0.0; };
  if (s.kind() == SpaceKind::kEuclidean && volume) return [m](double r) { return r / m; };
  if (s.kind() == SpaceKind::kComplexHyperbolic && m == 2 && c.cfg.form == FormFixture::kKaehler) {
    return [](double r) { return 0.5 * std::tanh(r); };
  }
  return {};
}

struct PrimitiveRun {
  PrimitiveProblem problem;
  KFormField dphi;
  KFormField phi;
  std::function<double(double)> reference;
};

PrimitiveRun make_primitive_run(const Context& c) {
  PrimitiveProblem prob(c.space, Vector::Zero(c.space->dim()), source_form(c), primitive_options(c));
  KFormField phi = primitive_field(prob);
  KFormField dphi = exterior_derivative(phi, c.space.get(), c.steps);
  return {std::move(prob), std::move(dphi), std::move(phi), primitive_reference(c)};
}

Rows exactness_rows(const Context& c, const PrimitiveRun& pr, std::size_t i, const ChartPoint& x, double sup_source) {
  const ModelSpace& s = *c.space;
  const int k = pr.problem.degree();
  const Vector diff = pr.dphi.components(x) - pr.problem.psi().components(x);
  const double err = h_norm_components(s.metric_raw(x), k, diff);
  return {upper(i, "exactness", s.origin_distance(x), x, err, c.cfg.tol.exactness * (1.0 + sup_source))};
}

Rows kaehler_extra_rows(const Context& c, const PrimitiveRun& pr, std::size_t i, const ChartPoint& x) {
  const double n = covariant_derivative_norm(*c.space, pr.phi, x, c.steps);
  return {info(i, "nabla_norm", c.space->origin_distance(x), x, n)};
}

double chain_bound(const ChainSample& s) { return s.bound_segment * (1.0 + kChainTolerance) + kChainTolerance; }

void reference_row(Rows& rows, const Context& c, const PrimitiveRun& pr, const ChainSample& s) {
  if (!pr.reference) return;
  rows.push_back(upper(s.index, "closed_form", s.r, s.point, std::abs(s.primitive_norm - pr.reference(s.r)),
                       c.cfg.tol.closed_form));
}

// Largest |Phi|_h / comass(Phi) over the given samples; 1 for 1-forms.
double comass_factor(const Context& c, const PrimitiveRun& pr, const std::vector<ChainSample>& samples) {
  const int k = pr.problem.degree() - 1;
  if (k == 1) return 1.0;
  std::mt19937_64 rng(splitmix64(c.cfg.seed ^ 0xc0a55));
  double factor = 1.0;
  for (const auto& s : samples) {
    const Matrix g = c.space->metric_raw(s.point);
    const Vector phi = primitive_at(pr.problem, s.point);
    const double comass = comass_estimate(g, k, phi, rng, 400);
    if (comass > 0.0) factor = std::max(factor, h_norm_components(g, k, phi) / comass);
  }
  return factor;
}

void fill_primitive(const Context& c, ResultRecord& rec) {
  const bool kaehler = c.cfg.experiment == Experiment::kKaehlerPrimitive;
  const PrimitiveRun pr = make_primitive_run(c);
  CertificateOptions co;
  co.n_samples = c.cfg.samples;
  co.seed = c.cfg.seed;
  co.r_min = *c.cfg.r_min;
  co.r_max = *c.cfg.r_max;
  co.slack = c.cfg.tol.bound_slack;
  co.jobs = c.cfg.jobs;
  const BoundCertificate cert = bound_certificate(pr.problem, co);
  const double global = cert.theoretical_ratio * cert.sup_source * (1.0 + cert.slack);

  std::vector<Vector> pts;
  for (const auto& s : cert.samples) {
    rec.rows.push_back(upper(s.index, "primitive_bound", s.r, s.point, s.primitive_norm, global));
    ResultRow chain = upper(s.index, "estimate_chain", s.r, s.point, s.primitive_norm, chain_bound(s));
    chain.ok = chain.ok && s.chain_ok;
    rec.rows.push_back(chain);
    reference_row(rec.rows, c, pr, s);
    pts.push_back(s.point);
  }
  const std::size_t n_exact = kaehler ? pts.size() : std::min<std::size_t>(pts.size(), c.cfg.exactness_samples);
  pts.resize(n_exact);
  const Rows ex = map_samples(pts, c.cfg.jobs, 0, [&](std::size_t i, const ChartPoint& x) {
    Rows r = exactness_rows(c, pr, i, x, cert.sup_source);
    if (kaehler) {
      const Rows extra = kaehler_extra_rows(c, pr, i, x);
      r.insert(r.end(), extra.begin(), extra.end());
    }
    return r;
  });
  rec.rows.insert(rec.rows.end(), ex.begin(), ex.end());

  rec.statistics["sup_primitive"] = cert.sup_primitive;
  rec.statistics["sup_source"] = cert.sup_source;
  rec.statistics["theoretical_ratio"] = cert.theoretical_ratio;
  rec.statistics["observed_ratio"] = cert.sup_source > 0.0 ? cert.sup_primitive / cert.sup_source : 0.0;
  rec.statistics["certificate_margin"] = cert.margin;
  rec.statistics["closedness_defect"] = pr.problem.audit().max_defect;
  rec.statistics["domain_radius"] = cert.domain_radius;
  rec.statistics["degree"] = cert.degree;
  rec.statistics["comass_factor"] = comass_factor(c, pr, cert.worst);
  rec.notes["comass_factor"] = "estimated max of |Phi|_h / comass(Phi) at the tightest samples; bounds use |.|_h";
  if (kaehler) {
    double nabla = 0.0;
    for (const auto& r : ex)
      if (r.quantity == "nabla_norm") nabla = std::max(nabla, r.measured);
    rec.statistics["nabla_sup"] = nabla;
    rec.notes["nabla_sup"] = "measured sup |nabla beta*|; no bound is asserted";
  }
  rec.notes["label"] = cert.label;
  rec.notes["theorem_instance"] = cert.theorem_instance ? "true" : "false";
  rec.notes["form"] = form_name(c.cfg.form);
}

Rows primitive_replay(const Context& c, const ChartPoint& x) {
  require_point(c, x);
  const PrimitiveRun pr = make_primitive_run(c);
  ChainSample s = chain_sample(pr.problem, x);
  const double ratio = c.space->kind() == SpaceKind::kEuclidean ? linear_ratio_bound(pr.problem.degree(), *c.cfg.r_max)
                                                                : 1.0 / (pr.problem.degree() - 1);
  Rows rows;
  rows.push_back(upper(0, "primitive_bound", s.r, x, s.primitive_norm, ratio * s.segment_sup * (1.0 + c.cfg.tol.bound_slack)));
  ResultRow chain = upper(0, "estimate_chain", s.r, x, s.primitive_norm, chain_bound(s));
  chain.ok = chain.ok && s.chain_ok;
  rows.push_back(chain);
  reference_row(rows, c, pr, s);
  const Rows ex = exactness_rows(c, pr, 0, x, s.segment_sup);
  rows.insert(rows.end(), ex.begin(), ex.end());
  if (c.cfg.experiment == Experiment::kKaehlerPrimitive) {
    const Rows extra = kaehler_extra_rows(c, pr, 0, x);
    rows.insert(rows.end(), extra.begin(), extra.end());
  }
  return rows;
}

// ---- contact structure -----------------------------------------------------

Rows contact_rows(const Context& c, std::size_t i, const ChartPoint& x) {
  const ModelSpace& s = *c.space;
  const Tolerances& tol = c.cfg.tol;
  const double r = s.origin_distance(x);
  Rows rows;

  const Vector b = beta_at(s, x);
  rows.push_back(upper(i, "beta_norm", r, x, std::abs(h_norm_components(s.metric_raw(x), 1, b) - 1.0), tol.beta_norm));
  const ChartVector grad = gradient_r(s, x);
  const ChartVector jgrad = complex_structure_of(s).apply(grad);
  rows.push_back(upper(i, "beta_pairing", r, x, std::max(std::abs(b.dot(grad)), std::abs(b.dot(jgrad) + 1.0)), tol.beta_norm));

  const SphereFrame frame = sphere_frame(s, x);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, cf_err = 0.0, dual = 0.0;
  for (std::size_t a = 0; a < frame.vectors.size(); ++a) {
    const double cf = hessian_r(s, x, frame.vectors[a]);
    const double fd = hessian_r(s, x, frame.vectors[a], DerivativePath::kFiniteDifference);
    const double expected = a == 0 ? 2.0 * coth(2.0 * r) : coth(r);
    lo = std::min(lo, cf);
    hi = std::max(hi, cf);
    cf_err = std::max(cf_err, std::abs(cf - expected));
    dual = std::max(dual, std::abs(cf - fd));
  }
  rows.push_back(lower(i, "hessian_lower", r, x, lo, coth(r) - tol.hessian));
  rows.push_back(upper(i, "hessian_upper", r, x, hi, 2.0 * coth(2.0 * r) + tol.hessian));
  rows.push_back(upper(i, "hessian_closed_form", r, x, cf_err, tol.hessian));
  rows.push_back(upper(i, "hessian_dual_path", r, x, dual, tol.hessian));

  // On CH^1 the contact distribution is trivial.
  if (s.dim() > 2) {
    auto rng = sample_rng(c.cfg.seed, x);
    ChartVector X = gaussian(rng, s.dim());
    for (int pass = 0; pass < 2; ++pass) {
      for (const ChartVector& e : {frame.grad, frame.vectors[0]}) X -= s.inner(x, X, e) * e;
      X /= s.norm(x, X);
    }
    rows.push_back(lower(i, "levi", r, x, levi_positivity(s, x, X) / 2.0, 1.0 - tol.levi));
  }

  const std::vector<ChartPoint> one{x};
  const double d_cf = contact_defect(s, one).min_value;
  const double d_fd = contact_defect(s, one, true).min_value;
  rows.push_back(make_row(i, "contact_defect", ">", r, x, std::min(d_cf, d_fd), 0.0));
  const double closed = contact_defect_closed_form(s.dim() / 2, r);
  rows.push_back(info(i, "contact_defect_rel_error", r, x, std::abs(d_cf - closed) / closed));
  rows.push_back(info(i, "nabla_beta", r, x, beta_derivative_sup(s, x, c.steps)));
  return rows;
}

void fill_contact(const Context& c, ResultRecord& rec) {
  const auto grid = linspace(*c.cfg.r_min, *c.cfg.r_max, c.cfg.r_steps);
  const std::size_t per = (c.cfg.samples + grid.size() - 1) / grid.size();
  std::vector<Vector> pts;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto sphere = sample_geodesic_sphere(*c.space, splitmix64(c.cfg.seed + j), per, grid[j]);
    pts.insert(pts.end(), sphere.begin(), sphere.end());
  }
  rec.rows = map_samples(pts, c.cfg.jobs, 0, [&](std::size_t i, const ChartPoint& x) { return contact_rows(c, i, x); });
  double nabla = 0.0, levi = std::numeric_limits<double>::infinity(), defect = levi;
  for (const auto& r : rec.rows) {
    if (r.quantity == "nabla_beta") nabla = std::max(nabla, r.measured);
    if (r.quantity == "levi") levi = std::min(levi, r.measured);
    if (r.quantity == "contact_defect") defect = std::min(defect, r.measured);
  }
  rec.statistics["nabla_beta_sup"] = nabla;
  if (std::isfinite(levi)) rec.statistics["levi_min_ratio"] = levi;
  rec.statistics["contact_defect_min"] = defect;
  rec.statistics["points"] = static_cast<double>(pts.size());
}

// ---- sphere at infinity --------------------------------------------------------

Rows equicontinuity_rows(const Context& c, const std::vector<double>& grid) {
  const ModelSpace& s = *c.space;
  const std::size_t n = std::min<std::size_t>(c.cfg.samples, 64);
  std::vector<Vector> radii;
  for (double r : grid) radii.push_back(Vector::Constant(1, r));
  return map_samples(radii, c.cfg.jobs, 0, [&](std::size_t j, const Vector& rv) {
    double sup = 0.0;
    ChartPoint worst;
    for (const ChartPoint& x : sample_geodesic_sphere(s, c.cfg.seed, n, rv[0])) {
      const double v = beta_derivative_sup(s, x, c.steps);
      if (v >= sup) {
        sup = v;
        worst = x;
      }
    }
    return Rows{upper(j, "equicontinuity", rv[0], worst, sup, s.pinching() * (1.0 + c.cfg.tol.equicontinuity))};
  });
}

void fill_horizon(const Context& c, ResultRecord& rec) {
  const auto grid = linspace(*c.cfg.r_min, *c.cfg.r_max, c.cfg.r_steps);
  const HorizonLimitReport rep =
      horizon_limit_report(c.space, grid, c.cfg.samples, static_cast<std::size_t>(c.cfg.levi_samples), c.cfg.seed);
  const Vector none;
  for (std::size_t j = 0; j < rep.sup_differences.size(); ++j) {
    const double d = rep.sup_differences[j];
    rec.rows.push_back(j == 0 ? info(j, "sup_difference", grid[j + 1], none, d)
                              : make_row(j, "sup_difference", "<", grid[j + 1], none, d, rep.sup_differences[j - 1]));
  }
  const double scale = rep.fitted_scale;
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    const Vector expected = scale * standard_contact_form(rep.samples[i]);
    const double disc = (rep.limit[i] - expected).norm() / std::abs(scale);
    rec.rows.push_back(upper(i, "limit_discrepancy", grid.back(), rep.samples[i], disc, c.cfg.tol.horizon_fit));
  }
  for (std::size_t i = 0; i < rep.levi_min_eigenvalue.size(); ++i) {
    rec.rows.push_back(make_row(i, "levi_min_eigenvalue", ">", grid.back(), none, rep.levi_min_eigenvalue[i], 0.0));
  }
  rec.rows.push_back(upper(0, "overlap", grid.back(), none, rep.overlap_discrepancy, c.cfg.tol.overlap));
  const Rows eq = equicontinuity_rows(c, grid);
  rec.rows.insert(rec.rows.end(), eq.begin(), eq.end());

  rec.statistics["fitted_scale"] = rep.fitted_scale;
  rec.statistics["min_decay_factor"] = rep.min_decay_factor;
  rec.statistics["standard_discrepancy"] = rep.standard_discrepancy;
  rec.statistics["overlap_discrepancy"] = rep.overlap_discrepancy;
  rec.statistics["levi_min"] = *std::min_element(rep.levi_min_eigenvalue.begin(), rep.levi_min_eigenvalue.end());
  rec.statistics["levi_max"] = *std::max_element(rep.levi_max_eigenvalue.begin(), rep.levi_max_eigenvalue.end());
  rec.notes["convergence"] = "Cauchy behaviour on the full r-grid; no rate is asserted";
}

Rows horizon_replay(const Context& c, const Vector& point) {
  const int m = c.space->dim();
  if (point.size() != m || !(point.norm() > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "replay: horizon samples are nonzero directions in R^" + std::to_string(m));
  }
  const Vector theta = point.normalized();
  const auto grid = linspace(*c.cfg.r_min, *c.cfg.r_max, c.cfg.r_steps);
  std::vector<Vector> values;
  for (double r : grid) values.push_back(HorizonPullback::of_beta(c.space, r).ambient(theta));
  Rows rows;
  double prev = 0.0;
  for (std::size_t j = 1; j < grid.size(); ++j) {
    const double d = (values[j] - values[j - 1]).norm();
    rows.push_back(j == 1 ? info(j - 1, "sup_difference", grid[j], theta, d)
                          : make_row(j - 1, "sup_difference", "<", grid[j], theta, d, prev));
    prev = d;
  }
  const std::size_t n = values.size();
  Vector limit(m);
  for (int a = 0; a < m; ++a) limit[a] = aitken(values[n - 3][a], values[n - 2][a], values[n - 1][a]);
  const double disc = (limit - standard_contact_form(theta)).norm();
  rows.push_back(upper(0, "limit_discrepancy", grid.back(), theta, disc, c.cfg.tol.horizon_fit));
  return rows;
}

// ---- records -------------------------------------------------------------------

std::vector<CheckResult> summarize(const Rows& rows) {
  std::vector<CheckResult> checks;
  std::vector<std::string> order;
  std::map<std::string, std::size_t> at;
  for (const auto& r : rows) {
    if (r.relation.empty()) continue;
    auto it = at.find(r.quantity);
    if (it == at.end()) {
      at[r.quantity] = checks.size();
      CheckResult c;
      c.name = r.quantity;
      c.relation = r.relation;
      c.worst = r.measured;
      c.bound = r.bound;
      c.margin = r.margin;
      c.passed = r.ok;
      c.worst_index = r.index;
      c.worst_point = r.point;
      checks.push_back(c);
      continue;
    }
    CheckResult& c = checks[it->second];
    const bool worse = (!r.ok && c.passed) || (r.ok == c.passed && r.margin < c.margin);
    if (worse) {
      c.relation = r.relation;
      c.worst = r.measured;
      c.bound = r.bound;
      c.margin = r.margin;
      c.worst_index = r.index;
      c.worst_point = r.point;
    }
    c.passed = c.passed && r.ok;
  }
  return checks;
}

ResultRecord begin_record(const Context& c) {
  ResultRecord rec;
  rec.version = library_version();
  rec.experiment = experiment_name(c.cfg.experiment);
  rec.config = c.cfg;
  rec.config_json = canonical_json(c.cfg);
  rec.config_hash = config_hash(c.cfg);
  rec.convention = convention_tag();
  std::string dim = std::to_string(c.cfg.dim);
  rec.experiment_id = rec.experiment + "-" + model_name(c.cfg.model) + dim + "-" + rec.config_hash.substr(8, 8);
  return rec;
}

void finish_record(ResultRecord& rec) {
  rec.checks = summarize(rec.rows);
  rec.passed = !rec.checks.empty();
  for (const auto& c : rec.checks) rec.passed = rec.passed && c.passed;
}

std::vector<ChartPoint> ball_points(const Context& c, RadialLaw law) {
  return sample_geodesic_ball(*c.space, c.cfg.seed, c.cfg.samples, *c.cfg.r_min, *c.cfg.r_max, law);
}

}  // namespace

const char* library_version() { return NEGCURV_VERSION; }

const char* convention_tag() {
  return "negcurv-conventions/1: R = -R_std, sec(u,v) = <R(u,v)u,v>/|u^v|^2; J e_2i = e_2i+1 (interleaved); "
         "omega(X,Y) = h(JX,Y); beta = J^T dr; Levi(X) = -dbeta(X,JX) = Hess r(X,X) + Hess r(JX,JX); "
         "form norms: inner product on Lambda^k from h-orthonormal coframes; base point p = chart origin";
}

ResultRecord run(const ExperimentConfig& in) {
  require_valid(in);
  const auto t0 = std::chrono::steady_clock::now();
  const Context c = make_context(in);
  ResultRecord rec = begin_record(c);
  switch (c.cfg.experiment) {
    case Experiment::kCurvatureAudit: {
      rec.rows = map_samples(ball_points(c, RadialLaw::kVolume), c.cfg.jobs, 0,
                             [&](std::size_t i, const ChartPoint& x) { return curvature_rows(c, i, x); });
      double lo = std::numeric_limits<double>::infinity(), hi = -lo, basis = 0.0;
      for (const auto& r : rec.rows) {
        if (r.quantity == "sectional_closed") {
          lo = std::min(lo, r.measured);
          hi = std::max(hi, r.measured);
        }
        if (r.quantity == "basis_discrepancy") basis = std::max(basis, r.measured);
      }
      rec.statistics["sectional_min"] = lo;
      rec.statistics["sectional_max"] = hi;
      rec.statistics["basis_discrepancy_max"] = basis;
      break;
    }
    case Experiment::kComparison: {
      rec.rows = map_samples(ball_points(c, RadialLaw::kUniform), c.cfg.jobs, 0,
                             [&](std::size_t i, const ChartPoint& x) { return comparison_rows(c, i, x); });
      double growth = std::numeric_limits<double>::infinity();
      for (const auto& r : rec.rows)
        if (r.quantity == "eta_growth") growth = std::min(growth, r.measured);
      rec.statistics["eta_growth_min"] = growth;
      break;
    }
    case Experiment::kPrimitive:
    case Experiment::kKaehlerPrimitive: fill_primitive(c, rec); break;
    case Experiment::kContact: fill_contact(c, rec); break;
    case Experiment::kHorizon: fill_horizon(c, rec); break;
  }
  finish_record(rec);
  rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

ResultRecord replay(const ExperimentConfig& in, const Vector& point) {
  require_valid(in);
  const auto t0 = std::chrono::steady_clock::now();
  const Context c = make_context(in);
  ResultRecord rec = begin_record(c);
  rec.experiment_id += "-replay";
  rec.notes["replay_point"] = format_point(point);
  switch (c.cfg.experiment) {
    case Experiment::kCurvatureAudit:
      require_point(c, point);
      rec.rows = curvature_rows(c, 0, point);
      break;
    case Experiment::kComparison:
      require_point(c, point);
      rec.rows = comparison_rows(c, 0, point);
      break;
    case Experiment::kPrimitive:
    case Experiment::kKaehlerPrimitive: rec.rows = primitive_replay(c, point); break;
    case Experiment::kContact:
      require_point(c, point);
      rec.rows = contact_rows(c, 0, point);
      break;
    case Experiment::kHorizon: rec.rows = horizon_replay(c, point); break;
  }
  finish_record(rec);
  rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

double summary_distance(const ResultRecord& a, const ResultRecord& b) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto diff = [](double x, double y) {
    if (std::isnan(x) && std::isnan(y)) return 0.0;
    return std::abs(x - y) / std::max(1.0, std::abs(x));
  };
  if (a.checks.size() != b.checks.size() || a.statistics.size() != b.statistics.size() || a.passed != b.passed) return kInf;
  double d = 0.0;
  for (std::size_t i = 0; i < a.checks.size(); ++i) {
    const auto &x = a.checks[i], &y = b.checks[i];
    if (x.name != y.name || x.passed != y.passed || x.worst_index != y.worst_index) return kInf;
    d = std::max({d, diff(x.worst, y.worst), diff(x.bound, y.bound), diff(x.margin, y.margin)});
  }
  for (const auto& [k, v] : a.statistics) {
    const auto it = b.statistics.find(k);
    if (it == b.statistics.end()) return kInf;
    d = std::max(d, diff(v, it->second));
  }
  return d;
}

std::string summary_text(const ResultRecord& rec) {
  std::ostringstream os;
  os << rec.experiment_id << "  config " << rec.config_hash << "\n";
  for (const auto& c : rec.checks) {
    os << (c.passed ? "  PASS  " : "  FAIL  ") << c.name << ": worst " << fmt(c.worst) << " " << c.relation << " "
       << fmt(c.bound) << " (margin " << fmt(c.margin) << ", sample " << c.worst_index << ")\n";
    if (!c.passed && c.worst_point.size() > 0) {
      os << "        offending point: " << format_point(c.worst_point) << "  (rerun with --replay "
         << format_point(c.worst_point) << ")\n";
    }
  }
  for (const auto& [k, v] : rec.statistics) os << "  " << k << " = " << fmt(v) << "\n";
  for (const auto& [k, v] : rec.notes) os << "  " << k << ": " << v << "\n";
  os << "RESULT " << (rec.passed ? "PASS" : "FAIL") << "\n";
  return os.str();
}

}  // namespace negcurv
