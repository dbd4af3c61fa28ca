#include "negcurv/geodesic.hpp"

#include "negcurv/connection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace negcurv {

namespace {

struct FlowState {
  Vector x, v;
  Matrix j, jd;  // empty when only the geodesic is integrated
};

void check_state(const ModelSpace& space, const FlowState& st, const FlowState& last, double param,
                 const OdeOptions& opts) {
  bool ok = st.x.allFinite() && st.v.allFinite() && space.formula_valid(st.x);
  if (ok && opts.enforce_chart) ok = space.origin_distance(st.x) <= space.chart_radius() * (1.0 + 1e-6);
  if (!ok) {
    std::ostringstream os;
    os << "geodesic left the truncated chart of " << space.name() << " at parameter " << param;
    throw TruncationError(os.str(), param, last.x, last.v);
  }
}

FlowState derivative(const ModelSpace& space, const FlowState& st) {
  const int m = space.dim();
  const bool linearized = st.j.size() > 0;
  const Tensor3 gamma = christoffel_raw(space, st.x);
  FlowState d;
  d.x = st.v;
  d.v = Vector::Zero(m);
  Matrix b(m, m);  // b(i, c) = 2 Gamma^i_ac v^a
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int a = 0; a < m; ++a) {
      for (int c = 0; c < m; ++c) acc += gamma(i, a, c) * st.v[a] * st.v[c];
    }
    d.v[i] = -acc;
    if (linearized) {
      for (int c = 0; c < m; ++c) {
        double s = 0.0;
        for (int a = 0; a < m; ++a) s += gamma(i, a, c) * st.v[a];
        b(i, c) = 2.0 * s;
      }
    }
  }
  if (!linearized) return d;

  const Tensor4 dgamma = christoffel_derivative_raw(space, st.x);
  Matrix a(m, m);  // a(i, k) = d_k Gamma^i_bc v^b v^c
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k) {
      double acc = 0.0;
      for (int p = 0; p < m; ++p) {
        for (int q = 0; q < m; ++q) acc += dgamma(k, i, p, q) * st.v[p] * st.v[q];
      }
      a(i, k) = acc;
    }
  }
  d.j = st.jd;
  d.jd = -a * st.j - b * st.jd;
  return d;
}

FlowState axpy(const FlowState& st, double h, const FlowState& d) {
  FlowState out;
  out.x = st.x + h * d.x;
  out.v = st.v + h * d.v;
  if (st.j.size() > 0) {
    out.j = st.j + h * d.j;
    out.jd = st.jd + h * d.jd;
  }
  return out;
}

FlowState rk4_step(const ModelSpace& space, const FlowState& st, double h) {
  const FlowState k1 = derivative(space, st);
  const FlowState k2 = derivative(space, axpy(st, 0.5 * h, k1));
  const FlowState k3 = derivative(space, axpy(st, 0.5 * h, k2));
  const FlowState k4 = derivative(space, axpy(st, h, k3));
  FlowState out;
  out.x = st.x + (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
  out.v = st.v + (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
  if (st.j.size() > 0) {
    out.j = st.j + (h / 6.0) * (k1.j + 2.0 * k2.j + 2.0 * k3.j + k4.j);
    out.jd = st.jd + (h / 6.0) * (k1.jd + 2.0 * k2.jd + 2.0 * k3.jd + k4.jd);
  }
  return out;
}

// Integrates through sorted record parameters; `refine` multiplies the step count.
std::vector<FlowState> integrate(const ModelSpace& space, FlowState st, const std::vector<double>& records,
                                 const OdeOptions& opts, int refine) {
  const double total = records.empty() ? 0.0 : records.back();
  const int n_total = std::max(opts.min_steps, static_cast<int>(std::ceil(1.0 / opts.max_step_fraction))) * refine;
  const double h_max = total / n_total;
  std::vector<FlowState> out;
  out.reserve(records.size());
  double param = 0.0;
  for (double target : records) {
    const double len = target - param;
    if (len > 0.0) {
      const int n = std::max(1, static_cast<int>(std::ceil(len / h_max - 1e-9)));
      const double h = len / n;
      for (int i = 0; i < n; ++i) {
        FlowState next = rk4_step(space, st, h);
        check_state(space, next, st, param + (i + 1) * h, opts);
        st = std::move(next);
      }
    }
    param = target;
    out.push_back(st);
  }
  return out;
}

double state_distance(const FlowState& a, const FlowState& b) {
  double d = (a.x - b.x).cwiseAbs().maxCoeff() / std::max(1.0, a.x.cwiseAbs().maxCoeff());
  if (a.j.size() > 0) {
    const double scale = std::max(1.0, a.j.cwiseAbs().maxCoeff());
    d = std::max(d, (a.j - b.j).cwiseAbs().maxCoeff() / scale);
  }
  return d;
}

std::vector<double> validated_records(const std::vector<double>& params) {
  std::vector<double> rec = params;
  for (double p : rec) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorCode::kInvalidArgument, "record parameters must be finite and >= 0");
  }
  if (!std::is_sorted(rec.begin(), rec.end())) throw Error(ErrorCode::kInvalidArgument, "record parameters must be sorted");
  return rec;
}

bool is_origin(const ChartPoint& p) { return p.cwiseAbs().maxCoeff() == 0.0; }

}  // namespace

GeodesicState geodesic_flow(const ModelSpace& space, const GeodesicRay& ray, double s, const OdeOptions& opts) {
  space.require_domain(ray.base, "geodesic_flow");
  if (ray.direction.size() != space.dim()) throw Error(ErrorCode::kInvalidArgument, "geodesic_flow: direction dimension mismatch");
  const double speed = space.norm(ray.base, ray.direction);
  if (std::abs(speed - 1.0) > 1e-8) throw Error(ErrorCode::kInvalidArgument, "geodesic_flow: direction must be unit in h");
  if (!(s >= 0.0) || s > ray.max_param * (1.0 + 1e-12)) throw Error(ErrorCode::kInvalidArgument, "geodesic_flow: parameter outside [0, max_param]");
  if (s == 0.0) return {ray.base, ray.direction};

  FlowState st{ray.base, ray.direction, Matrix(), Matrix()};
  const auto coarse = integrate(space, st, {s}, opts, 1);
  if (opts.richardson) {
    const auto fine = integrate(space, st, {s}, opts, 2);
    const double err = state_distance(coarse.back(), fine.back()) / 15.0;
    if (err > opts.richardson_tol) {
      std::ostringstream os;
      os << "geodesic_flow: Richardson error estimate " << err << " exceeds " << opts.richardson_tol;
      throw Error(ErrorCode::kConvergence, os.str());
    }
    return {fine.back().x, fine.back().v};
  }
  return {coarse.back().x, coarse.back().v};
}

LinearizedFlow integrate_linearized(const ModelSpace& space, const ChartPoint& x0, const ChartVector& v0,
                                    const std::vector<double>& record_params, const OdeOptions& opts) {
  const int m = space.dim();
  const auto records = validated_records(record_params);
  FlowState st{x0, v0, Matrix::Zero(m, m), Matrix::Identity(m, m)};
  auto states = integrate(space, st, records, opts, 1);
  LinearizedFlow flow;
  if (opts.richardson && !records.empty() && records.back() > 0.0) {
    auto fine = integrate(space, st, records, opts, 2);
    double err = 0.0;
    for (std::size_t i = 0; i < fine.size(); ++i) err = std::max(err, state_distance(states[i], fine[i]) / 15.0);
    flow.richardson_error = err;
    if (err > opts.richardson_tol) {
      std::ostringstream os;
      os << "Jacobi integration: Richardson error estimate " << err << " exceeds " << opts.richardson_tol;
      throw Error(ErrorCode::kConvergence, os.str());
    }
    states = std::move(fine);
  }
  flow.params = records;
  for (auto& s : states) {
    flow.x.push_back(std::move(s.x));
    flow.v.push_back(std::move(s.v));
    flow.jac.push_back(std::move(s.j));
  }
  return flow;
}

ChartPoint exp_map(const ModelSpace& space, const ChartPoint& base, const ChartVector& v, const OdeOptions& opts) {
  space.require_domain(base, "exp_map");
  if (v.size() != space.dim()) throw Error(ErrorCode::kInvalidArgument, "exp_map: vector dimension mismatch");
  if (space.has_global_exp()) return base + v;
  if (is_origin(base)) {
    ChartPoint y = space.exp_origin(v);
    space.require_domain(y, "exp_map");
    return y;
  }
  if (v.cwiseAbs().maxCoeff() == 0.0) return base;
  FlowState st{base, v, Matrix(), Matrix()};
  const auto coarse = integrate(space, st, {1.0}, opts, 1);
  if (!opts.richardson) return coarse.back().x;
  const auto fine = integrate(space, st, {1.0}, opts, 2);
  const double err = state_distance(coarse.back(), fine.back()) / 15.0;
  if (err > opts.richardson_tol) throw Error(ErrorCode::kConvergence, "exp_map: Richardson check failed");
  return fine.back().x;
}

ChartVector log_map(const ModelSpace& space, const ChartPoint& base, const ChartPoint& x, const OdeOptions& opts) {
  space.require_domain(base, "log_map");
  space.require_domain(x, "log_map");
  if (space.has_global_exp()) return x - base;
  if (is_origin(base)) return space.log_origin(x);
  if ((x - base).cwiseAbs().maxCoeff() == 0.0) return Vector::Zero(space.dim());

  // Newton shooting. The initial guess is exact to first order at base.
  OdeOptions inner = opts;
  inner.richardson = false;
  ChartVector v = x - base;
  const double tol = 1e-11 * std::max(1.0, x.norm());
  for (int iter = 0; iter < 60; ++iter) {
    const LinearizedFlow flow = integrate_linearized(space, base, v, {1.0}, inner);
    const Vector resid = flow.x.back() - x;
    if (resid.norm() < tol) return v;
    const Vector step = flow.jac.back().partialPivLu().solve(resid);
    double damping = 1.0;
    for (int tries = 0; tries < 30; ++tries) {
      const ChartVector trial = v - damping * step;
      try {
        FlowState st{base, trial, Matrix(), Matrix()};
        const auto end = integrate(space, st, {1.0}, inner, 1);
        if ((end.back().x - x).norm() < resid.norm() || damping < 1e-6) {
          v = trial;
          break;
        }
      } catch (const TruncationError&) {
      }
      damping *= 0.5;
    }
  }
  throw Error(ErrorCode::kConvergence, "log_map: Newton shooting did not converge");
}

double distance(const ModelSpace& space, const ChartPoint& base, const ChartPoint& x) {
  if (is_origin(base)) {
    space.require_domain(x, "distance");
    return space.origin_distance(x);
  }
  const ChartVector v = log_map(space, base, x);
  return space.norm(base, v);
}

ChartPoint geodesic_scaling(const ModelSpace& space, const ChartPoint& base, const ChartPoint& x, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "geodesic_scaling: t must lie in [0, 1]");
  space.require_domain(base, "geodesic_scaling");
  space.require_domain(x, "geodesic_scaling");
  if (t == 0.0) return base;
  if (t == 1.0) return x;
  if (is_origin(base)) return space.scale_origin(x, t);
  return exp_map(space, base, t * log_map(space, base, x));
}

RadialTransport radial_transport(const ModelSpace& space, const ChartPoint& base, const ChartPoint& x,
                                 const std::vector<double>& ts, ScalingMethod method, const OdeOptions& opts) {
  space.require_domain(base, "radial_transport");
  space.require_domain(x, "radial_transport");
  for (double t : ts) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "radial_transport: t must lie in [0, 1]");
  }
  const bool origin = is_origin(base);
  if (method == ScalingMethod::kAuto) method = origin ? ScalingMethod::kClosedForm : ScalingMethod::kJacobi;
  if (method == ScalingMethod::kClosedForm && !origin) {
    throw Error(ErrorCode::kInvalidArgument, "radial_transport: closed form requires base at the chart origin");
  }

  RadialTransport out;
  out.t = ts;
  const int m = space.dim();
  if (method == ScalingMethod::kClosedForm) {
    out.r = space.origin_distance(x);
    if (!(out.r > 0.0)) throw Error(ErrorCode::kDegenerate, "radial_transport: x coincides with the base point");
    const ChartVector dir0 = space.log_origin(x) / out.r;  // unit at the origin
    for (double t : ts) {
      const ChartPoint y = space.scale_origin(x, t);
      out.points.push_back(y);
      out.radial.push_back(t > 0.0 && y.cwiseAbs().maxCoeff() > 0.0 ? space.radial_unit(y) : dir0);
      out.jacobian.push_back(space.scaling_jacobian_origin(x, t));
    }
    return out;
  }

  const ChartVector v = log_map(space, base, x, opts);
  out.r = space.norm(base, v);
  if (!(out.r > 0.0)) throw Error(ErrorCode::kDegenerate, "radial_transport: x coincides with the base point");
  const ChartVector u = v / out.r;

  // Sorted unique parameters, plus the endpoint for the boundary condition.
  std::vector<double> params;
  for (double t : ts) params.push_back(t * out.r);
  params.push_back(out.r);
  std::sort(params.begin(), params.end());
  params.erase(std::unique(params.begin(), params.end()), params.end());
  OdeOptions o = opts;
  o.enforce_chart = false;
  const LinearizedFlow flow = integrate_linearized(space, base, u, params, o);
  const auto lu = flow.jac.back().partialPivLu();
  const Matrix inv_end = lu.solve(Matrix::Identity(m, m));
  for (double t : ts) {
    const auto it = std::lower_bound(params.begin(), params.end(), t * out.r);
    const std::size_t idx = static_cast<std::size_t>(it - params.begin());
    if (t == 1.0) {
      out.points.push_back(x);
      out.jacobian.push_back(Matrix::Identity(m, m));
    } else {
      out.points.push_back(flow.x[idx]);
      out.jacobian.push_back(flow.jac[idx] * inv_end);
    }
    out.radial.push_back(flow.v[idx]);
  }
  return out;
}

ChartVector pushforward_scaling(const ModelSpace& space, const ChartPoint& base, const ChartPoint& x, double t,
                                const ChartVector& xi, const OdeOptions& opts) {
  if (xi.size() != space.dim()) throw Error(ErrorCode::kInvalidArgument, "pushforward_scaling: vector dimension mismatch");
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "pushforward_scaling: t must lie in [0, 1]");
  space.require_domain(x, "pushforward_scaling");
  if ((x - base).cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorCode::kDegenerate, "pushforward_scaling: radial direction undefined at the base point");
  }
  if (t == 1.0) return xi;
  const RadialTransport tr = radial_transport(space, base, x, {t}, ScalingMethod::kJacobi, opts);
  return tr.jacobian.front() * xi;
}

double JacobiSolution::eta(std::size_t i) const { return norm[i] / std::sinh(s[i]); }

double JacobiSolution::max_monotonicity_violation() const {
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) worst = std::max(worst, eta(i) - eta(i + 1));
  return worst;
}

double JacobiSolution::max_deviation_from_endpoint() const {
  if (s.empty()) return 0.0;
  const double end = eta(s.size() - 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) worst = std::max(worst, std::abs(eta(i) - end));
  return worst;
}

JacobiSolution jacobi_comparison(const ModelSpace& space, const GeodesicRay& ray, double r,
                                 const ChartVector& xi_perp, int n_samples, const OdeOptions& opts) {
  space.require_domain(ray.base, "jacobi_comparison");
  if (!(r > 0.0) || r > ray.max_param * (1.0 + 1e-12)) throw Error(ErrorCode::kInvalidArgument, "jacobi_comparison: need 0 < r <= max_param");
  if (n_samples < 1) throw Error(ErrorCode::kInvalidArgument, "jacobi_comparison: n_samples must be >= 1");
  const int m = space.dim();
  if (ray.direction.size() != m || xi_perp.size() != m) throw Error(ErrorCode::kInvalidArgument, "jacobi_comparison: dimension mismatch");
  if (std::abs(space.norm(ray.base, ray.direction) - 1.0) > 1e-8) throw Error(ErrorCode::kInvalidArgument, "jacobi_comparison: direction must be unit in h");

  std::vector<double> params;
  for (int i = 1; i <= n_samples; ++i) params.push_back(r * i / n_samples);
  params.back() = r;
  const LinearizedFlow flow = integrate_linearized(space, ray.base, ray.direction, params, opts);

  const ChartPoint& end = flow.x.back();
  const Matrix g_end = space.metric_raw(end);
  const double xi_norm = std::sqrt(xi_perp.dot(g_end * xi_perp));
  const double vel = std::sqrt(flow.v.back().dot(g_end * flow.v.back()));
  const double along = xi_perp.dot(g_end * flow.v.back());
  if (std::abs(along) > 1e-4 * std::max(1.0, xi_norm * vel)) {
    throw Error(ErrorCode::kInvalidArgument, "jacobi_comparison: xi is not orthogonal to the ray at its endpoint");
  }
  // Remove the component left by integration error in the endpoint velocity.
  const ChartVector xi = xi_perp - (along / (vel * vel)) * flow.v.back();
  const Vector w = flow.jac.back().partialPivLu().solve(xi);

  JacobiSolution sol;
  sol.ray = ray;
  sol.boundary_norm = xi_norm;
  sol.richardson_error = flow.richardson_error;
  for (std::size_t i = 0; i < params.size(); ++i) {
    sol.s.push_back(params[i]);
    const Vector jv = (i + 1 == params.size()) ? xi : Vector(flow.jac[i] * w);
    sol.norm.push_back(space.norm(flow.x[i], jv));
  }
  return sol;
}

RatioCheckReport ratio_monotone_check(const std::vector<double>& grid, const std::vector<double>& f,
                                      const std::vector<double>& g, double slack) {
  const std::size_t n = grid.size();
  if (f.size() != n || g.size() != n || n < 2) throw Error(ErrorCode::kInvalidArgument, "ratio_monotone_check: need matching grids of size >= 2");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(f[i] > 0.0) || !(g[i] > 0.0)) throw Error(ErrorCode::kInvalidArgument, "ratio_monotone_check: samples must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw Error(ErrorCode::kInvalidArgument, "ratio_monotone_check: grid must be increasing");
  }
  RatioCheckReport rep;
  rep.precondition_ok = true;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = f[i] / g[i], b = f[i + 1] / g[i + 1];
    if (b < a - slack * std::abs(a)) {
      rep.precondition_ok = false;
      rep.first_precondition_violation = static_cast<int>(i + 1);
      break;
    }
  }
  rep.ratios.assign(n, 0.0);
  double cf = 0.0, cg = 0.0;
  rep.passed = true;
  for (std::size_t i = 1; i < n; ++i) {
    const double h = grid[i] - grid[i - 1];
    cf += 0.5 * h * (f[i] + f[i - 1]);
    cg += 0.5 * h * (g[i] + g[i - 1]);
    rep.ratios[i] = cf / cg;
    if (i >= 2 && rep.passed && rep.ratios[i] < rep.ratios[i - 1] - slack * std::abs(rep.ratios[i - 1])) {
      rep.passed = false;
      rep.first_violation = static_cast<int>(i);
    }
  }
  return rep;
}

}  // namespace negcurv
