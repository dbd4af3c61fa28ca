#include "negcurv/connection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace negcurv {

double fd_step(const ModelSpace& space, const ChartPoint& x, double base, double boundary_fraction) {
  double h = base * std::max(1.0, x.norm());
  const double bd = space.boundary_distance(x);
  if (std::isfinite(bd)) {
    if (!(bd > 0.0)) throw Error(ErrorCode::kDomain, "finite-difference stencil at chart boundary");
    h = std::min(h, boundary_fraction * bd);
  }
  if (h < 1e-14) throw Error(ErrorCode::kDomain, "finite-difference step underflow near chart boundary");
  return h;
}

Matrix fd_jacobian(const ModelSpace& space, const ChartPoint& x,
                   const std::function<Vector(const ChartPoint&)>& f, const FdSteps& steps) {
  const int m = space.dim();
  Eigen::LLT<Matrix> llt(space.metric_raw(x));
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::kDegenerate, "fd_jacobian: metric is not positive definite");
  const Matrix frame = llt.matrixU().solve(Matrix::Identity(m, m));
  Matrix disp(m, m);
  Matrix delta;
  for (int a = 0; a < m; ++a) {
    const ChartPoint xp = x + steps.frame * frame.col(a);
    const ChartPoint xm = x - steps.frame * frame.col(a);
    if (!space.formula_valid(xp) || !space.formula_valid(xm)) {
      throw Error(ErrorCode::kDomain, "finite-difference stencil leaves the chart");
    }
    disp.col(a) = xp - xm;
    const Vector df = f(xp) - f(xm);
    if (a == 0) delta.resize(m, df.size());
    delta.row(a) = df.transpose();
  }
  return disp.transpose().partialPivLu().solve(delta);
}

namespace {

Tensor3 christoffel_fd(const ModelSpace& space, const ChartPoint& x, const FdSteps& steps) {
  const int m = space.dim();
  auto flat_metric = [&space, m](const ChartPoint& y) -> Vector {
    return Eigen::Map<const Vector>(space.metric_raw(y).eval().data(), m * m);
  };
  const Matrix jac = fd_jacobian(space, x, flat_metric, steps);
  MetricJet jet;
  jet.g = space.metric_raw(x);
  jet.dg.resize(m);
  for (int k = 0; k < m; ++k) jet.dg[k] = Eigen::Map<const Matrix>(jac.row(k).eval().data(), m, m);
  return christoffel_from_jet(jet);
}

}  // namespace

Tensor3 christoffel_from_jet(const MetricJet& jet) {
  const int m = static_cast<int>(jet.g.rows());
  const Matrix ginv = jet.g.ldlt().solve(Matrix::Identity(m, m));
  // first kind: S(k, i, j) = d_i g_kj + d_j g_ki - d_k g_ij
  Tensor3 gamma(m);
  Vector s(m);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      for (int k = 0; k < m; ++k) {
        s[k] = jet.dg[i](k, j) + jet.dg[j](k, i) - jet.dg[k](i, j);
      }
      const Vector up = 0.5 * (ginv * s);
      for (int l = 0; l < m; ++l) {
        gamma(l, i, j) = up[l];
        gamma(l, j, i) = up[l];
      }
    }
  }
  return gamma;
}

Tensor3 christoffel_raw(const ModelSpace& space, const ChartPoint& x, DerivativePath path,
                        const FdSteps& steps) {
  if (path == DerivativePath::kFiniteDifference) return christoffel_fd(space, x, steps);
  return christoffel_from_jet(space.metric_jet(x, 1));
}

Tensor3 christoffel_at(const ModelSpace& space, const ChartPoint& x, DerivativePath path,
                       const FdSteps& steps) {
  space.require_domain(x, "christoffel_at");
  return christoffel_raw(space, x, path, steps);
}

Tensor4 christoffel_derivative_raw(const ModelSpace& space, const ChartPoint& x, DerivativePath path,
                                   const FdSteps& steps) {
  const int m = space.dim();
  Tensor4 dgamma(m);
  if (path == DerivativePath::kFiniteDifference) {
    FdSteps nested = steps;
    nested.frame = steps.curvature;
    auto flat_gamma = [&space, &nested](const ChartPoint& y) -> Vector {
      const Tensor3 gamma = christoffel_fd(space, y, nested);
      return Eigen::Map<const Vector>(gamma.data().data(), static_cast<Eigen::Index>(gamma.data().size()));
    };
    const Matrix jac = fd_jacobian(space, x, flat_gamma, nested);
    for (int p = 0; p < m; ++p)
      for (int l = 0; l < m; ++l)
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) dgamma(p, l, i, j) = jac(p, (l * m + i) * m + j);
    return dgamma;
  }

  // d_p Gamma = g^{-1} (1/2 d_p S - (d_p g) Gamma)
  const MetricJet jet = space.metric_jet(x, 2);
  const Tensor3 gamma = christoffel_from_jet(jet);
  const auto ldlt = jet.g.ldlt();
  Vector rhs(m);
  for (int p = 0; p < m; ++p) {
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) {
        for (int k = 0; k < m; ++k) {
          const double ds = jet.ddg[p * m + i](k, j) + jet.ddg[p * m + j](k, i) - jet.ddg[p * m + k](i, j);
          double corr = 0.0;
          for (int q = 0; q < m; ++q) corr += jet.dg[p](k, q) * gamma(q, i, j);
          rhs[k] = 0.5 * ds - corr;
        }
        const Vector sol = ldlt.solve(rhs);
        for (int l = 0; l < m; ++l) {
          dgamma(p, l, i, j) = sol[l];
          dgamma(p, l, j, i) = sol[l];
        }
      }
    }
  }
  return dgamma;
}

Tensor4 riemann_at(const ModelSpace& space, const ChartPoint& x, DerivativePath path,
                   const FdSteps& steps) {
  space.require_domain(x, "riemann_at");
  const int m = space.dim();
  const Tensor3 gamma = christoffel_raw(space, x, path, steps);
  const Tensor4 dgamma = christoffel_derivative_raw(space, x, path, steps);
  Tensor4 r(m);
  for (int l = 0; l < m; ++l) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        for (int k = 0; k < m; ++k) {
          double std_r = dgamma(i, l, j, k) - dgamma(j, l, i, k);
          for (int p = 0; p < m; ++p) {
            std_r += gamma(l, i, p) * gamma(p, j, k) - gamma(l, j, p) * gamma(p, i, k);
          }
          r(l, i, j, k) = -std_r;
        }
      }
    }
  }
  return r;
}

double riemann_form(const Tensor4& riemann, const Matrix& metric, const ChartVector& u,
                    const ChartVector& v, const ChartVector& w, const ChartVector& z) {
  const int m = riemann.dim();
  Vector out = Vector::Zero(m);
  for (int l = 0; l < m; ++l) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      if (u[i] == 0.0) continue;
      for (int j = 0; j < m; ++j) {
        if (v[j] == 0.0) continue;
        for (int k = 0; k < m; ++k) acc += riemann(l, i, j, k) * u[i] * v[j] * w[k];
      }
    }
    out[l] = acc;
  }
  return z.dot(metric * out);
}

double sectional_curvature(const ModelSpace& space, const ChartPoint& x, const ChartVector& u,
                           const ChartVector& v, DerivativePath path, const FdSteps& steps) {
  const Tensor4 r = riemann_at(space, x, path, steps);
  const Matrix g = space.metric_raw(x);
  const double uu = u.dot(g * u);
  const double vv = v.dot(g * v);
  const double uv = u.dot(g * v);
  const double area2 = uu * vv - uv * uv;
  if (!(area2 > 1e-12 * uu * vv) || !(uu > 0.0) || !(vv > 0.0)) {
    throw Error(ErrorCode::kDegenerate, "sectional_curvature: vectors do not span a 2-plane");
  }
  return riemann_form(r, g, u, v, u, v) / area2;
}

std::vector<ChartVector> h_orthonormalize(const Matrix& metric, const std::vector<ChartVector>& vs,
                                          double rel_tol) {
  std::vector<ChartVector> out;
  out.reserve(vs.size());
  for (const auto& v : vs) {
    ChartVector w = v;
    const double n0 = std::sqrt(std::max(0.0, v.dot(metric * v)));
    // two passes of modified Gram-Schmidt
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& e : out) w -= e.dot(metric * w) * e;
    }
    const double n = std::sqrt(std::max(0.0, w.dot(metric * w)));
    if (!(n > rel_tol * n0) || !(n0 > 0.0)) {
      throw Error(ErrorCode::kDegenerate, "h_orthonormalize: dependent vectors");
    }
    out.push_back(w / n);
  }
  return out;
}

CurvatureAudit audit_plane(const ModelSpace& space, const ChartPoint& x, const ChartVector& u,
                           const ChartVector& v, DerivativePath path, double angle) {
  space.require_domain(x, "audit_plane");
  const Matrix g = space.metric_raw(x);
  const auto basis = h_orthonormalize(g, {u, v});
  const Tensor4 r = riemann_at(space, x, path);
  CurvatureAudit audit;
  audit.point = x;
  audit.u = basis[0];
  audit.v = basis[1];
  audit.sectional = riemann_form(r, g, basis[0], basis[1], basis[0], basis[1]);
  const ChartVector ru = std::cos(angle) * basis[0] + std::sin(angle) * basis[1];
  const ChartVector rv = -std::sin(angle) * basis[0] + 2.0 * std::cos(angle) * basis[1];
  const double uu = ru.dot(g * ru), vv = rv.dot(g * rv), uv = ru.dot(g * rv);
  const double rotated = riemann_form(r, g, ru, rv, ru, rv) / (uu * vv - uv * uv);
  audit.basis_discrepancy = std::abs(rotated - audit.sectional);
  return audit;
}

}  // namespace negcurv
