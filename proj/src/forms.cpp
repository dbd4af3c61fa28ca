#include "negcurv/forms.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

namespace negcurv {

namespace {

constexpr int kMaxDim = 12;

void build(int m, int k, int start, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i < m; ++i) {
    cur.push_back(i);
    build(m, k, i + 1, cur, out);
    cur.pop_back();
  }
}

double small_det(const Matrix& a) {
  switch (a.rows()) {
    case 0: return 1.0;
    case 1: return a(0, 0);
    case 2: return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    case 3:
      return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
             a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    default: return a.partialPivLu().determinant();
  }
}

void check_dim(int m, int k) {
  if (m < 0 || m > kMaxDim || k < 0 || k > m) {
    std::ostringstream os;
    os << "invalid form shape: dimension " << m << ", degree " << k;
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
}

}  // namespace

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

const std::vector<MultiIndex>& multi_indices(int m, int k) {
  check_dim(m, k);
  static const auto table = [] {
    std::vector<std::vector<std::vector<MultiIndex>>> t(kMaxDim + 1);
    for (int mm = 0; mm <= kMaxDim; ++mm) {
      t[mm].resize(mm + 1);
      for (int kk = 0; kk <= mm; ++kk) {
        MultiIndex cur;
        build(mm, kk, 0, cur, t[mm][kk]);
      }
    }
    return t;
  }();
  return table[m][k];
}

int multi_index_rank(int m, const MultiIndex& idx) {
  const auto& all = multi_indices(m, static_cast<int>(idx.size()));
  const auto it = std::lower_bound(all.begin(), all.end(), idx);
  if (it == all.end() || *it != idx) throw Error(ErrorCode::kInvalidArgument, "multi_index_rank: not a strictly increasing index");
  return static_cast<int>(it - all.begin());
}

KFormField::KFormField(int dim, int degree, ComponentFn components, EvaluateFn evaluate)
    : dim_(dim), degree_(degree), components_(std::move(components)), evaluate_(std::move(evaluate)) {
  check_dim(dim, degree);
}

KFormField::KFormField(int dim, int degree, ComponentFn components) : KFormField(dim, degree, std::move(components), nullptr) {}

KFormField KFormField::from_evaluator(int dim, int degree, EvaluateFn evaluate) {
  EvaluateFn eval = evaluate;
  ComponentFn comps = [dim, degree, eval](const ChartPoint& x) {
    const auto& idx = multi_indices(dim, degree);
    Vector out(static_cast<Eigen::Index>(idx.size()));
    std::vector<ChartVector> basis(degree);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (int j = 0; j < degree; ++j) basis[j] = Vector::Unit(dim, idx[a][j]);
      out[static_cast<Eigen::Index>(a)] = eval(x, basis);
    }
    return out;
  };
  return KFormField(dim, degree, std::move(comps), std::move(evaluate));
}

Vector KFormField::components(const ChartPoint& x) const {
  Vector c = components_(x);
  if (c.size() != component_count()) throw Error(ErrorCode::kInternal, "form evaluator returned the wrong number of components");
  return c;
}

double KFormField::evaluate(const ChartPoint& x, std::span<const ChartVector> vectors) const {
  if (static_cast<int>(vectors.size()) != degree_) throw Error(ErrorCode::kInvalidArgument, "eval_form: arity mismatch");
  if (evaluate_) return evaluate_(x, vectors);
  return eval_components(dim_, degree_, components(x), vectors);
}

double eval_components(int m, int k, const Vector& comps, std::span<const ChartVector> vectors) {
  if (static_cast<int>(vectors.size()) != k) throw Error(ErrorCode::kInvalidArgument, "eval_form: arity mismatch");
  for (const auto& v : vectors) {
    if (v.size() != m) throw Error(ErrorCode::kInvalidArgument, "eval_form: vector dimension mismatch");
  }
  if (k == 0) return comps[0];

  std::vector<const ChartVector*> order;
  for (const auto& v : vectors) order.push_back(&v);
  auto less = [m](const ChartVector* a, const ChartVector* b) {
    for (int i = 0; i < m; ++i) {
      if ((*a)[i] != (*b)[i]) return (*a)[i] < (*b)[i];
    }
    return false;
  };
  int parity = 0;
  for (int i = 1; i < k; ++i) {
    for (int j = i; j > 0 && less(order[j], order[j - 1]); --j) {
      std::swap(order[j], order[j - 1]);
      ++parity;
    }
  }
  for (int i = 1; i < k; ++i) {
    if (!less(order[i - 1], order[i])) return 0.0;  // repeated vector
  }

  const auto& idx = multi_indices(m, k);
  Matrix sub(k, k);
  double acc = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const double c = comps[static_cast<Eigen::Index>(a)];
    if (c == 0.0) continue;
    for (int r = 0; r < k; ++r)
      for (int col = 0; col < k; ++col) sub(r, col) = (*order[col])[idx[a][r]];
    acc += c * small_det(sub);
  }
  return (parity % 2 == 0) ? acc : -acc;
}

double eval_form(const KFormField& form, const ChartPoint& x, std::span<const ChartVector> vectors) {
  return form.evaluate(x, vectors);
}

Vector interior_components(int m, int k, const Vector& comps, const ChartVector& z) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "interior product of a 0-form");
  const auto& lower = multi_indices(m, k - 1);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(lower.size()));
  MultiIndex merged(k);
  for (std::size_t a = 0; a < lower.size(); ++a) {
    const MultiIndex& j = lower[a];
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      if (z[i] == 0.0 || std::find(j.begin(), j.end(), i) != j.end()) continue;
      int pos = 0;
      while (pos < k - 1 && j[pos] < i) ++pos;
      for (int q = 0, w = 0; q < k; ++q) merged[q] = (q == pos) ? i : j[w++];
      const double sign = (pos % 2 == 0) ? 1.0 : -1.0;
      acc += sign * z[i] * comps[multi_index_rank(m, merged)];
    }
    out[static_cast<Eigen::Index>(a)] = acc;
  }
  return out;
}

Vector wedge_components(int m, int k1, const Vector& a, int k2, const Vector& b) {
  const int k = k1 + k2;
  if (k > m) return Vector::Zero(0);
  const auto& top = multi_indices(m, k);
  const auto& left = multi_indices(k, k1);  // positions within K
  Vector out = Vector::Zero(static_cast<Eigen::Index>(top.size()));
  MultiIndex ii(k1), jj(k2);
  for (std::size_t t = 0; t < top.size(); ++t) {
    const MultiIndex& kk = top[t];
    double acc = 0.0;
    for (const auto& pos : left) {
      int inversions = 0, wi = 0, wj = 0;
      for (int p = 0; p < k; ++p) {
        if (wi < k1 && pos[wi] == p) {
          ii[wi++] = kk[p];
          inversions += wj;  // every J element already placed precedes this I element
        } else {
          jj[wj++] = kk[p];
        }
      }
      const double av = a[multi_index_rank(m, ii)];
      const double bv = b[multi_index_rank(m, jj)];
      acc += ((inversions % 2 == 0) ? 1.0 : -1.0) * av * bv;
    }
    out[static_cast<Eigen::Index>(t)] = acc;
  }
  return out;
}

Matrix compound_matrix(const Matrix& a, int k) {
  const auto& rows = multi_indices(static_cast<int>(a.rows()), k);
  const auto& cols = multi_indices(static_cast<int>(a.cols()), k);
  Matrix out(rows.size(), cols.size());
  Matrix sub(k, k);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) sub(r, c) = a(rows[i][r], cols[j][c]);
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = small_det(sub);
    }
  }
  return out;
}

Vector pullback_components(int m, int k, const Vector& comps, const Matrix& d) {
  if (d.rows() != m || d.cols() != m) throw Error(ErrorCode::kInvalidArgument, "pullback: map dimension mismatch");
  if (k == 0) return comps;
  return compound_matrix(d, k).transpose() * comps;
}

KFormField interior_product(const KFormField& form, const VectorField& z) {
  if (form.degree() < 1) throw Error(ErrorCode::kInvalidArgument, "interior_product: degree must be >= 1");
  const int m = form.dim();
  KFormField f = form;
  return KFormField::from_evaluator(m, form.degree() - 1, [f, z](const ChartPoint& x, std::span<const ChartVector> vs) {
    std::vector<ChartVector> all;
    all.reserve(vs.size() + 1);
    all.push_back(z(x));
    all.insert(all.end(), vs.begin(), vs.end());
    return f.evaluate(x, all);
  });
}

KFormField wedge(const KFormField& a, const KFormField& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::kInvalidArgument, "wedge: dimension mismatch");
  const int m = a.dim(), k1 = a.degree(), k2 = b.degree();
  if (k1 + k2 > m) throw Error(ErrorCode::kInvalidArgument, "wedge: degree exceeds dimension");
  return KFormField(m, k1 + k2, [a, b, m, k1, k2](const ChartPoint& x) {
    return wedge_components(m, k1, a.components(x), k2, b.components(x));
  });
}

KFormField exterior_derivative(const KFormField& form, const ModelSpace* space, const FdSteps& steps) {
  const int m = form.dim(), k = form.degree();
  if (k + 1 > m) throw Error(ErrorCode::kInvalidArgument, "exterior_derivative: form is already of top degree");
  KFormField f = form;
  return KFormField(m, k + 1, [f, space, steps, m, k](const ChartPoint& x) {
    std::vector<Vector> d(m);
    if (space != nullptr) {
      const Matrix p = fd_jacobian(*space, x, [&f](const ChartPoint& y) { return f.components(y); }, steps);
      for (int i = 0; i < m; ++i) d[i] = p.row(i).transpose();
    } else {
      const double h0 = steps.first * std::max(1.0, x.norm());
      for (int i = 0; i < m; ++i) {
        volatile double shifted = x[i] + h0;
        const double h = shifted - x[i];
        ChartPoint xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        d[i] = (f.components(xp) - f.components(xm)) / (2.0 * h);
      }
    }
    const auto& upper = multi_indices(m, k + 1);
    Vector out = Vector::Zero(static_cast<Eigen::Index>(upper.size()));
    MultiIndex rest(k);
    for (std::size_t a = 0; a < upper.size(); ++a) {
      double acc = 0.0;
      for (int j = 0; j <= k; ++j) {
        for (int q = 0, w = 0; q <= k; ++q) {
          if (q != j) rest[w++] = upper[a][q];
        }
        acc += ((j % 2 == 0) ? 1.0 : -1.0) * d[upper[a][j]][multi_index_rank(m, rest)];
      }
      out[static_cast<Eigen::Index>(a)] = acc;
    }
    return out;
  });
}

KFormField pullback_scaling(const ModelSpace& space, const ChartPoint& base, const KFormField& form, double t,
                            ScalingMethod method) {
  if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "pullback_scaling: t must lie in (0, 1]");
  if (form.dim() != space.dim()) throw Error(ErrorCode::kInvalidArgument, "pullback_scaling: dimension mismatch");
  if (t == 1.0) return form;
  const int m = form.dim(), k = form.degree();
  const ModelSpace* sp = &space;
  KFormField f = form;
  ChartPoint b = base;
  return KFormField(m, k, [sp, f, b, t, method, m, k](const ChartPoint& x) {
    const RadialTransport tr = radial_transport(*sp, b, x, {t}, method);
    return pullback_components(m, k, f.components(tr.points[0]), tr.jacobian[0]);
  });
}

double h_norm_components(const Matrix& metric, int k, const Vector& comps) {
  const int m = static_cast<int>(metric.rows());
  if (k == 0) return std::abs(comps[0]);
  Eigen::LLT<Matrix> llt(metric);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::kDegenerate, "h_norm: metric is not positive definite");
  // Frame E = L^{-T} is h-orthonormal; its compound maps components to the frame.
  const Matrix frame = llt.matrixU().solve(Matrix::Identity(m, m));
  if (k == 1) return (frame.transpose() * comps).norm();
  return (compound_matrix(frame, k).transpose() * comps).norm();
}

double h_norm_form(const ModelSpace& space, const KFormField& form, const ChartPoint& x) {
  space.require_domain(x, "h_norm_form");
  return h_norm_components(space.metric_raw(x), form.degree(), form.components(x));
}

double comass_estimate(const Matrix& metric, int k, const Vector& comps, std::mt19937_64& rng, int trials) {
  const int m = static_cast<int>(metric.rows());
  std::normal_distribution<double> normal;
  double best = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<ChartVector> vs(k);
    for (auto& v : vs) {
      v.resize(m);
      for (int i = 0; i < m; ++i) v[i] = normal(rng);
    }
    try {
      const auto on = h_orthonormalize(metric, vs);
      best = std::max(best, std::abs(eval_components(m, k, comps, on)));
    } catch (const Error&) {
    }
  }
  return best;
}

SupEstimate sup_norm_estimate(const ModelSpace& space, const KFormField& form, std::span<const ChartPoint> points) {
  if (points.empty()) throw Error(ErrorCode::kInvalidArgument, "sup_norm_estimate: empty sample set");
  SupEstimate est;
  est.value = -1.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double v = h_norm_form(space, form, points[i]);
    if (v > est.value) {
      est.value = v;
      est.argmax = i;
    }
  }
  est.point = points[est.argmax];
  return est;
}

KFormField constant_form(int m, int k, const Vector& comps) {
  if (comps.size() != binomial(m, k)) throw Error(ErrorCode::kInvalidArgument, "constant_form: wrong component count");
  return KFormField(m, k, [comps](const ChartPoint&) { return comps; });
}

KFormField coordinate_form(int m, const MultiIndex& idx) {
  const int k = static_cast<int>(idx.size());
  Vector c = Vector::Zero(binomial(m, k));
  c[multi_index_rank(m, idx)] = 1.0;
  return constant_form(m, k, c);
}

KFormField volume_form(const ModelSpace& space) {
  const ModelSpace* sp = &space;
  return KFormField(space.dim(), space.dim(), [sp](const ChartPoint& x) {
    Vector c(1);
    c[0] = std::sqrt(sp->metric_raw(x).determinant());
    return c;
  });
}

KFormField zero_form(int m, int k) {
  const long n = binomial(m, k);
  return KFormField(m, k, [n](const ChartPoint&) { return Vector::Zero(n); });
}

}  // namespace negcurv
