#include "negcurv/contact.hpp"
#include "negcurv/forms.hpp"
#include "negcurv/geodesic.hpp"
#include "negcurv/harness.hpp"
#include "negcurv/model_space.hpp"
#include "negcurv/primitive.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace negcurv;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

ExperimentConfig config(Experiment e, ModelKind m, int dim, std::size_t samples) {
  ExperimentConfig c;
  c.experiment = e;
  c.model = m;
  c.dim = dim;
  c.samples = samples;
  c.seed = 20240611;
  return c;
}

std::vector<const ResultRow*> rows_of(const ResultRecord& rec, const std::string& q) {
  std::vector<const ResultRow*> out;
  for (const auto& r : rec.rows)
    if (r.quantity == q) out.push_back(&r);
  return out;
}

double max_of(const std::vector<const ResultRow*>& rows, const std::function<double(const ResultRow&)>& f) {
  double m = -INFINITY;
  for (const ResultRow* r : rows) m = std::max(m, f(*r));
  return m;
}

std::string label(const ResultRecord& rec) { return rec.experiment_id; }

void curvature(Verdict& v) {
  for (int m : {2, 3, 4}) {
    const ResultRecord rec = run(config(Experiment::kCurvatureAudit, ModelKind::kHyperbolic, m, 1000));
    const auto cf = rows_of(rec, "sectional_closed"), fd = rows_of(rec, "sectional_fd");
    const double e_cf = max_of(cf, [](const ResultRow& r) { return std::abs(r.measured + 1.0); });
    const double e_fd = max_of(fd, [](const ResultRow& r) { return std::abs(r.measured + 1.0); });
    v.require(cf.size() == 1000 && fd.size() == 1000, label(rec) + " sample count");
    v.require(e_cf <= 1e-6, label(rec) + " closed-form error " + std::to_string(e_cf));
    v.require(e_fd <= 1e-2, label(rec) + " fd error " + std::to_string(e_fd));
    v.require(rec.passed, label(rec) + " record verdict");
    v.detail << "H^" << m << " |K+1| cf " << e_cf << " fd " << e_fd << "; ";
  }
  for (int n : {1, 2}) {
    const ResultRecord rec = run(config(Experiment::kCurvatureAudit, ModelKind::kComplexHyperbolic, n, 1000));
    double lo = INFINITY, hi = -INFINITY;
    for (const char* q : {"sectional_closed", "sectional_fd"}) {
      for (const ResultRow* r : rows_of(rec, q)) {
        lo = std::min(lo, r->measured);
        hi = std::max(hi, r->measured);
      }
    }
    double hol = 0.0;
    for (const char* q : {"holomorphic_closed", "holomorphic_fd"})
      hol = std::max(hol, max_of(rows_of(rec, q), [](const ResultRow& r) { return std::abs(r.measured + 4.0); }));
    v.require(rows_of(rec, "sectional_fd").size() == 1000, label(rec) + " sample count");
    v.require(lo >= -4.01 && hi <= -0.99, label(rec) + " sectional range");
    v.require(hol <= 1e-2, label(rec) + " holomorphic error " + std::to_string(hol));
    v.require(rec.passed, label(rec) + " record verdict");
    v.detail << "CH^" << n << " K in [" << lo << ", " << hi << "] |Khol+4| " << hol << "; ";
  }
}

void comparison(Verdict& v) {
  const std::pair<ModelKind, int> spaces[] = {
      {ModelKind::kHyperbolic, 3}, {ModelKind::kComplexHyperbolic, 2}, {ModelKind::kWarped, 3}};
  for (const auto& [model, dim] : spaces) {
    const ResultRecord rec = run(config(Experiment::kComparison, model, dim, 50));
    const auto mono = rows_of(rec, "monotonicity");
    const double viol = max_of(mono, [](const ResultRow& r) { return r.measured; });
    v.require(mono.size() == 50, label(rec) + " sample count");
    v.require(viol <= 1e-6, label(rec) + " monotonicity violation " + std::to_string(viol));
    v.require(rec.passed, label(rec) + " record verdict");
    v.detail << model_name(model) << dim << " viol " << viol;
    if (model == ModelKind::kHyperbolic) {
      const double dev = max_of(rows_of(rec, "equality"), [](const ResultRow& r) { return r.measured; });
      v.require(dev < 1e-5, label(rec) + " equality deviation " + std::to_string(dev));
      v.detail << " |eta(s)-eta(r)| " << dev;
    }
    if (model == ModelKind::kWarped) {
      const double growth = max_of(rows_of(rec, "eta_growth"), [](const ResultRow& r) { return 1.0 - r.measured; });
      v.require(growth < 0.0, label(rec) + " eta not strictly increasing");
      v.detail << " min eta(r)/eta(0) " << 1.0 - growth;
    }
    v.detail << "; ";
  }
}

// Exactness rows of a primitive run, checked against 1e-4 (1 + sup |Psi|).
void exactness_of(Verdict& v, ExperimentConfig c) {
  c.exactness_samples = 100;
  const ResultRecord rec = run(c);
  const double sup = rec.statistics.at("sup_source");
  const auto ex = rows_of(rec, "exactness");
  const double worst = max_of(ex, [&](const ResultRow& r) { return r.measured / (1.0 + sup); });
  v.require(ex.size() == 100, label(rec) + " audit point count");
  v.require(worst < 1e-4, label(rec) + " exactness " + std::to_string(worst));
  v.detail << label(rec) << " |dPhi-Psi|/(1+sup) " << worst << "; ";
}

void exactness(Verdict& v) {
  ExperimentConfig flat = config(Experiment::kPrimitive, ModelKind::kEuclidean, 3, 100);
  flat.form = FormFixture::kCoordinate;
  exactness_of(v, flat);

  // dx0 ^ dx1 on R^3 has the primitive (x0 dx1 - x1 dx0) / 2.
  const SpacePtr r3 = make_euclidean(3);
  const PrimitiveProblem prob(r3, Vector::Zero(3), coordinate_form(3, {0, 1}));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  double err = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vector x = Vector::NullaryExpr(3, [&](Eigen::Index) { return u(rng); });
    const Vector phi = primitive_at(prob, x);
    Vector expect = Vector::Zero(3);
    expect(0) = -0.5 * x(1);
    expect(1) = 0.5 * x(0);
    err = std::max(err, (phi - expect).norm());
  }
  v.require(err < 1e-10, "flat primitive differs from (x0 dx1 - x1 dx0)/2 by " + std::to_string(err));
  v.detail << "flat closed form " << err << "; ";

  for (int m : {2, 3}) {
    ExperimentConfig c = config(Experiment::kPrimitive, ModelKind::kHyperbolic, m, 100);
    c.k = m;
    c.form = FormFixture::kVolume;
    exactness_of(v, c);
  }
  ExperimentConfig ch = config(Experiment::kPrimitive, ModelKind::kComplexHyperbolic, 2, 100);
  ch.form = FormFixture::kKaehler;
  exactness_of(v, ch);
}

// Norm of a 1-form on H^2 in normal coordinates, g = P + (sinh r / r)^2 (1 - P).
double hyperbolic2_norm(const Vector& x, const Vector& phi) {
  const double r = x.norm();
  const Vector e = x / r;
  const double radial = phi.dot(e);
  const double tangential = (phi - radial * e).norm() * r / std::sinh(r);
  return std::hypot(radial, tangential);
}

void certificates(Verdict& v) {
  struct Case {
    ModelKind model;
    int dim, k;
    FormFixture form;
  };
  const Case cases[] = {{ModelKind::kHyperbolic, 2, 2, FormFixture::kVolume},
                        {ModelKind::kHyperbolic, 3, 2, FormFixture::kCoordinate},
                        {ModelKind::kHyperbolic, 3, 3, FormFixture::kVolume},
                        {ModelKind::kHyperbolic, 4, 3, FormFixture::kCoordinate},
                        {ModelKind::kComplexHyperbolic, 2, 2, FormFixture::kKaehler}};
  for (const Case& cs : cases) {
    ExperimentConfig c = config(Experiment::kPrimitive, cs.model, cs.dim, 1000);
    c.k = cs.k;
    c.form = cs.form;
    const ResultRecord rec = run(c);
    const double sup_phi = rec.statistics.at("sup_primitive"), sup_psi = rec.statistics.at("sup_source");
    const double bound = sup_psi / (cs.k - 1) * 1.001;
    v.require(rows_of(rec, "primitive_bound").size() == 1000, label(rec) + " sample count");
    v.require(sup_phi <= bound, label(rec) + " sup|Phi| " + std::to_string(sup_phi) + " > " + std::to_string(bound));
    v.require(rec.passed, label(rec) + " record verdict");
    v.detail << label(rec) << " sup|Phi|/sup|Psi| " << sup_phi / sup_psi << "; ";
  }

  const SpacePtr h2 = make_hyperbolic(2);
  const PrimitiveProblem prob(h2, Vector::Zero(2), volume_form(*h2));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> radius(1e-3, 8.0), angle(0.0, 2.0 * M_PI);
  double err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double r = radius(rng), t = angle(rng);
    const Vector x = Eigen::Vector2d(r * std::cos(t), r * std::sin(t));
    err = std::max(err, std::abs(hyperbolic2_norm(x, primitive_at(prob, x)) - std::tanh(0.5 * r)));
  }
  v.require(err <= 1e-4, "H^2 area primitive differs from tanh(r/2) by " + std::to_string(err));
  v.detail << "H^2 |Phi| vs tanh(r/2) " << err << "; ";
}

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

void sinh_ratio(Verdict& v) {
  double oracle_err = 0.0, worst_gap = INFINITY;
  for (int k = 2; k <= 6; ++k) {
    std::vector<double> grid, values, f, g;
    for (int i = 1; i <= 100; ++i) grid.push_back(0.08 * i);
    for (double r : grid) {
      const double b = sinh_ratio_bound(k, r);
      const double ref = simpson([&](double s) { return std::pow(std::sinh(s) / std::sinh(r), k - 1); }, 0.0, r, 2000);
      oracle_err = std::max(oracle_err, std::abs(b - ref) / ref);
      worst_gap = std::min(worst_gap, 1.0 / (k - 1) - b);
      v.require(b < 1.0 / (k - 1), "k=" + std::to_string(k) + " bound not below 1/(k-1) at r=" + std::to_string(r));
      if (!values.empty()) v.require(b >= values.back(), "sinh ratio decreases at k=" + std::to_string(k));
      values.push_back(b);
      f.push_back(std::pow(std::sinh(r), k - 1));
      g.push_back((k - 1) * std::pow(std::sinh(r), k - 2) * std::cosh(r));
    }
    const RatioCheckReport rep = ratio_monotone_check(grid, f, g);
    v.require(rep.precondition_ok && rep.passed, "ratio_monotone_check fails for k=" + std::to_string(k));
  }
  v.require(oracle_err < 1e-8, "sinh ratio differs from Simpson by " + std::to_string(oracle_err));
  v.detail << "Simpson rel err " << oracle_err << ", min 1/(k-1) - ratio " << worst_gap << "; ";
}

void contact(Verdict& v) {
  for (int n : {1, 2, 3}) {
    const ResultRecord rec = run(config(Experiment::kContact, ModelKind::kComplexHyperbolic, n, 1000));
    const auto bn = rows_of(rec, "beta_norm");
    const double beta_err = max_of(bn, [](const ResultRow& r) { return r.measured; });
    v.require(bn.size() >= 1000, label(rec) + " beta sample count");
    v.require(beta_err <= 1e-6, label(rec) + " | |beta| - 1 | = " + std::to_string(beta_err));
    const auto lv = rows_of(rec, "levi");
    if (n > 1) {
      const double worst = -max_of(lv, [](const ResultRow& r) { return -r.measured; });
      v.require(lv.size() >= 1000, label(rec) + " Levi sample count");
      v.require(worst >= 0.999, label(rec) + " Levi ratio " + std::to_string(worst));
      v.detail << label(rec) << " min Levi/2|X|^2 " << worst;
    } else {
      v.require(lv.empty(), label(rec) + " Levi rows on a trivial contact distribution");
      v.detail << label(rec) << " Levi vacuous";
    }
    double defect = INFINITY;
    std::vector<double> radii;
    for (const ResultRow* r : rows_of(rec, "contact_defect")) {
      defect = std::min(defect, r->measured);
      radii.push_back(std::round(r->r * 1e6) / 1e6);
    }
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    v.require(defect > 0.0, label(rec) + " contact defect " + std::to_string(defect));
    v.require(radii.size() == 7, label(rec) + " tested radii " + std::to_string(radii.size()));
    v.require(rec.passed, label(rec) + " record verdict");
    v.detail << " | |beta|-1 | " << beta_err << " min defect " << defect << "; ";
  }
}

// Random unitary matrix acting on interleaved real coordinates.
Matrix random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = {g(rng), g(rng)};
  const Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(z).householderQ();
  Matrix u(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      u(2 * i, 2 * j) = q(i, j).real();
      u(2 * i, 2 * j + 1) = -q(i, j).imag();
      u(2 * i + 1, 2 * j) = q(i, j).imag();
      u(2 * i + 1, 2 * j + 1) = q(i, j).real();
    }
  }
  return u;
}

void hessian(Verdict& v) {
  for (int n : {1, 2, 3}) {
    const ResultRecord rec = run(config(Experiment::kContact, ModelKind::kComplexHyperbolic, n, 1000));
    for (const char* q : {"hessian_lower", "hessian_upper", "hessian_closed_form", "hessian_dual_path"}) {
      const auto rows = rows_of(rec, q);
      v.require(!rows.empty() && std::all_of(rows.begin(), rows.end(), [](const ResultRow* r) { return r->ok; }),
                label(rec) + " " + q);
    }
    const double dual = max_of(rows_of(rec, "hessian_dual_path"), [](const ResultRow& r) { return r.measured; });
    v.detail << label(rec) << " dual path " << dual << "; ";
  }

  // In the ball model the point at Euclidean radius tanh r lies at distance r.
  // There Hess r is 2 coth 2r on J grad r and coth r on the rest of the
  // sphere tangent space, for every unitary rotation of the configuration.
  std::mt19937_64 rng(3);
  double err_cf = 0.0, err_fd = 0.0;
  for (int n : {1, 2, 3}) {
    const SpacePtr ch = make_complex_hyperbolic(n);
    for (int r_int = 2; r_int <= 8; ++r_int) {
      const double r = r_int;
      for (int trial = 0; trial < 10; ++trial) {
        const Matrix u = random_unitary(n, rng);
        const Vector x = std::tanh(r) * u.col(0);
        const Matrix g = ch->metric_at(x);
        for (int a = 1; a < 2 * n; ++a) {
          const Vector X = u.col(a) / std::sqrt(u.col(a).dot(g * u.col(a)));
          const double expect = a == 1 ? 2.0 / std::tanh(2.0 * r) : 1.0 / std::tanh(r);
          err_cf = std::max(err_cf, std::abs(hessian_r(*ch, x, X) - expect));
          err_fd = std::max(err_fd, std::abs(hessian_r(*ch, x, X, DerivativePath::kFiniteDifference) - expect));
        }
      }
    }
  }
  v.require(err_cf <= 1e-3, "closed-form Hessian off the oracle by " + std::to_string(err_cf));
  v.require(err_fd <= 1e-3, "finite-difference Hessian off the oracle by " + std::to_string(err_fd));
  v.detail << "oracle error cf " << err_cf << " fd " << err_fd << "; ";
}

void horizon(Verdict& v) {
  ExperimentConfig c = config(Experiment::kHorizon, ModelKind::kComplexHyperbolic, 2, 200);
  c.r_min = 2.0;
  c.r_max = 8.0;
  c.r_steps = 7;
  c.levi_samples = 200;
  const ResultRecord rec = run(c);
  const auto diffs = rows_of(rec, "sup_difference");
  v.require(diffs.size() == 6, label(rec) + " expected 6 successive differences");
  for (std::size_t j = 1; j < diffs.size(); ++j)
    v.require(diffs[j]->measured < diffs[j - 1]->measured, label(rec) + " sup difference does not decrease");
  const double disc = max_of(rows_of(rec, "limit_discrepancy"), [](const ResultRow& r) { return r.measured; });
  v.require(disc < 1e-2, label(rec) + " limit discrepancy " + std::to_string(disc));
  const auto levi = rows_of(rec, "levi_min_eigenvalue");
  const double lmin = -max_of(levi, [](const ResultRow& r) { return -r.measured; });
  v.require(levi.size() == 200, label(rec) + " Levi sample count");
  v.require(lmin > 0.0, label(rec) + " Levi matrix not positive definite");
  v.require(rec.passed, label(rec) + " record verdict");
  v.detail << "sup differences";
  for (const ResultRow* d : diffs) v.detail << " " << d->measured;
  v.detail << "; limit discrepancy " << disc << "; min Levi eigenvalue " << lmin << "; ";
}

void kaehler(Verdict& v) {
  const ResultRecord rec = run(config(Experiment::kKaehlerPrimitive, ModelKind::kComplexHyperbolic, 2, 500));
  const double sup_phi = rec.statistics.at("sup_primitive"), sup_psi = rec.statistics.at("sup_source");
  const auto ex = rows_of(rec, "exactness");
  const double exact = max_of(ex, [&](const ResultRow& r) { return r.measured / (1.0 + sup_psi); });
  v.require(ex.size() == 500, label(rec) + " exactness sample count");
  v.require(exact < 1e-4, label(rec) + " exactness " + std::to_string(exact));
  v.require(sup_phi <= sup_psi * 1.001, label(rec) + " sup|beta*| above sup|omega|");
  // beta* is radial with |beta*| = tanh(r) / 2 = |x| / 2 in the ball model.
  const double closed = max_of(rows_of(rec, "primitive_bound"),
                               [](const ResultRow& r) { return std::abs(r.measured - 0.5 * r.point.norm()); });
  v.require(closed <= 1e-4, label(rec) + " |beta*| differs from tanh(r)/2 by " + std::to_string(closed));
  const auto nab = rec.statistics.find("nabla_sup");
  v.require(nab != rec.statistics.end() && std::isfinite(nab->second), label(rec) + " sup|nabla beta*| not reported");
  v.require(rec.passed, label(rec) + " record verdict");
  v.detail << "|dbeta*-omega|/(1+sup) " << exact << ", sup|beta*|/sup|omega| " << sup_phi / sup_psi
           << ", |beta*| vs tanh(r)/2 " << closed << ", sup|nabla beta*| " << nab->second << " (reported); ";
}

void reproducibility(Verdict& v) {
  std::vector<ExperimentConfig> cs = {config(Experiment::kCurvatureAudit, ModelKind::kComplexHyperbolic, 2, 300),
                                      config(Experiment::kComparison, ModelKind::kWarped, 3, 10),
                                      config(Experiment::kPrimitive, ModelKind::kHyperbolic, 3, 300),
                                      config(Experiment::kContact, ModelKind::kComplexHyperbolic, 2, 300),
                                      config(Experiment::kHorizon, ModelKind::kComplexHyperbolic, 2, 50),
                                      config(Experiment::kKaehlerPrimitive, ModelKind::kComplexHyperbolic, 2, 100)};
  cs[4].levi_samples = 50;
  double worst = 0.0;
  for (ExperimentConfig c : cs) {
    const ResultRecord a = run(c);
    c.jobs = 2;
    const ResultRecord b = run(c);
    const double d = summary_distance(a, b);
    v.require(d <= 1e-12, label(a) + " rerun distance " + std::to_string(d));
    v.require(a.config_hash == b.config_hash, label(a) + " config hash changed");
    worst = std::max(worst, d);
  }
  v.detail << "max summary distance over " << cs.size() << " experiments " << worst << "; ";
}

}  // namespace

int main() {
  const std::pair<const char*, void (*)(Verdict&)> criteria[] = {
      {"curvature audit", curvature},           {"Jacobi comparison", comparison},
      {"primitive exactness", exactness},       {"bounded primitive certificates", certificates},
      {"sinh ratio and monotone ratio", sinh_ratio}, {"contact construction", contact},
      {"Hessian pinching", hessian},            {"horizon convergence", horizon},
      {"Kaehler primitive", kaehler},           {"reproducibility", reproducibility},
  };
  int failed = 0, index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "error: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += v.pass ? 0 : 1;
    std::printf("%s %2d %s (%.1fs): %s\n", v.pass ? "PASS" : "FAIL", index, name, secs, v.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
