#include "test_main.hpp"
#include "test_util.hpp"

#include "negcurv/contact.hpp"
#include "negcurv/forms.hpp"
#include "negcurv/primitive.hpp"

#include <cmath>
#include <random>

using namespace negcurv;
using namespace negcurv::testing;

namespace {

// int_0^r sinh^{k-1} / sinh^{k-1}(r) by composite Simpson.
double simpson_ratio(int k, double r) {
  const int n = 20000;
  const double h = r / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * std::pow(std::sinh(i * h) / std::sinh(r), k - 1);
  }
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("construction preconditions") {
  auto h = make_hyperbolic(3);
  const ChartPoint o = Vector::Zero(3);
  try {
    PrimitiveProblem(h, o, coordinate_form(3, {1}));
    FAIL("1-form accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidArgument);
    CHECK(std::string(e.what()).find("k >= 2") != std::string::npos);
  }
  // x0 dx1 ^ dx2 is not closed.
  const KFormField open(3, 2, [](const ChartPoint& x) {
    Vector c = Vector::Zero(3);
    c[multi_index_rank(3, {1, 2})] = x[0];
    return c;
  });
  try {
    PrimitiveProblem(h, o, open);
    FAIL("non-closed form accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidArgument);
  }
  CHECK_THROWS_AS(kaehler_problem(h), Error);
  try {
    kaehler_problem(h);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kKindMismatch);
  }
  const PrimitiveProblem ok(h, o, volume_form(*h));
  CHECK(ok.audit().passed);
}

TEST_CASE("euclidean constant forms: Phi = (1/k) x _| F") {
  std::mt19937_64 rng(21);
  for (int m : {2, 3, 4}) {
    auto e = make_euclidean(m);
    for (int k = 2; k <= m; ++k) {
      const Vector c = random_vector(rng, static_cast<int>(binomial(m, k)));
      for (const ChartPoint& base : {Vector(Vector::Zero(m)), random_vector(rng, m, 0.5)}) {
        const PrimitiveProblem prob(e, base, constant_form(m, k, c));
        const ChartPoint x = base + random_vector(rng, m);
        const Vector expected = interior_components(m, k, c, x - base) / k;
        CHECK((primitive_at(prob, x) - expected).norm() < 1e-12 * (1.0 + expected.norm()));
        CHECK(primitive_at(prob, base).norm() == 0.0);
      }
    }
  }
}

TEST_CASE("hyperbolic area form: Phi = (cosh r - 1) dtheta") {
  auto h = make_hyperbolic(2);
  const PrimitiveProblem prob(h, Vector::Zero(2), volume_form(*h));
  for (double r : {0.05, 1.0, 4.0, 7.9}) {
    for (double th : {0.3, 2.5, -1.7}) {
      Vector x(2);
      x << r * std::cos(th), r * std::sin(th);
      Vector expected(2);
      expected << -x[1], x[0];
      expected *= (std::cosh(r) - 1.0) / (r * r);
      const Vector phi = primitive_at(prob, x);
      CHECK((phi - expected).norm() < 1e-10 * expected.norm());
      CHECK(h_norm_components(h->metric_at(x), 1, phi) == doctest::Approx(std::tanh(0.5 * r)).epsilon(1e-10));
    }
  }
}

TEST_CASE("volume forms: |Phi| equals the sinh ratio") {
  std::mt19937_64 rng(22);
  auto h3 = make_hyperbolic(3);
  const PrimitiveProblem p3(h3, Vector::Zero(3), volume_form(*h3));
  auto h4 = make_hyperbolic(4);
  const PrimitiveProblem p4(h4, Vector::Zero(4), volume_form(*h4));
  for (double r : {0.5, 2.0, 6.0}) {
    const double s = std::sinh(r), c = std::cosh(r);
    const double k3 = (std::sinh(2.0 * r) / 4.0 - r / 2.0) / (s * s);
    const double k4 = (c * c * c / 3.0 - c + 2.0 / 3.0) / (s * s * s);
    const ChartPoint x3 = at_radius(*h3, rng, r);
    const ChartPoint x4 = at_radius(*h4, rng, r);
    CHECK(h_norm_components(h3->metric_at(x3), 2, primitive_at(p3, x3)) == doctest::Approx(k3).epsilon(1e-9));
    CHECK(h_norm_components(h4->metric_at(x4), 3, primitive_at(p4, x4)) == doctest::Approx(k4).epsilon(1e-9));
    CHECK(sinh_ratio_bound(3, r) == doctest::Approx(k3).epsilon(1e-12));
    CHECK(sinh_ratio_bound(4, r) == doctest::Approx(k4).epsilon(1e-12));
  }
}

TEST_CASE("primitive is exact") {
  std::mt19937_64 rng(23);
  auto h = make_hyperbolic(3);
  const PrimitiveProblem prob(h, Vector::Zero(3), volume_form(*h));
  const KFormField dphi = exterior_derivative(primitive_field(prob), h.get());
  for (double r : {0.4, 2.0, 5.0}) {
    const ChartPoint x = at_radius(*h, rng, r);
    const Vector diff = dphi.components(x) - prob.psi().components(x);
    CHECK(h_norm_components(h->metric_at(x), 3, diff) < 1e-5);
  }
}

TEST_CASE("Jacobi transport agrees with the closed form") {
  std::mt19937_64 rng(24);
  auto h = make_hyperbolic(2);
  PrimitiveOptions jac;
  jac.method = ScalingMethod::kJacobi;
  const PrimitiveProblem a(h, Vector::Zero(2), volume_form(*h));
  const PrimitiveProblem b(h, Vector::Zero(2), volume_form(*h), jac);
  for (double r : {0.8, 3.0}) {
    const ChartPoint x = at_radius(*h, rng, r);
    const Vector pa = primitive_at(a, x);
    CHECK((pa - primitive_at(b, x)).norm() < 1e-7 * pa.norm());
  }
}

TEST_CASE("complex hyperbolic line: |beta*| = tanh(r) / 2") {
  std::mt19937_64 rng(25);
  auto ch = make_complex_hyperbolic(1);
  const PrimitiveProblem prob = kaehler_problem(ch);
  for (double r : {0.3, 2.0, 7.0}) {
    const ChartPoint x = at_radius(*ch, rng, r);
    const double n = h_norm_components(ch->metric_at(x), 1, primitive_at(prob, x));
    CHECK(n == doctest::Approx(0.5 * std::tanh(r)).epsilon(1e-9));
  }
}

TEST_CASE("quadrature convergence failures are reported") {
  auto h = make_hyperbolic(2);
  PrimitiveOptions opts;
  opts.quadrature_order = 1;
  const PrimitiveProblem prob(h, Vector::Zero(2), volume_form(*h), opts);
  Vector x(2);
  x << 6.0, 0.0;
  try {
    primitive_at(prob, x);
    FAIL("no convergence error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConvergence);
  }
}

TEST_CASE("sinh ratio bound") {
  for (int k = 2; k <= 6; ++k) {
    double prev = 0.0;
    for (double r : {1e-3, 0.1, 1.0, 3.0, 8.0}) {
      const double b = sinh_ratio_bound(k, r);
      CHECK(b == doctest::Approx(simpson_ratio(k, r)).epsilon(1e-9));
      CHECK(b < 1.0 / (k - 1));
      CHECK(b > prev);
      prev = b;
    }
    CHECK(sinh_ratio_bound(k, 60.0) == doctest::Approx(1.0 / (k - 1)).epsilon(1e-10));
  }
  CHECK(sinh_ratio_bound(2, 1.0) == std::tanh(0.5));
  CHECK(linear_ratio_bound(3, 6.0) == 2.0);
  CHECK_THROWS_AS(sinh_ratio_bound(1, 1.0), Error);
  CHECK_THROWS_AS(sinh_ratio_bound(2, 0.0), Error);
}

TEST_CASE("bound certificate") {
  auto h = make_hyperbolic(2);
  const PrimitiveProblem prob(h, Vector::Zero(2), volume_form(*h));
  CertificateOptions opts;
  opts.n_samples = 60;
  const BoundCertificate cert = bound_certificate(prob, opts);
  CHECK(cert.passed);
  CHECK(cert.theorem_instance);
  CHECK(cert.theoretical_ratio == 1.0);
  CHECK(cert.sup_source == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(cert.sup_primitive <= cert.theoretical_ratio * cert.sup_source);
  CHECK(cert.worst.size() == 10);
  for (const auto& s : cert.samples) {
    CHECK(s.chain_ok);
    CHECK(s.primitive_norm == doctest::Approx(std::tanh(0.5 * s.r)).epsilon(1e-9));
  }
  for (std::size_t i = 1; i < cert.worst.size(); ++i) {
    CHECK(cert.worst[i - 1].margin <= cert.worst[i].margin);
  }

  opts.jobs = 3;
  const BoundCertificate par = bound_certificate(prob, opts);
  CHECK(par.sup_primitive == cert.sup_primitive);
  CHECK(par.margin == cert.margin);
  for (std::size_t i = 0; i < cert.samples.size(); ++i) {
    CHECK(par.samples[i].primitive_norm == cert.samples[i].primitive_norm);
  }

  const ChainSample replay = chain_sample(prob, cert.samples[7].point);
  CHECK(replay.primitive_norm == cert.samples[7].primitive_norm);
}

TEST_CASE("flat control is labelled and domain-restricted") {
  auto e = make_euclidean(2, 3.0);
  const PrimitiveProblem prob(e, Vector::Zero(2), volume_form(*e));
  CertificateOptions opts;
  opts.n_samples = 40;
  const BoundCertificate cert = bound_certificate(prob, opts);
  CHECK_FALSE(cert.theorem_instance);
  CHECK(cert.label.find("domain-restricted") != std::string::npos);
  CHECK(cert.theoretical_ratio == doctest::Approx(1.5));
  CHECK(cert.passed);
  // |Phi| = r / 2 grows without bound.
  for (const auto& s : cert.samples) CHECK(s.primitive_norm == doctest::Approx(0.5 * s.r).epsilon(1e-12));
}
