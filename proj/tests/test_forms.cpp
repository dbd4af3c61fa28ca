#include "test_main.hpp"
#include "test_util.hpp"

#include "negcurv/forms.hpp"
#include "negcurv/sampler.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace negcurv;
using namespace negcurv::testing;

namespace {

Vector random_components(std::mt19937_64& rng, int m, int k) {
  return random_vector(rng, static_cast<int>(binomial(m, k)));
}

std::vector<ChartVector> random_vectors(std::mt19937_64& rng, int m, int count) {
  std::vector<ChartVector> vs;
  for (int i = 0; i < count; ++i) vs.push_back(random_vector(rng, m));
  return vs;
}

// F(v_1, ..., v_k) = sum_I F_I det(V[I, :]) written out directly.
double determinant_oracle(int m, int k, const Vector& comps, const std::vector<ChartVector>& vs) {
  const auto& idx = multi_indices(m, k);
  double acc = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    Matrix sub(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) sub(i, j) = vs[j][idx[a][i]];
    acc += comps[static_cast<int>(a)] * sub.determinant();
  }
  return acc;
}

}  // namespace

TEST_CASE("multi-index tables are lexicographic and ranked") {
  for (int m = 1; m <= 6; ++m) {
    for (int k = 0; k <= m; ++k) {
      const auto& idx = multi_indices(m, k);
      REQUIRE(static_cast<long>(idx.size()) == binomial(m, k));
      for (std::size_t a = 0; a < idx.size(); ++a) {
        CHECK(multi_index_rank(m, idx[a]) == static_cast<int>(a));
        if (a > 0) CHECK(idx[a - 1] < idx[a]);
      }
    }
  }
  CHECK_THROWS_AS(multi_index_rank(3, MultiIndex{1, 0}), Error);
}

TEST_CASE("evaluation matches the determinant expansion and alternates") {
  std::mt19937_64 rng(11);
  for (int m : {2, 3, 4, 5}) {
    for (int k = 1; k <= m; ++k) {
      const Vector c = random_components(rng, m, k);
      auto vs = random_vectors(rng, m, k);
      const double value = eval_components(m, k, c, vs);
      CHECK(value == doctest::Approx(determinant_oracle(m, k, c, vs)).epsilon(1e-12));
      if (k >= 2) {
        std::swap(vs[0], vs[k - 1]);
        CHECK(eval_components(m, k, c, vs) == -value);
        vs[0] = vs[1];
        CHECK(eval_components(m, k, c, vs) == 0.0);
      }
    }
  }
}

TEST_CASE("interior product squares to zero and is an antiderivation") {
  std::mt19937_64 rng(12);
  const int m = 5;
  const ChartPoint x = Vector::Zero(m);
  for (int k1 = 1; k1 <= 3; ++k1) {
    const int k2 = 2;
    const KFormField a = constant_form(m, k1, random_components(rng, m, k1));
    const KFormField b = constant_form(m, k2, random_components(rng, m, k2));
    const Vector z = random_vector(rng, m);
    auto zf = [z](const ChartPoint&) { return z; };

    if (k1 >= 2) {
      const Vector twice = interior_product(interior_product(a, zf), zf).components(x);
      CHECK(twice.cwiseAbs().maxCoeff() < 1e-14);
    }
    const Vector lhs = interior_product(wedge(a, b), zf).components(x);
    const Vector ia = interior_product(a, zf).components(x);
    const Vector ib = interior_product(b, zf).components(x);
    const double sign = (k1 % 2 == 0) ? 1.0 : -1.0;
    const Vector rhs = wedge_components(m, k1 - 1, ia, k2, b.components(x)) +
                       sign * wedge_components(m, k1, a.components(x), k2 - 1, ib);
    CHECK((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
  }
}

TEST_CASE("wedge is graded commutative and associative") {
  std::mt19937_64 rng(13);
  const int m = 6;
  for (int k1 = 1; k1 <= 3; ++k1) {
    for (int k2 = 1; k2 <= 2; ++k2) {
      const Vector a = random_components(rng, m, k1);
      const Vector b = random_components(rng, m, k2);
      const Vector c = random_components(rng, m, 1);
      const double sign = ((k1 * k2) % 2 == 0) ? 1.0 : -1.0;
      const Vector ab = wedge_components(m, k1, a, k2, b);
      CHECK((ab - sign * wedge_components(m, k2, b, k1, a)).norm() < 1e-12 * (1.0 + ab.norm()));
      const Vector left = wedge_components(m, k1 + k2, ab, 1, c);
      const Vector right = wedge_components(m, k1, a, k2 + 1, wedge_components(m, k2, b, 1, c));
      CHECK((left - right).norm() < 1e-12 * (1.0 + left.norm()));
    }
  }
  // dx0 ^ dx1 evaluated on (e0, e1)
  const Vector w = wedge_components(3, 1, Vector::Unit(3, 0), 1, Vector::Unit(3, 1));
  CHECK(w[multi_index_rank(3, {0, 1})] == 1.0);
  CHECK(w.cwiseAbs().sum() == 1.0);
}

TEST_CASE("pullback uses compound matrices and is functorial") {
  std::mt19937_64 rng(14);
  const int m = 4;
  for (int k = 1; k <= m; ++k) {
    const Matrix a = Matrix::NullaryExpr(m, m, [&]() { return random_vector(rng, 1)[0]; });
    const Matrix b = Matrix::NullaryExpr(m, m, [&]() { return random_vector(rng, 1)[0]; });
    const Matrix lhs = compound_matrix(a * b, k);
    CHECK((lhs - compound_matrix(a, k) * compound_matrix(b, k)).norm() < 1e-10 * (1.0 + lhs.norm()));

    const Vector c = random_components(rng, m, k);
    auto vs = random_vectors(rng, m, k);
    std::vector<ChartVector> mapped;
    for (const auto& v : vs) mapped.push_back(a * v);
    const double direct = eval_components(m, k, c, mapped);
    CHECK(eval_components(m, k, pullback_components(m, k, c, a), vs) == doctest::Approx(direct).epsilon(1e-11));
  }
  CHECK(compound_matrix(Matrix::Identity(5, 5), 2).isIdentity(0.0));
}

TEST_CASE("exterior derivative of simple fixtures") {
  const int m = 3;
  // d(x1 dx2) = dx1 ^ dx2
  const KFormField f(m, 1, [](const ChartPoint& x) {
    Vector c = Vector::Zero(3);
    c[2] = x[1];
    return c;
  });
  Vector x(3);
  x << 0.4, -1.3, 2.2;
  const Vector d = exterior_derivative(f).components(x);
  Vector expected = Vector::Zero(3);
  expected[multi_index_rank(3, {1, 2})] = 1.0;
  CHECK((d - expected).norm() < 1e-9);

  // d(sin(x0 x1) dx0 + x2^2 dx1 + e^x0 dx2) in closed form
  const KFormField g(m, 1, [](const ChartPoint& p) {
    Vector c(3);
    c << std::sin(p[0] * p[1]), p[2] * p[2], std::exp(p[0]);
    return c;
  });
  Vector dg(3);
  dg[multi_index_rank(3, {0, 1})] = -x[0] * std::cos(x[0] * x[1]);
  dg[multi_index_rank(3, {0, 2})] = std::exp(x[0]);
  dg[multi_index_rank(3, {1, 2})] = -2.0 * x[2];
  const KFormField dgf = exterior_derivative(g);
  CHECK((dgf.components(x) - dg).norm() < 1e-7);
  CHECK(exterior_derivative(dgf).components(x).norm() < 1e-6);
  CHECK_THROWS_AS(exterior_derivative(exterior_derivative(dgf)), Error);
}

TEST_CASE("d d vanishes with the space-aware stencil") {
  std::mt19937_64 rng(15);
  auto h = make_hyperbolic(3);
  const KFormField f(3, 1, [](const ChartPoint& p) {
    Vector c(3);
    c << std::cos(p[1]) * p[2], p[0] * p[0] * p[1], std::sin(p[0] + p[2]);
    return c;
  });
  const KFormField dd = exterior_derivative(exterior_derivative(f, h.get()), h.get());
  for (double r : {0.5, 2.0, 4.0}) {
    const ChartPoint x = at_radius(*h, rng, r);
    CHECK(h_norm_form(*h, dd, x) < 1e-5);
  }
}

TEST_CASE("scaling pullback of constant and volume forms") {
  std::mt19937_64 rng(16);
  auto e = make_euclidean(3);
  const Vector c = random_components(rng, 3, 2);
  const KFormField f = constant_form(3, 2, c);
  const ChartPoint x = random_vector(rng, 3);
  for (double t : {0.1, 0.5, 1.0}) {
    CHECK((pullback_scaling(*e, Vector::Zero(3), f, t).components(x) - t * t * c).norm() < 1e-12);
  }

  // On H^2, vol = sinh r dr ^ dtheta and tau_t^* vol = t sinh(t r) dr ^ dtheta.
  auto h = make_hyperbolic(2);
  const KFormField vol = volume_form(*h);
  for (double r : {0.7, 3.0}) {
    const ChartPoint p = at_radius(*h, rng, r);
    for (double t : {0.25, 0.8}) {
      const double factor = t * std::sinh(t * r) / std::sinh(r);
      const Vector got = pullback_scaling(*h, Vector::Zero(2), vol, t).components(p);
      CHECK((got - factor * vol.components(p)).norm() < 1e-8 * vol.components(p).norm());
    }
  }
  CHECK_THROWS_AS(pullback_scaling(*h, Vector::Zero(2), vol, 0.0), Error);
}

TEST_CASE("induced norms") {
  std::mt19937_64 rng(17);
  for (auto s : {make_hyperbolic(2), make_hyperbolic(3), make_complex_hyperbolic(2), make_warped_profile(3)}) {
    const KFormField vol = volume_form(*s);
    for (double r : {0.3, 2.0, 0.9 * s->chart_radius()}) {
      CHECK(h_norm_form(*s, vol, at_radius(*s, rng, r)) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  // |dx0|^2 = g^{00} from the polar form of the H^2 metric.
  auto h = make_hyperbolic(2);
  const KFormField dx0 = coordinate_form(2, {0});
  for (double r : {0.5, 2.5}) {
    Vector x(2);
    x << r * std::cos(1.1), r * std::sin(1.1);
    const double w = std::sinh(r) / r;
    const double c2 = std::pow(std::cos(1.1), 2), s2 = std::pow(std::sin(1.1), 2);
    CHECK(h_norm_form(*h, dx0, x) == doctest::Approx(std::sqrt(c2 + s2 / (w * w))).epsilon(1e-12));
  }

  // Contraction: |F _| Z| <= |Z| |F|
  auto h3 = make_hyperbolic(3);
  for (int i = 0; i < 20; ++i) {
    const ChartPoint x = at_radius(*h3, rng, 3.0);
    const Matrix g = h3->metric_at(x);
    const Vector c = random_components(rng, 3, 2);
    const Vector z = random_vector(rng, 3);
    const double lhs = h_norm_components(g, 1, interior_components(3, 2, c, z));
    CHECK(lhs <= h3->norm(x, z) * h_norm_components(g, 2, c) * (1.0 + 1e-12));
  }
}

TEST_CASE("comass is bounded by the inner-product norm") {
  std::mt19937_64 rng(18);
  const Matrix g = Matrix::Identity(4, 4);
  Vector omega = Vector::Zero(6);
  omega[multi_index_rank(4, {0, 1})] = 1.0;
  omega[multi_index_rank(4, {2, 3})] = 1.0;
  const double comass = comass_estimate(g, 2, omega, rng, 4000);
  CHECK(comass <= 1.0 + 1e-12);
  CHECK(comass > 0.95);
  CHECK(h_norm_components(g, 2, omega) == doctest::Approx(std::sqrt(2.0)));
  CHECK(h_norm_components(g, 2, omega) <= std::sqrt(6.0) * comass);

  // A decomposable form has comass equal to its norm.
  const Vector simple = wedge_components(4, 1, Vector::Unit(4, 0), 1, Vector::Unit(4, 2));
  CHECK(comass_estimate(g, 2, simple, rng, 4000) == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("sup estimates are monotone in nested samples") {
  auto h = make_hyperbolic(3);
  const KFormField f = coordinate_form(3, {0, 2});
  const auto pts = sample_geodesic_ball(*h, 5, 200, 0.0, 4.0);
  double prev = 0.0;
  for (std::size_t n : {10u, 50u, 100u, 200u}) {
    const SupEstimate s = sup_norm_estimate(*h, f, std::span(pts.data(), n));
    CHECK(s.value >= prev);
    CHECK(s.argmax < n);
    CHECK(h_norm_form(*h, f, s.point) == s.value);
    prev = s.value;
  }
  CHECK_THROWS_AS(sup_norm_estimate(*h, f, std::span<const ChartPoint>()), Error);
}
