#include "negcurv/sampler.hpp"

#include <cmath>
#include <random>

namespace negcurv {

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61};

double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base, f = inv, v = 0.0;
  while (i > 0) {
    v += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return v;
}

// Accepted cube points of the rejection stream, in order.
std::vector<Vector> ball_stream(int m, int extra, std::uint64_t seed, std::size_t n) {
  const HaltonSequence seq(m + extra, seed);
  std::vector<Vector> out;
  out.reserve(n);
  for (std::uint64_t i = 1; out.size() < n; ++i) {
    const Vector c = seq.point(i);
    Vector y = 2.0 * c.head(m) - Vector::Ones(m);
    if (y.squaredNorm() > 1.0) continue;
    Vector full(m + extra);
    full << y, c.tail(extra);
    out.push_back(std::move(full));
  }
  return out;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

HaltonSequence::HaltonSequence(int dim, std::uint64_t seed) {
  if (dim < 1 || dim > static_cast<int>(std::size(kPrimes))) {
    throw Error(ErrorCode::kInvalidArgument, "HaltonSequence: unsupported dimension");
  }
  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  shift_.resize(dim);
  for (auto& s : shift_) s = u(rng);
}

Vector HaltonSequence::point(std::uint64_t index) const {
  Vector p(dim());
  for (int d = 0; d < dim(); ++d) {
    double v = radical_inverse(index, kPrimes[d]) + shift_[d];
    p[d] = v - std::floor(v);
  }
  return p;
}

std::vector<Vector> sample_unit_ball(int m, std::uint64_t seed, std::size_t n) {
  return ball_stream(m, 0, seed, n);
}

std::vector<Vector> sample_unit_sphere(int m, std::uint64_t seed, std::size_t n) {
  const HaltonSequence seq(m, seed);
  std::vector<Vector> out;
  out.reserve(n);
  for (std::uint64_t i = 1; out.size() < n; ++i) {
    const Vector y = 2.0 * seq.point(i) - Vector::Ones(m);
    const double len = y.norm();
    // The inner cutoff keeps the normalization well conditioned.
    if (len > 1.0 || len < 0.05) continue;
    out.push_back(y / len);
  }
  return out;
}

std::vector<ChartPoint> sample_geodesic_ball(const ModelSpace& space, std::uint64_t seed, std::size_t n, double r_min,
                                             double r_max, RadialLaw law) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "sampler: n must be >= 1");
  if (!(r_min >= 0.0 && r_max >= r_min && r_max <= space.chart_radius())) {
    throw Error(ErrorCode::kInvalidArgument, "sampler: radius range outside the chart");
  }
  const int m = space.dim();
  const ChartPoint origin = Vector::Zero(m);
  const std::vector<Vector> raw = ball_stream(m, 1, seed, n);
  std::vector<ChartPoint> out;
  out.reserve(n);
  for (const Vector& p : raw) {
    const Vector y = p.head(m);
    const double len = y.norm();
    const double u = p[m];
    double r = 0.0;
    if (law == RadialLaw::kVolume) {
      const double lo = std::pow(r_min, m), hi = std::pow(r_max, m);
      r = std::pow(lo + std::pow(len, m) * (hi - lo), 1.0 / m);
    } else {
      r = r_min + u * (r_max - r_min);
    }
    Vector dir = len > 0.0 ? Vector(y / len) : Vector(Vector::Unit(m, 0));
    dir /= space.norm(origin, dir);
    out.push_back(space.exp_origin(r * dir));
  }
  return out;
}

std::vector<ChartPoint> sample_geodesic_sphere(const ModelSpace& space, std::uint64_t seed, std::size_t n, double r) {
  if (!(r > 0.0 && r <= space.chart_radius())) throw Error(ErrorCode::kInvalidArgument, "sampler: sphere radius outside the chart");
  const ChartPoint origin = Vector::Zero(space.dim());
  std::vector<ChartPoint> out;
  for (Vector d : sample_unit_sphere(space.dim(), seed, n)) {
    d /= space.norm(origin, d);
    out.push_back(space.exp_origin(r * d));
  }
  return out;
}

}  // namespace negcurv
