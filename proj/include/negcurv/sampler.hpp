#pragma once

#include "negcurv/model_space.hpp"
#include "negcurv/types.hpp"

#include <cstdint>
#include <vector>

namespace negcurv {

// Halton sequence with a seeded Cranley-Patterson rotation. Point i depends
// only on (seed, i), so streams are nested in n.
class HaltonSequence {
 public:
  HaltonSequence(int dim, std::uint64_t seed);
  int dim() const { return static_cast<int>(shift_.size()); }
  Vector point(std::uint64_t index) const;

 private:
  std::vector<double> shift_;
};

// Quasi-random points in the closed unit ball / on the unit sphere of R^m
// (rejection from the cube, so the first n points of a longer stream are the
// n-point stream).
std::vector<Vector> sample_unit_ball(int m, std::uint64_t seed, std::size_t n);
std::vector<Vector> sample_unit_sphere(int m, std::uint64_t seed, std::size_t n);

enum class RadialLaw {
  kVolume,   // uniform in the tangent-space ball
  kUniform,  // geodesic radius uniform in [r_min, r_max]
};

// Points exp_p(r u) with u an h-unit direction at p and r in [r_min, r_max].
std::vector<ChartPoint> sample_geodesic_ball(const ModelSpace& space, std::uint64_t seed, std::size_t n,
                                             double r_min, double r_max, RadialLaw law = RadialLaw::kVolume);
// Points on the geodesic sphere of radius r about p.
std::vector<ChartPoint> sample_geodesic_sphere(const ModelSpace& space, std::uint64_t seed, std::size_t n, double r);

// splitmix64 finalizer; per-sample RNG streams are seeded from the seed and the sample point.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace negcurv
