// Brute-force reference implementations used as oracles: straight scans over
// the atom list, no spatial index, no blocking. Range-sum oracles accumulate
// in atom order through the same compensated accumulator the library uses, so
// "equal" means bitwise equal; operator oracles use plain summation and are
// compared at 1e-12.
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "porolab/geometry.hpp"
#include "porolab/kernels.hpp"
#include "porolab/measure.hpp"
#include "porolab/simple_function.hpp"
#include "porolab/surfaces.hpp"

namespace oracles {

using namespace porolab;

inline double ball_mass(const AtomicMeasure& mu, const Vec& x, double r) {
  const double r2 = r * r;
  Kahan acc;
  for (size_t i = 0; i < mu.count(); ++i)
    if (dist2(mu.point(i), x.data(), mu.dim) <= r2) acc.add(mu.weights[i]);
  return acc.value();
}

inline double cube_mass(const AtomicMeasure& mu, const HalfOpenCube& c) {
  Kahan acc;
  for (size_t i = 0; i < mu.count(); ++i)
    if (c.contains(mu.point(i))) acc.add(mu.weights[i]);
  return acc.value();
}

inline double plane_band_mass(const AtomicMeasure& mu, const DirectionPlane& pl,
                              double lo, double hi) {
  Kahan acc;
  const double lo2 = lo * lo, hi2 = hi * hi;
  for (size_t i = 0; i < mu.count(); ++i) {
    const double d2 = pl.distance2(mu.point(i));
    if (d2 >= lo2 && d2 < hi2) acc.add(mu.weights[i]);
  }
  return acc.value();
}

inline double sphere_band_mass(const AtomicMeasure& mu, const SphereShell& sh,
                               double lo, double hi) {
  Kahan acc;
  for (size_t i = 0; i < mu.count(); ++i) {
    const double* p = mu.point(i);
    const double rho = std::sqrt(dist2(p, sh.center.data(), mu.dim));
    if (rho > sh.radius) continue;
    const double d = sh.radius - rho;
    if (d >= lo && d < hi) acc.add(mu.weights[i]);
  }
  return acc.value();
}

inline double nearest_dist(const AtomicMeasure& mu, const double* p) {
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < mu.count(); ++i)
    best = std::min(best, dist2(mu.point(i), p, mu.dim));
  return std::sqrt(best);
}

inline double truncated_apply(const AtomicMeasure& mu, const KernelSpec& K,
                              const SimpleFunction& f, const Vec& x,
                              double eps) {
  double acc = 0;
  double z[kMaxDim];
  const double e2 = eps * eps;
  for (size_t i = 0; i < mu.count(); ++i) {
    const double* p = mu.point(i);
    double d2 = 0;
    for (int d = 0; d < mu.dim; ++d) {
      z[d] = x.v[d] - p[d];
      d2 += z[d] * z[d];
    }
    if (d2 <= e2) continue;
    acc += K(z, mu.dim) * f.eval(p, mu.dim) * mu.weights[i];
  }
  return acc;
}

inline double bilinear(const AtomicMeasure& mu, const KernelSpec& K,
                       const SimpleFunction& f, const SimpleFunction& g,
                       double eps) {
  double acc = 0;
  double z[kMaxDim];
  const double e2 = eps * eps;
  for (size_t xi = 0; xi < mu.count(); ++xi) {
    const double* px = mu.point(xi);
    const double gv = g.eval(px, mu.dim);
    if (gv == 0) continue;
    double inner = 0;
    for (size_t yi = 0; yi < mu.count(); ++yi) {
      const double* py = mu.point(yi);
      double d2 = 0;
      for (int d = 0; d < mu.dim; ++d) {
        z[d] = px[d] - py[d];
        d2 += z[d] * z[d];
      }
      if (d2 <= e2) continue;
      inner += K(z, mu.dim) * f.eval(py, mu.dim) * mu.weights[yi];
    }
    acc += inner * gv * mu.weights[xi];
  }
  return acc;
}

inline double maximal(const AtomicMeasure& mu, const KernelSpec& K,
                      const SimpleFunction& f, const Vec& x,
                      const std::vector<double>& schedule) {
  double m = 0;
  for (double eps : schedule)
    m = std::max(m, std::fabs(oracles::truncated_apply(mu, K, f, x, eps)));
  return m;
}

inline double averaged(const AtomicMeasure& mu, const KernelSpec& K,
                       const SimpleFunction& f, const Vec& zc, double r) {
  const double r2 = r * r;
  double mass = 0, acc = 0;
  double z[kMaxDim];
  for (size_t xi = 0; xi < mu.count(); ++xi) {
    const double* px = mu.point(xi);
    if (dist2(px, zc.data(), mu.dim) > r2) continue;
    mass += mu.weights[xi];
    for (size_t yi = 0; yi < mu.count(); ++yi) {
      const double* py = mu.point(yi);
      if (dist2(py, zc.data(), mu.dim) <= r2) continue;
      for (int d = 0; d < mu.dim; ++d) z[d] = px[d] - py[d];
      acc += K(z, mu.dim) * f.eval(py, mu.dim) * mu.weights[yi] * mu.weights[xi];
    }
  }
  return acc / mass;
}

inline double cross_value(const AtomicMeasure& mu, const KernelSpec& K,
                          const HalfOpenCube& cube) {
  const Box open_box = cube.to_box();
  double acc = 0;
  double z[kMaxDim];
  for (size_t xi = 0; xi < mu.count(); ++xi) {
    const double* px = mu.point(xi);
    if (!cube.contains(px) || !open_box.contains_open(px)) continue;
    for (size_t yi = 0; yi < mu.count(); ++yi) {
      const double* py = mu.point(yi);
      if (cube.contains(py)) continue;
      for (int d = 0; d < mu.dim; ++d) z[d] = px[d] - py[d];
      acc += std::fabs(K(z, mu.dim)) * mu.weights[xi] * mu.weights[yi];
    }
  }
  return acc;
}

// Dense scan over candidate hole centers on the plane through x: the best
// certified radius min(nearest-atom distance - 2h, r - |y-x|) over a uniform
// tangent grid. Independent of the kd-tree and the staged search.
inline double best_hole_radius(const AtomicMeasure& mu, const Vec& x, double r,
                               const DirectionPlane& plane, int samples) {
  const DirectionPlane pl = plane.through(x);
  const size_t m = static_cast<size_t>(pl.plane_dim);
  std::vector<int> ticks(m, 0);
  double best = -std::numeric_limits<double>::infinity();
  for (;;) {
    Vec y = x;
    for (size_t a = 0; a < m; ++a) {
      const double t = r * (2.0 * ticks[a] / (samples - 1) - 1.0);
      for (int i = 0; i < y.n; ++i) y.v[i] += t * pl.tangent[a].v[i];
    }
    const double slack = r - dist(y, x);
    if (slack > 0) {
      const double nn = nearest_dist(mu, y.data());
      best = std::max(best, std::min(nn - 2.0 * mu.resolution, slack));
    }
    size_t a = 0;
    while (a < m && ++ticks[a] == samples) ticks[a++] = 0;
    if (a == m) break;
  }
  return best;
}

inline bool close(double a, double b, double tol = 1e-12) {
  return std::fabs(a - b) <= tol * std::max(1.0, std::max(std::fabs(a), std::fabs(b)));
}

}  // namespace oracles
