#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "porolab/errors.hpp"
#include "porolab/geometry.hpp"

namespace porolab {

// An m-plane V + base in R^n, carried as an orthonormal tangent basis (m
// vectors spanning V) plus an orthonormal normal basis (n - m vectors spanning
// the orthogonal complement). d(x, plane) is the norm of the normal-basis
// projection of x - base.
struct DirectionPlane {
  Vec base;
  int plane_dim = 0;
  std::vector<Vec> tangent;
  std::vector<Vec> normal;
  std::string id;

  int ambient_dim() const { return base.n; }

  double distance2(const double* p) const {
    double s = 0;
    for (const Vec& u : normal) {
      double t = 0;
      for (int i = 0; i < base.n; ++i) t += u.v[i] * (p[i] - base.v[i]);
      s += t * t;
    }
    return s;
  }
  double distance(const double* p) const { return std::sqrt(distance2(p)); }
  double distance(const Vec& p) const { return distance(p.data()); }

  // Range of d(.,plane)^2 over a closed box, via the interval of each normal
  // coordinate (a linear function attains its box extremes at corners, read
  // off from coefficient signs).
  void cell_bounds2(const Box& cell, double& lo2, double& hi2) const {
    lo2 = 0;
    hi2 = 0;
    for (const Vec& u : normal) {
      double tmin = 0, tmax = 0;
      for (int i = 0; i < base.n; ++i) {
        const double a = cell.lo.v[i] - base.v[i];
        const double b = cell.hi.v[i] - base.v[i];
        const double x = u.v[i] * a, y = u.v[i] * b;
        tmin += std::min(x, y);
        tmax += std::max(x, y);
      }
      double amin = 0;
      if (tmin > 0) amin = tmin;
      else if (tmax < 0) amin = -tmax;
      const double amax = std::max(std::fabs(tmin), std::fabs(tmax));
      lo2 += amin * amin;
      hi2 += amax * amax;
    }
  }

  void validate() const {
    const int n = base.n;
    if (plane_dim < 1 || plane_dim >= n)
      throw UsageError("plane dimension must lie in [1, n-1]");
    if (static_cast<int>(tangent.size()) != plane_dim ||
        static_cast<int>(normal.size()) != n - plane_dim)
      throw UsageError("plane basis has wrong cardinality");
    auto check = [&](const std::vector<Vec>& basis) {
      for (size_t i = 0; i < basis.size(); ++i)
        for (size_t j = i; j < basis.size(); ++j) {
          const double d = dot(basis[i], basis[j]) - (i == j ? 1.0 : 0.0);
          if (std::fabs(d) > 1e-12)
            throw UsageError("plane basis not orthonormal at 1e-12");
        }
    };
    check(tangent);
    check(normal);
    for (const Vec& t : tangent)
      for (const Vec& u : normal)
        if (std::fabs(dot(t, u)) > 1e-12)
          throw UsageError("plane bases not mutually orthogonal");
  }

  // Coordinate hyperplane {x : x^axis = base^axis} (1-based axis).
  static DirectionPlane coordinate(int n, int axis, const Vec& base) {
    if (axis < 1 || axis > n) throw UsageError("axis out of range");
    DirectionPlane pl;
    pl.base = base;
    pl.plane_dim = n - 1;
    Vec u = Vec::zero(n);
    u.v[axis - 1] = 1.0;
    pl.normal = {u};
    for (int i = 0; i < n; ++i) {
      if (i == axis - 1) continue;
      Vec t = Vec::zero(n);
      t.v[i] = 1.0;
      pl.tangent.push_back(t);
    }
    pl.id = "axis" + std::to_string(axis);
    pl.validate();
    return pl;
  }

  // Line through `base` at angle theta in the plane (n = 2 only).
  static DirectionPlane line2(double theta, const Vec& base) {
    if (base.n != 2) throw UsageError("line2 needs ambient dimension 2");
    DirectionPlane pl;
    pl.base = base;
    pl.plane_dim = 1;
    pl.tangent = {Vec{std::cos(theta), std::sin(theta)}};
    pl.normal = {Vec{-std::sin(theta), std::cos(theta)}};
    pl.id = "theta" + std::to_string(theta);
    pl.validate();
    return pl;
  }

  // Hyperplane with the given (not necessarily unit) normal vector.
  static DirectionPlane hyperplane(const Vec& normal_dir, const Vec& base) {
    const int n = base.n;
    const double len = norm(normal_dir);
    if (!(len > 0)) throw UsageError("hyperplane normal must be nonzero");
    DirectionPlane pl;
    pl.base = base;
    pl.plane_dim = n - 1;
    Vec u = normal_dir * (1.0 / len);
    pl.normal = {u};
    // Complete to an orthonormal basis by Gram-Schmidt on coordinate vectors.
    for (int i = 0; i < n && static_cast<int>(pl.tangent.size()) < n - 1; ++i) {
      Vec c = Vec::zero(n);
      c.v[i] = 1.0;
      Vec w = c - u * dot(c, u);
      for (const Vec& t : pl.tangent) w = w - t * dot(w, t);
      const double wl = norm(w);
      if (wl > 1e-8) pl.tangent.push_back(w * (1.0 / wl));
    }
    pl.id = "normal";
    pl.validate();
    return pl;
  }

  DirectionPlane through(const Vec& new_base) const {
    DirectionPlane pl = *this;
    pl.base = new_base;
    return pl;
  }
};

struct SphereShell {
  Vec center;
  double radius = 0;
  std::string id = "sphere";

  void validate() const {
    if (!(radius > 0)) throw UsageError("sphere radius must be positive");
  }

  // Distance to the sphere surface.
  double distance(const double* p) const {
    return std::fabs(std::sqrt(dist2(p, center.data(), center.n)) - radius);
  }
  double distance(const Vec& p) const { return distance(p.data()); }
};

}  // namespace porolab
