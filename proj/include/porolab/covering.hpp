#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "porolab/approx.hpp"
#include "porolab/errors.hpp"
#include "porolab/geometry.hpp"
#include "porolab/measure.hpp"

namespace porolab {

// Grid Gr(x,r,i,q): points g in A(x,r) with g^i = x^i and, on every other
// axis, the q midpoints g^j = (x^j - r/2) + (r / 2q)(2k - 1), k = 1..q.
struct GridSpec {
  Vec x;
  double r = 0;
  int axis = 0;  // 1-based: the coordinate held fixed
  int q = 0;
  std::vector<double> points;  // count * dim, in odometer order

  size_t count() const {
    return points.size() / static_cast<size_t>(x.n);
  }
  Vec point(size_t j) const {
    return Vec::from(points.data() + j * static_cast<size_t>(x.n), x.n);
  }
};

inline GridSpec grid_points(const Vec& x, double r, int axis, int q) {
  const int n = x.n;
  if (axis < 1 || axis > n) throw UsageError("grid axis out of range");
  if (q < 1) throw UsageError("grid fineness q must be >= 1");
  if (!(r > 0)) throw UsageError("grid side r must be positive");
  GridSpec gs;
  gs.x = x;
  gs.r = r;
  gs.axis = axis;
  gs.q = q;
  size_t total = 1;
  for (int d = 1; d < n; ++d) total *= static_cast<size_t>(q);
  gs.points.reserve(total * static_cast<size_t>(n));
  std::vector<int> ticks(static_cast<size_t>(n - 1), 0);
  for (;;) {
    Vec g = x;
    int slot = 0;
    for (int d = 0; d < n; ++d) {
      if (d == axis - 1) continue;
      const int k = ticks[static_cast<size_t>(slot++)] + 1;
      g.v[d] = (x.v[d] - r / 2) + (r / (2.0 * q)) * (2.0 * k - 1.0);
    }
    for (int d = 0; d < n; ++d) gs.points.push_back(g.v[d]);
    int a = 0;
    while (a < n - 1 && ++ticks[static_cast<size_t>(a)] == q)
      ticks[static_cast<size_t>(a++)] = 0;
    if (a == n - 1) break;
  }
  return gs;
}

struct GridHoleResult {
  bool found = false;
  Vec g;                 // winning grid point
  double clearance = 0;  // nearest-atom distance from the subcube center
  size_t candidates = 0;
};

// Looks for a grid point g in Gr(center, side, i, M) whose subcube
// A(g, side/M), shrunk by 2h per face, holds no atom. Among the empty
// candidates the one with the largest center clearance wins; exact ties go to
// the lexicographically smallest center.
inline GridHoleResult find_grid_hole(const AtomicMeasure& mu,
                                     const HalfOpenCube& cube, int axis, int M) {
  if (M < 4 || M % 2 != 0) throw UsageError("grid refinement M must be even, >= 4");
  const GridSpec gs = grid_points(cube.center, cube.side, axis, M);
  const double sub = cube.side / M;
  const double h = mu.resolution;
  GridHoleResult res;
  res.candidates = gs.count();
  std::vector<uint32_t> idx;
  for (size_t j = 0; j < gs.count(); ++j) {
    const Vec g = gs.point(j);
    HalfOpenCube subcube{g, sub};
    Box probe = subcube.to_box().shrunk(2.0 * h);
    bool empty = true;
    if (probe.hi.v[0] > probe.lo.v[0]) {
      mu.index().query_box(
          probe,
          [&](const double* p) {
            for (int d = 0; d < probe.lo.n; ++d)
              if (p[d] < probe.lo.v[d] || p[d] >= probe.hi.v[d]) return false;
            return true;
          },
          idx);
      empty = idx.empty();
    } else {
      empty = false;  // subcube thinner than the guard: nothing to certify
    }
    if (!empty) continue;
    const double clear = mu.nearest_atom_dist(g.data());
    if (!res.found || clear > res.clearance ||
        (clear == res.clearance && lex_less(g, res.g))) {
      res.found = true;
      res.g = g;
      res.clearance = clear;
    }
  }
  return res;
}

// ---- inductive coverings -----------------------------------------------------

struct CoveringLevel {
  int level = 0;
  size_t cube_count = 0;
  double expected_count = 0;  // (M^{n-1} - 1)^level
  bool coverage_ok = true;
  double strip_half_width = 0;
};

struct CoveringFamily {
  Vec x;
  double r = 0;
  int axis = 0;
  int M = 0;
  int levels_requested = 0;
  bool complete = true;            // all grid holes succeeded
  std::optional<Vec> failing_cube;  // center of the first cube without a hole
  std::vector<CoveringLevel> levels;
  std::vector<double> final_centers;  // count * dim, cube centers at the last level
  double final_side = 0;
};

// Level 0 is {A(x,r)}; each level replaces every cube by its M^{n-1} grid
// subcubes minus the certified hole, so level k holds (M^{n-1}-1)^k cubes.
// Every level checks that the atoms of the matching axis strip inside A(x,r)
// stay inside the union of its cubes, padded by 2h.
inline CoveringFamily build_covering(const AtomicMeasure& mu,
                                     const LimitSetApprox& approx, const Vec& x,
                                     double r, int axis, int M, int k,
                                     size_t cube_budget = size_t{1} << 22) {
  if (k < 0) throw UsageError("covering level k must be >= 0");
  if (axis < 1 || axis > mu.dim) throw UsageError("covering axis out of range");
  const double h = mu.resolution;
  if (r * std::pow(static_cast<double>(M), -static_cast<double>(k)) < 4.0 * h) {
    // Name the depth that would make the finest cubes resolvable.
    const double target = r * std::pow(static_cast<double>(M), -static_cast<double>(k)) / 4.0;
    const double s = approx.spec.uniform_ratio_bound;
    const int needed = static_cast<int>(
        std::ceil(std::log(target / approx.seed_diameter) / std::log(s)));
    throw RefinementError(
        "covering level " + std::to_string(k) + " needs resolution <= " +
            std::to_string(target) + "; regenerate at depth >= " +
            std::to_string(needed),
        needed);
  }

  CoveringFamily fam;
  fam.x = x;
  fam.r = r;
  fam.axis = axis;
  fam.M = M;
  fam.levels_requested = k;

  const int n = mu.dim;
  double per_level = 1;
  for (int d = 1; d < n; ++d) per_level *= M;
  const double branch = per_level - 1.0;

  std::vector<double> centers(x.data(), x.data() + n);
  double side = r;
  std::vector<uint32_t> idx;

  auto check_coverage = [&](int level, const std::vector<double>& ctrs,
                            double cside) {
    const double half_width =
        r * 0.5 * std::pow(static_cast<double>(M), -static_cast<double>(level));
    const HalfOpenCube outer{x, r};
    Box probe = outer.to_box();
    bool ok = true;
    mu.index().query_box(
        probe,
        [&](const double* p) {
          if (!outer.contains(p)) return false;
          return std::fabs(p[axis - 1] - x.v[axis - 1]) < half_width;
        },
        idx);
    const size_t n_cubes = ctrs.size() / static_cast<size_t>(n);
    for (uint32_t ai : idx) {
      const double* p = mu.point(ai);
      bool inside = false;
      for (size_t c = 0; c < n_cubes && !inside; ++c) {
        const double* cc = ctrs.data() + c * static_cast<size_t>(n);
        inside = true;
        for (int d = 0; d < n; ++d) {
          const double lo = cc[d] - cside / 2 - 2.0 * h;
          const double hi = cc[d] + cside / 2 + 2.0 * h;
          if (p[d] < lo || p[d] >= hi) {
            inside = false;
            break;
          }
        }
      }
      if (!inside) {
        ok = false;
        break;
      }
    }
    return std::pair<bool, double>(ok, half_width);
  };

  {
    auto [ok, hw] = check_coverage(0, centers, side);
    fam.levels.push_back({0, 1, 1.0, ok, hw});
  }

  for (int level = 1; level <= k && fam.complete; ++level) {
    const double expect = std::pow(branch, static_cast<double>(level));
    if (expect > static_cast<double>(cube_budget))
      throw CapacityError("covering cube budget exceeded at level " +
                              std::to_string(level),
                          expect);
    std::vector<double> next;
    next.reserve(static_cast<size_t>(expect) * static_cast<size_t>(n));
    const size_t n_cubes = centers.size() / static_cast<size_t>(n);
    for (size_t c = 0; c < n_cubes; ++c) {
      const Vec cc = Vec::from(centers.data() + c * static_cast<size_t>(n), n);
      const HalfOpenCube cube{cc, side};
      const GridHoleResult hole = find_grid_hole(mu, cube, axis, M);
      if (!hole.found) {
        fam.complete = false;
        fam.failing_cube = cc;
        break;
      }
      const GridSpec gs = grid_points(cc, side, axis, M);
      for (size_t j = 0; j < gs.count(); ++j) {
        const Vec g = gs.point(j);
        bool is_hole = true;
        for (int d = 0; d < n; ++d)
          if (g.v[d] != hole.g.v[d]) {
            is_hole = false;
            break;
          }
        if (is_hole) continue;
        for (int d = 0; d < n; ++d) next.push_back(g.v[d]);
      }
    }
    if (!fam.complete) break;
    centers = std::move(next);
    side /= M;
    auto [ok, hw] = check_coverage(level, centers, side);
    fam.levels.push_back({level, centers.size() / static_cast<size_t>(n),
                          expect, ok, hw});
  }

  fam.final_centers = std::move(centers);
  fam.final_side = side;
  return fam;
}

}  // namespace porolab
