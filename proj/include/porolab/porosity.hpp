#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "porolab/approx.hpp"
#include "porolab/errors.hpp"
#include "porolab/geometry.hpp"
#include "porolab/measure.hpp"
#include "porolab/parallel.hpp"
#include "porolab/rng.hpp"
#include "porolab/surfaces.hpp"

namespace porolab {

// A certified hole: B(center, hole_radius) sits inside B(outer_center, r),
// the center lies on the admissible plane through the outer center, and no
// atom comes within hole_radius of the center. hole_radius already carries the
// 2h discretization shrink, so a positive certificate against the atom cloud
// is a hole for the limit set itself.
struct HoleCertificate {
  Vec center;
  double hole_radius = 0;
  Vec outer_center;
  double outer_radius = 0;
  double c_value = 0;
  double clearance_margin = 0;

  bool containment_ok() const {
    return dist(center, outer_center) + hole_radius <= outer_radius;
  }
};

enum class HoleStatus { hole, no_hole };

struct HoleSearchResult {
  HoleStatus status = HoleStatus::no_hole;
  HoleCertificate best;           // valid certificate, or the best failing candidate
  double plane_offset = 0;        // norm of the normal projection of center-x
  size_t candidates_tried = 0;
};

namespace detail {

// Candidate centers live on the plane through x; parametrize by tangent
// coordinates t and score by the radius a ball centered there may take.
struct PlaneSampler {
  const DirectionPlane* plane;
  Vec x;
  double r;

  Vec at(const std::vector<double>& t) const {
    Vec y = x;
    for (size_t a = 0; a < t.size(); ++a)
      for (int i = 0; i < y.n; ++i) y.v[i] += t[a] * plane->tangent[a].v[i];
    return y;
  }
};

// Deterministic pattern search maximizing `score` over the tangent
// coordinates, starting from t0 with the given initial step.
inline void pattern_search(const PlaneSampler& ps,
                           const std::function<double(const Vec&)>& score,
                           std::vector<double>& t0, double& best, double step,
                           int iters) {
  const size_t m = t0.size();
  Vec y = ps.at(t0);
  best = score(y);
  for (int it = 0; it < iters; ++it) {
    bool improved = false;
    for (size_t a = 0; a < m; ++a) {
      for (double sgn : {+1.0, -1.0}) {
        std::vector<double> t = t0;
        t[a] += sgn * step;
        const Vec cand = ps.at(t);
        const double s = score(cand);
        if (s > best) {
          best = s;
          t0 = t;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
    if (step < 1e-14) break;
  }
}

}  // namespace detail

struct HoleSearchOptions {
  int coarse_samples_per_axis = 129;  // stage-B grid resolution along the plane
  int refine_iters = 60;
  int stage_a_samples = 33;           // per-axis grid for the avoidance stage
};

// Directed hole search at (x, r) with centers restricted to plane + x.
//
// Stage A walks the stopping family: starting from B(x, r), it repeatedly
// recenters on the plane to avoid one cylinder box after another, keeping the
// shrinking ball nested. Stage B treats the surviving center, together with a
// coarse plane grid, as seeds for a pattern search on
//     min(nearest-atom distance - 2h, r - |y - x|),
// the certified radius of a candidate. A candidate below 4h is a no-hole
// outcome, which is data (rectifiable directions are supposed to produce it).
inline HoleSearchResult find_directed_hole(const AtomicMeasure& mu,
                                           const LimitSetApprox& approx,
                                           const Vec& x, double r,
                                           const DirectionPlane& plane,
                                           const HoleSearchOptions& opt = {}) {
  plane.validate();
  const double h = mu.resolution;
  const double dX = approx.seed_diameter;
  if (!(r > 0) || r > dX)
    throw DomainError("hole search needs 0 < r <= seed diameter");

  HoleSearchResult res;
  res.best.outer_center = x;
  res.best.outer_radius = r;

  const DirectionPlane pl = plane.through(x);
  detail::PlaneSampler ps{&pl, x, r};
  const size_t m = static_cast<size_t>(pl.plane_dim);

  auto certified_radius = [&](const Vec& y) {
    const double slack = r - dist(y, x);
    if (slack <= 0) return -1.0;
    const double nn = mu.nearest_atom_dist(y);
    return std::min(nn - 2.0 * h, slack);
  };

  auto finalize = [&](const Vec& y) {
    HoleCertificate cert;
    cert.outer_center = x;
    cert.outer_radius = r;
    cert.center = y;
    const double nn = mu.nearest_atom_dist(y);
    const double d = dist(y, x);
    double hr = std::min(nn - 2.0 * h, r - d);
    // Containment must hold under floating-point addition as well.
    while (hr > 0 && d + hr > r) hr = std::nextafter(hr, 0.0);
    cert.hole_radius = std::max(hr, 0.0);
    cert.c_value = cert.hole_radius / r;
    cert.clearance_margin = nn - cert.hole_radius;
    return cert;
  };

  // Ball far from the whole seed box: the ball itself is (almost) the hole.
  if (approx.spec.seed_box.dist2_to(x.data()) > r * r) {
    HoleCertificate cert;
    cert.outer_center = x;
    cert.outer_radius = r;
    cert.center = x;
    const double nn = mu.nearest_atom_dist(x);
    cert.hole_radius = std::min(r * (1.0 - 1e-12), nn - 2.0 * h);
    cert.c_value = cert.hole_radius / r;
    cert.clearance_margin = nn - cert.hole_radius;
    res.best = cert;
    res.status = cert.hole_radius >= 4.0 * h ? HoleStatus::hole : HoleStatus::no_hole;
    return res;
  }

  // ---- stage A: sequential avoidance of the stopping cylinders ----
  StoppingFamily fam = stopping_family(approx.spec, approx, x, r);
  // Deterministic processing order: big cylinders first, then lexicographic.
  std::vector<size_t> order(fam.words.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (fam.diameters[a] != fam.diameters[b])
      return fam.diameters[a] > fam.diameters[b];
    return fam.words[a] < fam.words[b];
  });

  Vec z = x;
  double l = r;
  std::vector<double> zt(m, 0.0);  // tangent coordinates of z
  bool stage_a_alive = true;
  for (size_t oi : order) {
    const Box& cyl = fam.boxes[oi];
    // Pick the plane point inside B(z,l) maximizing
    // min(distance to the box, remaining nesting slack).
    double best_score = -1.0;
    std::vector<double> best_t = zt;
    const int g = opt.stage_a_samples;
    std::vector<double> t(m, 0.0);
    std::vector<int> ticks(m, 0);
    for (;;) {
      for (size_t a = 0; a < m; ++a)
        t[a] = zt[a] + l * (2.0 * ticks[a] / (g - 1) - 1.0);
      const Vec cand = ps.at(t);
      const double nest = l - dist(cand, z);
      if (nest > 0) {
        const double away = std::sqrt(cyl.dist2_to(cand.data()));
        const double score = std::min(away, nest);
        if (score > best_score) {
          best_score = score;
          best_t = t;
        }
      }
      size_t a = 0;
      while (a < m && ++ticks[a] == g) ticks[a++] = 0;
      if (a == m) break;
    }
    if (best_score <= 0) {
      stage_a_alive = false;
      break;
    }
    zt = best_t;
    z = ps.at(zt);
    l = best_score;
    res.candidates_tried += static_cast<size_t>(std::pow(g, static_cast<double>(m)));
  }

  // ---- stage B: polish against the atom cloud ----
  double best = -1.0;
  Vec best_y = x;
  auto consider = [&](const Vec& y) {
    ++res.candidates_tried;
    const double s = certified_radius(y);
    if (s > best || (s == best && lex_less(y, best_y))) {
      best = s;
      best_y = y;
    }
  };

  if (stage_a_alive) consider(z);
  {
    const int g = opt.coarse_samples_per_axis;
    std::vector<double> t(m, 0.0);
    std::vector<int> ticks(m, 0);
    for (;;) {
      for (size_t a = 0; a < m; ++a)
        t[a] = r * (2.0 * ticks[a] / (g - 1) - 1.0);
      consider(ps.at(t));
      size_t a = 0;
      while (a < m && ++ticks[a] == g) ticks[a++] = 0;
      if (a == m) break;
    }
  }
  {
    // Refine from the best coarse candidate.
    std::vector<double> t0(m, 0.0);
    // Recover tangent coordinates of best_y.
    for (size_t a = 0; a < m; ++a) t0[a] = dot(best_y - x, pl.tangent[a]);
    double score = best;
    detail::pattern_search(
        ps, [&](const Vec& y) { return certified_radius(y); }, t0, score,
        r / (opt.coarse_samples_per_axis - 1), opt.refine_iters);
    const Vec y = ps.at(t0);
    consider(y);
  }

  res.best = finalize(best_y);
  res.plane_offset = pl.distance(best_y);
  res.status = res.best.hole_radius >= 4.0 * h && res.best.containment_ok()
                   ? HoleStatus::hole
                   : HoleStatus::no_hole;
  if (res.status == HoleStatus::no_hole) res.best.c_value = 0.0;
  return res;
}

// ---- porosity profiles -------------------------------------------------------

struct ProfileRow {
  size_t point_index = 0;
  Vec x;
  double r = 0;
  double c = 0;
  double clearance_margin = 0;
  HoleStatus status = HoleStatus::no_hole;
};

struct PorosityProfile {
  DirectionPlane direction;
  std::vector<ProfileRow> rows;
  std::vector<double> per_point_c;  // min over scales, one entry per sample point
  double c_estimate = 0;            // min over points
  size_t n_points = 0;
  size_t n_scales = 0;
  uint64_t seed = 0;
};

// Runs the hole search at seeded sample atoms and dyadic radii
// d(X)/2, d(X)/4, ..., clamped to stay >= 16h. The per-point constant takes
// the minimum over scales and the estimate the minimum over points: a
// conservative empirical floor for the directed porosity constant.
inline PorosityProfile porosity_profile(
    const AtomicMeasure& mu, const LimitSetApprox& approx,
    const DirectionPlane& direction, size_t n_points, size_t n_scales,
    uint64_t seed, int threads = 0,
    const std::function<bool(const double*)>& point_filter = nullptr,
    const HoleSearchOptions& opt = {}) {
  if (n_points < 1 || n_scales < 1)
    throw UsageError("profile needs n_points, n_scales >= 1");
  PorosityProfile prof;
  prof.direction = direction;
  prof.n_points = n_points;
  prof.n_scales = n_scales;
  prof.seed = seed;

  std::vector<size_t> pool;
  if (point_filter) {
    for (size_t i = 0; i < mu.count(); ++i)
      if (point_filter(mu.point(i))) pool.push_back(i);
  } else {
    pool.resize(mu.count());
    for (size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  }
  if (pool.empty()) throw UsageError("profile point filter matched no atoms");

  Rng rng(seed);
  std::vector<size_t> picks = rng.distinct_indices(n_points, pool.size());
  std::vector<size_t> sample;
  sample.reserve(picks.size());
  for (size_t p : picks) sample.push_back(pool[p]);

  std::vector<double> radii;
  for (size_t j = 1; j <= n_scales; ++j) {
    const double r = approx.seed_diameter * std::pow(0.5, static_cast<double>(j));
    if (r >= 16.0 * mu.resolution) radii.push_back(r);
  }
  if (radii.empty())
    throw RefinementError("all profile radii fall below 16h; increase depth",
                          approx.depth + 1);

  const size_t jobs = sample.size() * radii.size();
  prof.rows.resize(jobs);
  run_blocks(jobs, threads, [&](size_t job) {
    const size_t si = job / radii.size();
    const size_t ri = job % radii.size();
    const Vec x = Vec::from(mu.point(sample[si]), mu.dim);
    const auto res = find_directed_hole(mu, approx, x, radii[ri], direction, opt);
    ProfileRow row;
    row.point_index = sample[si];
    row.x = x;
    row.r = radii[ri];
    row.c = res.status == HoleStatus::hole ? res.best.c_value : 0.0;
    row.clearance_margin = res.best.clearance_margin;
    row.status = res.status;
    prof.rows[job] = row;
  });

  prof.per_point_c.assign(sample.size(), std::numeric_limits<double>::infinity());
  for (size_t job = 0; job < jobs; ++job) {
    const size_t si = job / radii.size();
    prof.per_point_c[si] = std::min(prof.per_point_c[si], prof.rows[job].c);
  }
  prof.c_estimate = prof.per_point_c.empty() ? 0.0 : prof.per_point_c[0];
  for (double c : prof.per_point_c) prof.c_estimate = std::min(prof.c_estimate, c);
  return prof;
}

}  // namespace porolab
