#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "porolab/approx.hpp"
#include "porolab/errors.hpp"
#include "porolab/geometry.hpp"
#include "porolab/io.hpp"
#include "porolab/kdtree.hpp"
#include "porolab/parallel.hpp"
#include "porolab/rng.hpp"
#include "porolab/surfaces.hpp"

namespace porolab {

// Relative slack for band pruning: cells near a band boundary are descended
// into and decided point by point, so sums match brute force exactly.
inline constexpr double kBandPruneSlack = 1e-9;

struct GrowthReport {
  double exponent = 0;
  double C_hat = 0;
  Vec worst_x;
  double worst_r = 0;
  size_t sample_count = 0;
  uint64_t seed = 0;
};

class AtomicMeasure {
 public:
  int dim = 0;
  std::vector<double> points;   // count * dim
  std::vector<double> weights;  // count
  double total_mass = 0;
  double resolution = 0;        // h of the generating approximation
  double domain_diameter = 0;   // d(X) of the seed box

  static AtomicMeasure natural_measure(const LimitSetApprox& approx) {
    return from_points(approx.dim(), approx.atoms, approx.weights,
                       approx.resolution, approx.seed_diameter);
  }

  static AtomicMeasure from_points(int dim, std::vector<double> points,
                                   std::vector<double> weights,
                                   double resolution, double domain_diameter) {
    AtomicMeasure mu;
    mu.dim = dim;
    mu.points = std::move(points);
    mu.weights = std::move(weights);
    mu.resolution = resolution;
    mu.domain_diameter = domain_diameter;
    Kahan total;
    for (double w : mu.weights) {
      if (!(w > 0)) throw InternalError("atomic measure needs positive weights");
      total.add(w);
    }
    mu.total_mass = total.value();
    mu.index_.build(mu.points, mu.dim);
    return mu;
  }

  size_t count() const { return weights.size(); }
  const double* point(size_t i) const {
    return points.data() + i * static_cast<size_t>(dim);
  }
  const KdTree& index() const { return index_; }

  double sum_indices(const std::vector<uint32_t>& sorted) const {
    Kahan acc;
    for (uint32_t i : sorted) acc.add(weights[i]);
    return acc.value();
  }

  // mu(B(x,r)), closed ball.
  double ball_measure(const Vec& x, double r) const {
    if (!(r > 0)) throw DomainError("ball_measure needs r > 0");
    const double r2 = r * r;
    std::vector<uint32_t> idx;
    index_.query(
        [&](const Box& cell) {
          return cell.dist2_to(x.data()) <= r2 * (1.0 + kBandPruneSlack);
        },
        [&](const double* p) { return dist2(p, x.data(), dim) <= r2; }, idx);
    return sum_indices(idx);
  }

  // mu(A), half-open cube.
  double cube_measure(const HalfOpenCube& cube) const {
    if (!(cube.side > 0)) throw DomainError("cube_measure needs side > 0");
    const Box qb = cube.to_box();
    std::vector<uint32_t> idx;
    index_.query_box(qb, [&](const double* p) { return cube.contains(p); }, idx);
    return sum_indices(idx);
  }

  // Weight of atoms in a closed/half-open/open box with optional extra
  // predicate; used by the covering and strip machinery.
  template <class Pred>
  double box_filtered_measure(const Box& qb, const Pred& pred) const {
    std::vector<uint32_t> idx;
    index_.query_box(qb, pred, idx);
    return sum_indices(idx);
  }

  // Half-open distance band lo <= d(p, plane) < hi.
  double plane_band_measure(const DirectionPlane& pl, double lo,
                            double hi) const {
    const double lo2 = lo * lo, hi2 = hi * hi;
    std::vector<uint32_t> idx;
    index_.query(
        [&](const Box& cell) {
          double cmin, cmax;
          pl.cell_bounds2(cell, cmin, cmax);
          if (cmin > hi2 * (1.0 + kBandPruneSlack)) return false;
          if (cmax < lo2 * (1.0 - kBandPruneSlack)) return false;
          return true;
        },
        [&](const double* p) {
          const double d2 = pl.distance2(p);
          return d2 >= lo2 && d2 < hi2;
        },
        idx);
    return sum_indices(idx);
  }

  // Half-open band for spheres, restricted to the closed ball B(center, R).
  double sphere_band_measure(const SphereShell& sh, double lo, double hi) const {
    std::vector<uint32_t> idx;
    const double R = sh.radius;
    index_.query(
        [&](const Box& cell) {
          const double rmin = std::sqrt(cell.dist2_to(sh.center.data()));
          const double rmax = std::sqrt(cell.max_dist2_to(sh.center.data()));
          if (rmin > R * (1.0 + kBandPruneSlack)) return false;  // outside ball
          // On the closed ball, d = R - |p-c|; the band needs
          // |p-c| in (R-hi, R-lo].
          if (R - rmax > hi * (1.0 + kBandPruneSlack) + kBandPruneSlack) return false;
          if (R - rmin < lo * (1.0 - kBandPruneSlack) - kBandPruneSlack) return false;
          return true;
        },
        [&](const double* p) {
          const double rho = std::sqrt(dist2(p, sh.center.data(), dim));
          if (rho > R) return false;
          const double d = R - rho;
          return d >= lo && d < hi;
        },
        idx);
    return sum_indices(idx);
  }

  double nearest_atom_dist(const double* p) const {
    const auto nn = index_.nearest_l2(p);
    return std::sqrt(nn.dist2);
  }
  double nearest_atom_dist(const Vec& p) const { return nearest_atom_dist(p.data()); }

  std::string atoms_csv() const {
    std::vector<std::string> header;
    for (int i = 1; i <= dim; ++i) header.push_back("x" + std::to_string(i));
    header.push_back("weight");
    CsvWriter csv(header);
    for (size_t i = 0; i < count(); ++i) {
      std::vector<std::string> cells;
      const double* p = point(i);
      for (int d = 0; d < dim; ++d) cells.push_back(fmt_double(p[d]));
      cells.push_back(fmt_double(weights[i]));
      csv.row(cells);
    }
    return csv.str();
  }

 private:
  KdTree index_;
};

// ---- strip families ---------------------------------------------------------

using StripSurface = std::variant<DirectionPlane, SphereShell>;

inline double surface_distance(const StripSurface& s, const double* p) {
  if (std::holds_alternative<DirectionPlane>(s))
    return std::get<DirectionPlane>(s).distance(p);
  return std::get<SphereShell>(s).distance(p);
}

struct StripFamily {
  StripSurface surface;
  double decay_a = 0;
  int k_max = 0;
  std::vector<double> strip_measures;        // mu(S_k), k = 0..k_max
  std::vector<uint8_t> resolution_limited;   // band width < h

  // S_k collects points with a^{k+1}/(1-a) <= d < a^k/(1-a).
  double band_lo(int k) const {
    return std::pow(decay_a, k + 1) / (1.0 - decay_a);
  }
  double band_hi(int k) const { return std::pow(decay_a, k) / (1.0 - decay_a); }
};

inline StripFamily strip_family(const AtomicMeasure& mu,
                                const StripSurface& surface, double a,
                                int k_max) {
  if (!(a > 0 && a < 1)) throw UsageError("strip decay must lie in (0,1)");
  if (std::holds_alternative<SphereShell>(surface)) {
    const auto& sh = std::get<SphereShell>(surface);
    sh.validate();
    if (!(a < sh.radius))
      throw UsageError("sphere strips need decay a < radius");
  } else {
    std::get<DirectionPlane>(surface).validate();
  }
  if (k_max < 0) throw UsageError("k_max must be >= 0");

  StripFamily fam;
  fam.surface = surface;
  fam.decay_a = a;
  fam.k_max = k_max;
  fam.strip_measures.resize(static_cast<size_t>(k_max) + 1);
  fam.resolution_limited.resize(static_cast<size_t>(k_max) + 1, 0);
  Kahan total;
  for (int k = 0; k <= k_max; ++k) {
    const double lo = fam.band_lo(k), hi = fam.band_hi(k);
    double m;
    if (std::holds_alternative<DirectionPlane>(surface))
      m = mu.plane_band_measure(std::get<DirectionPlane>(surface), lo, hi);
    else
      m = mu.sphere_band_measure(std::get<SphereShell>(surface), lo, hi);
    fam.strip_measures[static_cast<size_t>(k)] = m;
    fam.resolution_limited[static_cast<size_t>(k)] = hi - lo < mu.resolution;
    total.add(m);
  }
  if (total.value() > mu.total_mass * (1.0 + 1e-12) + 1e-12)
    throw InternalError("strip bands exceed total mass; bands must be disjoint");
  return fam;
}

// ---- growth constant --------------------------------------------------------

// C_hat = max over sampled atoms and dyadic radii in [4h, d(X)] of
// mu(B(x,r)) / r^exponent. Sampling is seeded; the reduction scans per-sample
// results in sample order, so the report does not depend on the thread count.
inline GrowthReport growth_constant(const AtomicMeasure& mu, double exponent,
                                    size_t sample_count, uint64_t seed,
                                    int threads = 0) {
  if (!(exponent > 0)) throw UsageError("growth exponent must be positive");
  GrowthReport rep;
  rep.exponent = exponent;
  rep.seed = seed;
  rep.sample_count = sample_count;
  if (mu.count() == 0 || sample_count == 0) return rep;

  Rng rng(seed);
  std::vector<size_t> samples(sample_count);
  for (size_t i = 0; i < sample_count; ++i) samples[i] = rng.index(mu.count());

  std::vector<double> radii;
  for (double r = mu.domain_diameter; r >= 4.0 * mu.resolution && r > 0; r /= 2)
    radii.push_back(r);
  if (radii.empty()) radii.push_back(mu.domain_diameter);

  struct Best {
    double ratio = -1;
    double r = 0;
  };
  std::vector<Best> best(sample_count);
  run_blocks(sample_count, threads, [&](size_t s) {
    const Vec x = Vec::from(mu.point(samples[s]), mu.dim);
    for (double r : radii) {
      const double ratio = mu.ball_measure(x, r) / std::pow(r, exponent);
      if (ratio > best[s].ratio) {
        best[s].ratio = ratio;
        best[s].r = r;
      }
    }
  });
  size_t arg = 0;
  for (size_t s = 1; s < sample_count; ++s)
    if (best[s].ratio > best[arg].ratio) arg = s;
  rep.C_hat = best[arg].ratio;
  rep.worst_x = Vec::from(mu.point(samples[arg]), mu.dim);
  rep.worst_r = best[arg].r;
  return rep;
}

inline nlohmann::json measure_report_json(const AtomicMeasure& mu,
                                          const GrowthReport& growth) {
  nlohmann::json j;
  j["total_mass"] = mu.total_mass;
  j["resolution"] = mu.resolution;
  j["growth"]["exponent"] = growth.exponent;
  j["growth"]["C_hat"] = growth.C_hat;
  return j;
}

}  // namespace porolab
