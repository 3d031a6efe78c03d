#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "porolab/geometry.hpp"
#include "porolab/measure.hpp"

namespace porolab {

// Atoms sitting exactly on the surface (within 1e-12). The hypotheses behind
// the strip criterion ask for a null surface; exact hits are reported, not
// fatal, since atoms are samples.
inline size_t atoms_on_surface(const AtomicMeasure& mu,
                               const StripSurface& surface,
                               double tol = 1e-12) {
  size_t hits = 0;
  for (size_t i = 0; i < mu.count(); ++i)
    if (surface_distance(surface, mu.point(i)) <= tol) ++hits;
  return hits;
}

struct StripSeriesRow {
  int k = 0;
  double lo = 0, hi = 0;
  double mass = 0;
  double term = 0;         // k * mu(S_k)
  double partial_sum = 0;
  bool resolution_limited = false;
};

struct EnvelopeRow {
  int k = 0;
  double measured = 0;   // mu(strip of half-width M^{-k}/2 inside A(x,1))
  double envelope = 0;   // C_hat (sqrt n)^{n-1} (1 - M^{1-n})^k
  double slack = 0;      // envelope / measured (inf when measured = 0)
};

struct StripSeriesReport {
  StripFamily family;
  std::vector<StripSeriesRow> rows;
  double series_total = 0;
  size_t surface_hits = 0;
  std::vector<EnvelopeRow> envelope;  // filled when envelope params given
  bool envelope_dominates = true;
};

struct EnvelopeParams {
  Vec x;
  int axis = 0;  // 1-based
  int M = 4;
  int k_max = 6;
  double C_hat = 1.0;
};

// Per-band measures of the geometric strips, the weighted series
// sum_k k mu(S_k), and optionally the comparison of axis-strip masses inside
// the unit cube against the covering-count envelope.
inline StripSeriesReport strip_series(
    const AtomicMeasure& mu, const StripSurface& surface, double a, int k_max,
    const std::optional<EnvelopeParams>& env = std::nullopt) {
  StripSeriesReport rep;
  rep.family = strip_family(mu, surface, a, k_max);
  rep.surface_hits = atoms_on_surface(mu, surface);
  Kahan partial;
  for (int k = 0; k <= k_max; ++k) {
    StripSeriesRow row;
    row.k = k;
    row.lo = rep.family.band_lo(k);
    row.hi = rep.family.band_hi(k);
    row.mass = rep.family.strip_measures[static_cast<size_t>(k)];
    row.term = row.mass * k;
    row.resolution_limited = rep.family.resolution_limited[static_cast<size_t>(k)];
    partial.add(row.term);
    row.partial_sum = partial.value();
    rep.rows.push_back(row);
  }
  rep.series_total = partial.value();

  if (env) {
    const int n = mu.dim;
    const double dim_factor =
        std::pow(std::sqrt(static_cast<double>(n)), n - 1);
    const double decay =
        1.0 - std::pow(static_cast<double>(env->M), 1.0 - n);
    const HalfOpenCube unit{env->x, 1.0};
    for (int k = 0; k <= env->k_max; ++k) {
      EnvelopeRow row;
      row.k = k;
      const double hw =
          0.5 * std::pow(static_cast<double>(env->M), -static_cast<double>(k));
      row.measured = mu.box_filtered_measure(
          unit.to_box(), [&](const double* p) {
            if (!unit.contains(p)) return false;
            return std::fabs(p[env->axis - 1] - env->x.v[env->axis - 1]) < hw;
          });
      row.envelope =
          env->C_hat * dim_factor * std::pow(decay, static_cast<double>(k));
      row.slack = row.measured > 0
                      ? row.envelope / row.measured
                      : std::numeric_limits<double>::infinity();
      if (row.slack < 1.0) rep.envelope_dominates = false;
      rep.envelope.push_back(row);
    }
  }
  return rep;
}

}  // namespace porolab
