#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "porolab/errors.hpp"
#include "porolab/geometry.hpp"
#include "porolab/io.hpp"
#include "porolab/kernels.hpp"
#include "porolab/measure.hpp"
#include "porolab/parallel.hpp"
#include "porolab/simple_function.hpp"
#include "porolab/strips.hpp"

namespace porolab {

inline constexpr size_t kPairBlock = 256;

// Decreasing truncation schedule eps_j = start * ratio^j.
inline std::vector<double> geometric_schedule(double start, double ratio,
                                              int count) {
  if (!(start > 0) || !(ratio > 0) || ratio >= 1.0 || count < 1)
    throw UsageError("schedule needs start > 0, ratio in (0,1), count >= 1");
  std::vector<double> eps(static_cast<size_t>(count));
  double e = start;
  for (int i = 0; i < count; ++i) {
    eps[static_cast<size_t>(i)] = e;
    e *= ratio;
  }
  return eps;
}

// T_eps(f)(x): sum over atoms with |x - p| > eps (strict) of K(x-p) f(p) w_p,
// compensated in atom order.
inline double truncated_apply(const AtomicMeasure& mu, const KernelSpec& K,
                              const SimpleFunction& f, const Vec& x,
                              double eps) {
  if (!(eps > 0)) throw DomainError("truncation eps must be positive");
  const int n = mu.dim;
  const double e2 = eps * eps;
  Kahan acc;
  double z[kMaxDim];
  for (size_t i = 0; i < mu.count(); ++i) {
    const double* p = mu.point(i);
    double d2 = 0;
    for (int d = 0; d < n; ++d) {
      z[d] = x.v[d] - p[d];
      d2 += z[d] * z[d];
    }
    if (d2 <= e2) continue;
    const double fv = f.eval(p, n);
    if (fv == 0) continue;
    acc.add(K(z, n) * fv * mu.weights[i]);
  }
  return acc.value();
}

// sup over the schedule of |T_eps(f)(x)|.
inline double maximal_sample(const AtomicMeasure& mu, const KernelSpec& K,
                             const SimpleFunction& f, const Vec& x,
                             const std::vector<double>& schedule) {
  if (schedule.empty()) throw UsageError("maximal operator needs a schedule");
  for (size_t j = 1; j < schedule.size(); ++j)
    if (!(schedule[j] < schedule[j - 1]))
      throw UsageError("schedule must be strictly decreasing");
  double m = 0;
  for (double eps : schedule)
    m = std::max(m, std::fabs(truncated_apply(mu, K, f, x, eps)));
  return m;
}

namespace detail {

struct SupportData {
  std::vector<uint32_t> f_idx, g_idx;  // atoms where f resp. g is nonzero
  std::vector<double> f_val, g_val;    // aligned with the index lists
  double f_sup = 0, g_sup = 0;
};

inline SupportData supports(const AtomicMeasure& mu, const SimpleFunction& f,
                            const SimpleFunction& g) {
  SupportData s;
  const int n = mu.dim;
  for (size_t i = 0; i < mu.count(); ++i) {
    const double* p = mu.point(i);
    const double fv = f.eval(p, n);
    const double gv = g.eval(p, n);
    if (fv != 0) {
      s.f_idx.push_back(static_cast<uint32_t>(i));
      s.f_val.push_back(fv);
      s.f_sup = std::max(s.f_sup, std::fabs(fv));
    }
    if (gv != 0) {
      s.g_idx.push_back(static_cast<uint32_t>(i));
      s.g_val.push_back(gv);
      s.g_sup = std::max(s.g_sup, std::fabs(gv));
    }
  }
  return s;
}

}  // namespace detail

// Bilinear form integral T_eps(f)(x) g(x) dmu(x): the double sum over pairs
// |x - y| > eps of K(x - y) f(y) g(x) w_x w_y. The outer index runs over
// fixed blocks of the g-support in atom order; per-block compensated sums are
// merged in block order, so the value does not depend on the thread count.
inline double bilinear_form(const AtomicMeasure& mu, const KernelSpec& K,
                            const SimpleFunction& f, const SimpleFunction& g,
                            double eps, int threads = 0) {
  if (!(eps > 0)) throw DomainError("truncation eps must be positive");
  const detail::SupportData s = detail::supports(mu, f, g);
  if (s.f_idx.empty() || s.g_idx.empty()) return 0.0;
  const int n = mu.dim;
  const double e2 = eps * eps;
  const auto blocks = make_blocks(s.g_idx.size(), kPairBlock);
  std::vector<Kahan> partial(blocks.size());
  run_blocks(blocks.size(), threads, [&](size_t b) {
    Kahan acc;
    double z[kMaxDim];
    for (size_t xi = blocks[b].begin; xi < blocks[b].end; ++xi) {
      const uint32_t ix = s.g_idx[xi];
      const double* px = mu.point(ix);
      const double gw = s.g_val[xi] * mu.weights[ix];
      for (size_t yi = 0; yi < s.f_idx.size(); ++yi) {
        const uint32_t iy = s.f_idx[yi];
        const double* py = mu.point(iy);
        double d2 = 0;
        for (int d = 0; d < n; ++d) {
          z[d] = px[d] - py[d];
          d2 += z[d] * z[d];
        }
        if (d2 <= e2) continue;
        acc.add(K(z, n) * s.f_val[yi] * mu.weights[iy] * gw);
      }
    }
    partial[b] = acc;
  });
  Kahan total;
  for (const Kahan& p : partial) total.merge(p);
  return total.value();
}

// ---- traces ------------------------------------------------------------------

enum class TraceFlag { ok, below_floor, tie };

inline const char* trace_flag_name(TraceFlag f) {
  switch (f) {
    case TraceFlag::ok: return "ok";
    case TraceFlag::below_floor: return "below_floor";
    case TraceFlag::tie: return "tie";
  }
  return "?";
}

struct ConvergenceTrace {
  std::vector<double> epsilons;
  std::vector<double> values;
  std::vector<double> increments;  // |v_{j+1} - v_j|, size count-1
  std::vector<TraceFlag> flags;
  double resolution_floor = 0;  // min positive pair distance seen

  std::string csv() const {
    CsvWriter w({"epsilon", "value", "increment", "flag"});
    for (size_t j = 0; j < epsilons.size(); ++j)
      w.row({fmt_double(epsilons[j]), fmt_double(values[j]),
             fmt_double(j + 1 < epsilons.size() ? increments[j] : 0.0),
             trace_flag_name(flags[j])});
    return w.str();
  }
};

// All schedule values of the bilinear form in one pass over the support
// pairs: every pair lands in the bucket of the first eps it exceeds, buckets
// are prefix-summed. Per-block bucket accumulators keep the result
// independent of the thread count.
inline ConvergenceTrace bilinear_trace(const AtomicMeasure& mu,
                                       const KernelSpec& K,
                                       const SimpleFunction& f,
                                       const SimpleFunction& g,
                                       const std::vector<double>& schedule,
                                       int threads = 0) {
  const size_t m = schedule.size();
  if (m == 0) throw UsageError("trace needs a schedule");
  for (size_t j = 1; j < m; ++j)
    if (!(schedule[j] < schedule[j - 1]))
      throw UsageError("schedule must be strictly decreasing");
  ConvergenceTrace tr;
  tr.epsilons = schedule;
  tr.values.assign(m, 0.0);
  tr.flags.assign(m, TraceFlag::ok);

  const detail::SupportData s = detail::supports(mu, f, g);
  const int n = mu.dim;
  std::vector<double> e2(m);
  for (size_t j = 0; j < m; ++j) e2[j] = schedule[j] * schedule[j];

  const auto blocks = make_blocks(s.g_idx.size(), kPairBlock);
  struct BlockAcc {
    std::vector<Kahan> bucket;
    std::vector<uint8_t> tie;
    double min_pos_d2 = std::numeric_limits<double>::infinity();
  };
  std::vector<BlockAcc> partial(blocks.size());
  if (!s.f_idx.empty() && !s.g_idx.empty()) {
    run_blocks(blocks.size(), threads, [&](size_t b) {
      BlockAcc acc;
      acc.bucket.assign(m, Kahan{});
      acc.tie.assign(m, 0);
      double z[kMaxDim];
      for (size_t xi = blocks[b].begin; xi < blocks[b].end; ++xi) {
        const uint32_t ix = s.g_idx[xi];
        const double* px = mu.point(ix);
        const double gw = s.g_val[xi] * mu.weights[ix];
        for (size_t yi = 0; yi < s.f_idx.size(); ++yi) {
          const uint32_t iy = s.f_idx[yi];
          const double* py = mu.point(iy);
          double d2 = 0;
          for (int d = 0; d < n; ++d) {
            z[d] = px[d] - py[d];
            d2 += z[d] * z[d];
          }
          if (d2 > 0 && d2 < acc.min_pos_d2) acc.min_pos_d2 = d2;
          // Bucket: smallest j with d2 > e2[j]; buckets are nested downward.
          size_t j = 0;
          while (j < m && d2 <= e2[j]) {
            if (d2 == e2[j]) acc.tie[j] = 1;
            ++j;
          }
          if (j == m) continue;
          acc.bucket[j].add(K(z, n) * s.f_val[yi] * mu.weights[iy] * gw);
        }
      }
      partial[b] = std::move(acc);
    });
  }

  std::vector<Kahan> bucket(m);
  double min_pos_d2 = std::numeric_limits<double>::infinity();
  for (const BlockAcc& p : partial) {
    if (p.bucket.empty()) continue;
    for (size_t j = 0; j < m; ++j) {
      bucket[j].merge(p.bucket[j]);
      if (p.tie[j]) tr.flags[j] = TraceFlag::tie;
    }
    min_pos_d2 = std::min(min_pos_d2, p.min_pos_d2);
  }
  Kahan running;
  for (size_t j = 0; j < m; ++j) {
    running.merge(bucket[j]);
    tr.values[j] = running.value();
  }
  tr.resolution_floor =
      std::isfinite(min_pos_d2) ? std::sqrt(min_pos_d2) : 0.0;
  for (size_t j = 0; j < m; ++j)
    if (schedule[j] < tr.resolution_floor && tr.flags[j] == TraceFlag::ok)
      tr.flags[j] = TraceFlag::below_floor;
  tr.increments.resize(m > 0 ? m - 1 : 0);
  for (size_t j = 0; j + 1 < m; ++j)
    tr.increments[j] = std::fabs(tr.values[j + 1] - tr.values[j]);
  return tr;
}

// Pointwise trace of T_eps(f)(x) over the schedule, same bucketing.
inline ConvergenceTrace pointwise_trace(const AtomicMeasure& mu,
                                        const KernelSpec& K,
                                        const SimpleFunction& f, const Vec& x,
                                        const std::vector<double>& schedule) {
  const size_t m = schedule.size();
  if (m == 0) throw UsageError("trace needs a schedule");
  ConvergenceTrace tr;
  tr.epsilons = schedule;
  tr.values.assign(m, 0.0);
  tr.flags.assign(m, TraceFlag::ok);
  std::vector<double> e2(m);
  for (size_t j = 0; j < m; ++j) e2[j] = schedule[j] * schedule[j];
  std::vector<Kahan> bucket(m);
  const int n = mu.dim;
  double z[kMaxDim];
  double min_pos_d2 = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < mu.count(); ++i) {
    const double* p = mu.point(i);
    double d2 = 0;
    for (int d = 0; d < n; ++d) {
      z[d] = x.v[d] - p[d];
      d2 += z[d] * z[d];
    }
    if (d2 > 0 && d2 < min_pos_d2) min_pos_d2 = d2;
    size_t j = 0;
    while (j < m && d2 <= e2[j]) {
      if (d2 == e2[j]) tr.flags[j] = TraceFlag::tie;
      ++j;
    }
    if (j == m) continue;
    const double fv = f.eval(p, n);
    if (fv == 0) continue;
    bucket[j].add(K(z, n) * fv * mu.weights[i]);
  }
  Kahan running;
  for (size_t j = 0; j < m; ++j) {
    running.merge(bucket[j]);
    tr.values[j] = running.value();
  }
  tr.resolution_floor = std::isfinite(min_pos_d2) ? std::sqrt(min_pos_d2) : 0.0;
  for (size_t j = 0; j < m; ++j)
    if (schedule[j] < tr.resolution_floor && tr.flags[j] == TraceFlag::ok)
      tr.flags[j] = TraceFlag::below_floor;
  tr.increments.resize(m - 1);
  for (size_t j = 0; j + 1 < m; ++j)
    tr.increments[j] = std::fabs(tr.values[j + 1] - tr.values[j]);
  return tr;
}

// ---- weak convergence across depths -------------------------------------------

// Discretization tolerance for comparing bilinear traces computed at
// resolution h against a finer run. Two effects: pairs crossing the eps shell
// when atoms move by up to h, and the kernel gradient along the move.
// Documented engineering model:
//   tol(eps) = C_K |f| |g| growth_C mass h (4 / (eps - 2h) + 8 / eps).
inline double cross_depth_tolerance(double eps, double h, double C_K,
                                    double f_sup, double g_sup, double mass,
                                    double growth_C) {
  if (eps <= 2 * h) return std::numeric_limits<double>::infinity();
  return C_K * f_sup * g_sup * growth_C * mass * h *
         (4.0 / (eps - 2 * h) + 8.0 / eps);
}

struct DepthTrace {
  std::string label;
  double resolution = 0;
  ConvergenceTrace trace;
};

struct WeakConvergenceReport {
  std::vector<DepthTrace> depths;          // coarse to fine
  std::vector<double> schedule;
  std::vector<uint8_t> valid;              // eps within [10 h_coarse, 0.1 d(X)]
  std::vector<double> tolerance;           // per eps, coarsest pair
  double max_disagreement = 0;             // max |B_a - B_b| over valid eps
  bool agreement_ok = true;
  bool increments_monotone = true;         // after at most two initial steps
  bool cauchy_consistent = false;
  double valid_lo = 0, valid_hi = 0;
};

// Verdict helper: nonincreasing increments allowing at most `grace` initial
// steps and exact ties.
inline bool increments_eventually_monotone(const std::vector<double>& inc,
                                           const std::vector<uint8_t>& use,
                                           int grace = 2) {
  std::vector<double> seq;
  for (size_t j = 0; j < inc.size(); ++j)
    if (use[j] && use[j + 1]) seq.push_back(inc[j]);
  if (seq.size() <= 1) return true;
  size_t start = std::min<size_t>(static_cast<size_t>(grace), seq.size() - 1);
  for (size_t j = start; j + 1 < seq.size(); ++j)
    if (seq[j + 1] > seq[j] * (1.0 + 1e-12) + 1e-15) return false;
  return true;
}

inline WeakConvergenceReport weak_convergence_trace(
    const std::vector<const AtomicMeasure*>& measures, const KernelSpec& K,
    const SimpleFunction& f, const SimpleFunction& g,
    const std::vector<double>& schedule, double growth_C, int threads = 0) {
  if (measures.size() < 2)
    throw UsageError("weak convergence check needs at least two depths");
  WeakConvergenceReport rep;
  rep.schedule = schedule;
  for (const AtomicMeasure* mu : measures) {
    DepthTrace dt;
    dt.resolution = mu->resolution;
    dt.label = "h=" + fmt_double(mu->resolution);
    dt.trace = bilinear_trace(*mu, K, f, g, schedule, threads);
    rep.depths.push_back(std::move(dt));
  }
  std::sort(rep.depths.begin(), rep.depths.end(),
            [](const DepthTrace& a, const DepthTrace& b) {
              return a.resolution > b.resolution;
            });

  double h_coarse = 0, dX = 0, mass = 0;
  const AtomicMeasure* coarsest = measures.front();
  for (const AtomicMeasure* mu : measures) {
    if (mu->resolution > h_coarse) coarsest = mu;
    h_coarse = std::max(h_coarse, mu->resolution);
    dX = std::max(dX, mu->domain_diameter);
    mass = std::max(mass, mu->total_mass);
  }
  rep.valid_lo = 10.0 * h_coarse;
  rep.valid_hi = 0.1 * dX;
  const double f_sup = f.sup_norm_on(*coarsest);
  const double g_sup = g.sup_norm_on(*coarsest);
  rep.valid.assign(schedule.size(), 0);
  rep.tolerance.assign(schedule.size(), 0);
  for (size_t j = 0; j < schedule.size(); ++j) {
    rep.valid[j] = schedule[j] >= rep.valid_lo && schedule[j] <= rep.valid_hi;
    rep.tolerance[j] = cross_depth_tolerance(schedule[j], h_coarse, K.C_K,
                                             f_sup, g_sup, mass, growth_C);
  }

  for (size_t a = 0; a + 1 < rep.depths.size(); ++a) {
    const auto& ta = rep.depths[a].trace;
    const auto& tb = rep.depths[a + 1].trace;
    for (size_t j = 0; j < schedule.size(); ++j) {
      if (!rep.valid[j]) continue;
      const double diff = std::fabs(ta.values[j] - tb.values[j]);
      rep.max_disagreement = std::max(rep.max_disagreement, diff);
      if (diff > rep.tolerance[j]) rep.agreement_ok = false;
    }
  }
  for (const auto& dt : rep.depths)
    if (!increments_eventually_monotone(dt.trace.increments, rep.valid))
      rep.increments_monotone = false;
  rep.cauchy_consistent = rep.agreement_ok && rep.increments_monotone;
  return rep;
}

// Oscillation measure for the pointwise diagnostic: the late increments of a
// genuinely oscillating trace stay comparable to the largest one.
struct OscillationReport {
  double max_increment = 0;
  double late_max_increment = 0;  // best of the last three valid steps
  bool non_decaying = false;
};

inline OscillationReport oscillation_report(const ConvergenceTrace& tr,
                                            double abs_floor = 0.05,
                                            double rel_floor = 0.25) {
  OscillationReport rep;
  std::vector<double> inc;
  for (size_t j = 0; j + 1 < tr.epsilons.size(); ++j)
    if (tr.flags[j] != TraceFlag::below_floor &&
        tr.flags[j + 1] != TraceFlag::below_floor)
      inc.push_back(tr.increments[j]);
  if (inc.empty()) return rep;
  for (double v : inc) rep.max_increment = std::max(rep.max_increment, v);
  const size_t late = inc.size() >= 3 ? inc.size() - 3 : 0;
  for (size_t j = late; j < inc.size(); ++j)
    rep.late_max_increment = std::max(rep.late_max_increment, inc[j]);
  rep.non_decaying = rep.late_max_increment >= abs_floor &&
                     rep.late_max_increment >= rel_floor * rep.max_increment;
  return rep;
}

// ---- cross integral and its bound chain ---------------------------------------

// Face hyperplanes of a cube and the dyadic shell counts 2^{N_i} d_i = 1.
struct ShellDecomposition {
  HalfOpenCube cube;
  std::vector<DirectionPlane> faces;  // 2n planes, lower then upper per axis

  explicit ShellDecomposition(const HalfOpenCube& c) : cube(c) {
    const int n = c.center.n;
    const Box b = c.to_box();
    for (int axis = 1; axis <= n; ++axis) {
      Vec lo_base = c.center;
      lo_base.v[axis - 1] = b.lo.v[axis - 1];
      faces.push_back(DirectionPlane::coordinate(n, axis, lo_base));
      Vec hi_base = c.center;
      hi_base.v[axis - 1] = b.hi.v[axis - 1];
      faces.push_back(DirectionPlane::coordinate(n, axis, hi_base));
    }
  }

  double face_distance(size_t face, const double* p) const {
    return faces[face].distance(p);
  }

  // Smallest integer strictly greater than N with 2^N d = 1.
  static int shell_count(double d) {
    const double N = std::log2(1.0 / d);
    return static_cast<int>(std::floor(N)) + 1;
  }
};

struct CrossIntegralFace {
  double log_integral = 0;  // integral over the open cube of ln(1 / d_i)
  double strip_bound = 0;   // (se)-style bound with a = 1/M
  double strip_series = 0;  // sum_k k mu(S_k(a, G_i))
  bool ok = true;           // log_integral <= strip_bound + tol
};

struct CrossIntegralReport {
  double value = 0;        // double sum of |K| over interior x outside pairs
  double shell_bound = 0;  // dyadic-shell estimate with the measured growth constant
  double strip_expression = 0;  // shell bound with log integrals replaced by strip bounds
  std::vector<CrossIntegralFace> faces;
  size_t interior_atoms = 0;
  size_t outside_atoms = 0;
  size_t excluded_face_atoms = 0;  // d_i = 0 for some face
  double decay_a = 0;
  double C_hat = 0;
  bool value_le_shell = true;
  bool shell_le_strip = true;
};

inline CrossIntegralReport cross_integral(const AtomicMeasure& mu,
                                          const KernelSpec& K,
                                          const HalfOpenCube& cube, int M,
                                          double C_hat, int threads = 0) {
  if (M < 2) throw UsageError("cross integral needs M >= 2");
  const int n = mu.dim;
  const Box open_box = cube.to_box();
  CrossIntegralReport rep;
  rep.decay_a = 1.0 / M;
  rep.C_hat = C_hat;

  std::vector<uint32_t> interior, outside;
  for (size_t i = 0; i < mu.count(); ++i) {
    const double* p = mu.point(i);
    if (cube.contains(p)) {
      if (open_box.contains_open(p))
        interior.push_back(static_cast<uint32_t>(i));
      else
        ++rep.excluded_face_atoms;  // on a face: null by hypothesis
    } else {
      outside.push_back(static_cast<uint32_t>(i));
    }
  }
  rep.interior_atoms = interior.size();
  rep.outside_atoms = outside.size();
  if (interior.empty())
    return rep;  // nothing inside: value 0, bounds vacuous

  const auto blocks = make_blocks(interior.size(), kPairBlock);
  std::vector<Kahan> partial(blocks.size());
  run_blocks(blocks.size(), threads, [&](size_t b) {
    Kahan acc;
    double z[kMaxDim];
    for (size_t xi = blocks[b].begin; xi < blocks[b].end; ++xi) {
      const double* px = mu.point(interior[xi]);
      const double wx = mu.weights[interior[xi]];
      for (uint32_t iy : outside) {
        const double* py = mu.point(iy);
        for (int d = 0; d < n; ++d) z[d] = px[d] - py[d];
        acc.add(std::fabs(K(z, n)) * wx * mu.weights[iy]);
      }
    }
    partial[b] = acc;
  });
  Kahan value;
  for (const Kahan& p : partial) value.merge(p);
  rep.value = value.value();

  // Shell bound: (C_K C 2^{n-1} / ln 2)(sum_i log-integrals + 2n).
  const ShellDecomposition shells(cube);
  const double a = rep.decay_a;
  const double geo = 1.0 / (1.0 - a);
  Kahan log_sum;
  Kahan strip_sum;
  double min_face_dist = std::numeric_limits<double>::infinity();
  for (uint32_t ix : interior)
    for (const auto& face : shells.faces)
      min_face_dist = std::min(min_face_dist, face.distance(mu.point(ix)));
  for (const auto& face : shells.faces) {
    CrossIntegralFace fr;
    Kahan li;
    for (uint32_t ix : interior) {
      const double d = face.distance(mu.point(ix));
      li.add(std::log(1.0 / d) * mu.weights[ix]);
    }
    fr.log_integral = li.value();
    // Strip series for this face plane, extended until the bands reach below
    // every interior atom.
    int k_needed = 0;
    while (k_needed < 200 &&
           std::pow(a, k_needed + 1) * geo > min_face_dist)
      ++k_needed;
    Kahan series;
    for (int k = 0; k <= k_needed; ++k) {
      const double lo = std::pow(a, k + 1) * geo;
      const double hi = std::pow(a, k) * geo;
      series.add(k * mu.plane_band_measure(face, lo, hi));
    }
    fr.strip_series = series.value();
    fr.strip_bound = std::log(1.0 / a) * fr.strip_series +
                     std::log((1.0 - a) / (a * geo));
    fr.ok = fr.log_integral <= fr.strip_bound + 1e-9;
    log_sum.add(fr.log_integral);
    strip_sum.add(fr.strip_bound);
    rep.faces.push_back(fr);
  }
  const double front = K.C_K * C_hat * std::pow(2.0, n - 1) / std::log(2.0);
  rep.shell_bound = front * (log_sum.value() + 2.0 * n);
  rep.strip_expression = front * (strip_sum.value() + 2.0 * n);
  rep.value_le_shell = rep.value <= rep.shell_bound + 1e-9;
  rep.shell_le_strip = rep.shell_bound <= rep.strip_expression + 1e-9;
  return rep;
}

// Averaged diagnostic at fixed r: the normalized double sum over x in the
// closed ball, y outside it.
inline double averaged_operator(const AtomicMeasure& mu, const KernelSpec& K,
                                const SimpleFunction& f, const Vec& z,
                                double r) {
  const int n = mu.dim;
  const double r2 = r * r;
  std::vector<uint32_t> in_ball, out_ball;
  for (size_t i = 0; i < mu.count(); ++i) {
    if (dist2(mu.point(i), z.data(), n) <= r2)
      in_ball.push_back(static_cast<uint32_t>(i));
    else
      out_ball.push_back(static_cast<uint32_t>(i));
  }
  Kahan mass;
  for (uint32_t i : in_ball) mass.add(mu.weights[i]);
  if (!(mass.value() > 0))
    throw DomainError("averaged operator: ball carries no mass");
  Kahan acc;
  double zv[kMaxDim];
  for (uint32_t ix : in_ball) {
    const double* px = mu.point(ix);
    for (uint32_t iy : out_ball) {
      const double* py = mu.point(iy);
      double fv = f.eval(py, n);
      if (fv == 0) continue;
      for (int d = 0; d < n; ++d) zv[d] = px[d] - py[d];
      acc.add(K(zv, n) * fv * mu.weights[iy] * mu.weights[ix]);
    }
  }
  return acc.value() / mass.value();
}

}  // namespace porolab
