#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "porolab/approx.hpp"
#include "porolab/covering.hpp"
#include "porolab/errors.hpp"
#include "porolab/io.hpp"
#include "porolab/kernels.hpp"
#include "porolab/measure.hpp"
#include "porolab/porosity.hpp"
#include "porolab/simple_function.hpp"
#include "porolab/singular.hpp"
#include "porolab/strips.hpp"
#include "porolab/system.hpp"

namespace porolab {

using nlohmann::json;

// Exit codes shared by run() and the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitCapacity = 3;
inline constexpr int kExitInternal = 4;

struct ExperimentConfig {
  std::string experiment;
  json system;      // builtin name (string) or inline spec (object)
  std::vector<int> depths;
  uint64_t seed = 1;
  int threads = 0;
  std::string out_dir;
  size_t atom_budget = kDefaultAtomBudget;
  json params;  // experiment-specific

  static ExperimentConfig from_json(const json& j) {
    ExperimentConfig c;
    if (!j.is_object()) throw UsageError("config: top level must be an object");
    if (!j.contains("experiment") || !j["experiment"].is_string())
      throw UsageError("config: missing string field 'experiment'");
    c.experiment = j["experiment"].get<std::string>();
    if (!j.contains("system"))
      throw UsageError("config: missing field 'system'");
    c.system = j["system"];
    if (j.contains("depth"))
      c.depths = {j["depth"].get<int>()};
    else if (j.contains("depths"))
      c.depths = j["depths"].get<std::vector<int>>();
    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
    if (j.contains("atom_budget"))
      c.atom_budget = j["atom_budget"].get<size_t>();
    if (j.contains("params")) c.params = j["params"];
    if (c.params.is_null()) c.params = json::object();
    return c;
  }

  json to_json() const {
    json j;
    j["experiment"] = experiment;
    j["system"] = system;
    if (depths.size() == 1)
      j["depth"] = depths[0];
    else if (!depths.empty())
      j["depths"] = depths;
    j["seed"] = seed;
    j["threads"] = threads;
    j["out"] = out_dir;
    j["atom_budget"] = atom_budget;
    j["params"] = params;
    return j;
  }
};

struct ExperimentResult {
  int exit_code = kExitOk;
  std::vector<std::string> artifacts;  // file names inside out_dir
  json verdict;
  // Full artifact payloads by file name, for callers that want bytes without
  // touching the file system (determinism checks).
  std::map<std::string, std::string> payloads;
};

namespace detail {

inline SystemSpec load_system(const json& sys) {
  if (sys.is_string()) return builtin_system(sys.get<std::string>());
  if (sys.is_object()) return system_from_json(sys);
  throw UsageError("config: 'system' must be a builtin name or an object");
}

inline KernelSpec load_kernel(const json& params, int dim) {
  const std::string name =
      params.value("kernel", std::string("riesz"));
  const int m = params.value("kernel_m", dim - 1);
  if (name == "riesz") {
    const int coord = params.value("kernel_coord", 1);
    return riesz_kernel(coord, m, dim);
  }
  if (name == "riesz_sign") return riesz_sign_kernel(m, dim);
  throw UsageError("params.kernel: unknown kernel '" + name + "'");
}

inline Vec vec_from_json(const json& arr, int dim, const std::string& path) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != dim)
    throw UsageError("config: " + path + " must be an array of length " +
                     std::to_string(dim));
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v.v[i] = arr[static_cast<size_t>(i)].get<double>();
  return v;
}

inline SimpleFunction function_from_json(const json& jf, int dim, double pad) {
  SimpleFunction f;
  if (!jf.contains("terms") || !jf["terms"].is_array())
    throw UsageError("config: simple function needs a 'terms' array");
  for (const auto& t : jf["terms"]) {
    const double coef = t.value("coef", 1.0);
    if (t.contains("cube")) {
      HalfOpenCube c;
      c.center = vec_from_json(t["cube"].at("center"), dim, "terms[].cube.center");
      c.side = t["cube"].at("side").get<double>();
      if (t.value("pad_2h", false) || jf.value("pad_2h", false)) c.side += pad;
      f.add_cube(c, coef);
    } else if (t.contains("ball")) {
      Vec c = vec_from_json(t["ball"].at("center"), dim, "terms[].ball.center");
      f.add_ball(c, t["ball"].at("radius").get<double>(), coef);
    } else if (t.value("all", false)) {
      f.terms.push_back({coef, SimpleFunction::Region::everything, {}, {}, 0});
    } else {
      throw UsageError("config: function term needs 'cube', 'ball' or 'all'");
    }
  }
  return f;
}

inline DirectionPlane direction_from_string(const std::string& s, int dim) {
  if (s.rfind("theta:", 0) == 0) {
    if (dim != 2) throw UsageError("theta directions need dimension 2");
    return DirectionPlane::line2(std::stod(s.substr(6)), Vec::zero(2));
  }
  if (s.rfind("axis", 0) == 0) {
    const int axis = std::stoi(s.substr(4));
    if (axis < 1 || axis > dim) throw UsageError("direction axis out of range");
    if (dim == 2)
      return DirectionPlane::line2(axis == 1 ? 0.0 : std::acos(-1.0) / 2,
                                   Vec::zero(2));
    // In higher dimension, axis i names the coordinate hyperplane normal to e_i.
    Vec e = Vec::zero(dim);
    e.v[axis - 1] = 1.0;
    DirectionPlane pl = DirectionPlane::hyperplane(e, Vec::zero(dim));
    pl.id = "axis" + std::to_string(axis);
    return pl;
  }
  throw UsageError("unknown direction spec '" + s +
                   "' (use axis<i> or theta:<radians>)");
}

inline double direction_theta(const DirectionPlane& pl) {
  if (pl.ambient_dim() == 2 && pl.plane_dim == 1)
    return std::atan2(pl.tangent[0].v[1], pl.tangent[0].v[0]);
  return std::nan("");
}

}  // namespace detail

// ---- individual experiments ---------------------------------------------------

namespace detail {

inline void emit(ExperimentResult& res, const std::string& name,
                 const std::string& bytes) {
  res.artifacts.push_back(name);
  res.payloads[name] = bytes;
}

inline int require_single_depth(const ExperimentConfig& c) {
  if (c.depths.size() != 1)
    throw UsageError("experiment '" + c.experiment + "' needs a single depth");
  return c.depths[0];
}

inline ExperimentResult run_generate(const ExperimentConfig& cfg,
                                     const SystemSpec& spec) {
  ExperimentResult res;
  const int depth = require_single_depth(cfg);
  const LimitSetApprox ap = generate(spec, depth, cfg.atom_budget);
  const AtomicMeasure mu = AtomicMeasure::natural_measure(ap);
  const GrowthReport gr =
      growth_constant(mu, spec.dim - 1,
                      std::min<size_t>(mu.count(), 256), cfg.seed, cfg.threads);
  emit(res, "atoms.csv", mu.atoms_csv());
  json j = measure_report_json(mu, gr);
  j["depth"] = depth;
  j["dimension_t"] = ap.dimension_t;
  j["cylinders"] = ap.count();
  res.verdict = j;
  emit(res, "measure.json", j.dump(1) + "\n");
  return res;
}

inline ExperimentResult run_osc(const ExperimentConfig& cfg,
                                const SystemSpec& spec) {
  ExperimentResult res;
  const OscReport osc = check_osc(spec);
  json j;
  j["satisfied"] = osc.satisfied;
  if (osc.witness)
    j["witness"] = {osc.witness->first, osc.witness->second};
  else
    j["witness"] = nullptr;
  j["dimension_t"] = similarity_dimension(spec);
  if (!cfg.depths.empty()) {
    const LimitSetApprox ap = generate(spec, cfg.depths[0], cfg.atom_budget);
    const BdpReport bdp = bdp_cifs1_constants(spec, ap);
    j["K_bdp"] = bdp.K_bdp;
    j["D"] = bdp.D;
  }
  res.verdict = j;
  emit(res, "osc.json", j.dump(1) + "\n");
  return res;
}

inline ExperimentResult run_porosity(const ExperimentConfig& cfg,
                                     const SystemSpec& spec) {
  ExperimentResult res;
  const int depth = require_single_depth(cfg);
  const LimitSetApprox ap = generate(spec, depth, cfg.atom_budget);
  const AtomicMeasure mu = AtomicMeasure::natural_measure(ap);

  std::vector<DirectionPlane> dirs;
  if (cfg.params.contains("direction"))
    dirs.push_back(detail::direction_from_string(
        cfg.params["direction"].get<std::string>(), spec.dim));
  if (cfg.params.contains("directions")) {
    const int fan = cfg.params["directions"].get<int>();
    if (spec.dim != 2) throw UsageError("direction fans need dimension 2");
    for (int j = 0; j < fan; ++j) {
      DirectionPlane pl =
          DirectionPlane::line2(j * std::acos(-1.0) / fan, Vec::zero(2));
      pl.id = "fan" + std::to_string(j);
      dirs.push_back(pl);
    }
  }
  if (dirs.empty())
    throw UsageError("porosity needs params.direction or params.directions");

  const size_t points = cfg.params.value("points", 64);
  const size_t scales = cfg.params.value("scales", 5);
  std::function<bool(const double*)> filter;
  if (cfg.params.contains("on_surface_axis")) {
    const int axis = cfg.params["on_surface_axis"].get<int>();
    const double value = cfg.params.value("on_surface_value", 0.0);
    if (axis < 1 || axis > spec.dim)
      throw UsageError("params.on_surface_axis out of range");
    filter = [axis, value](const double* p) {
      return std::fabs(p[axis - 1] - value) <= 1e-12;
    };
  }

  CsvWriter csv({"direction_id", "theta", "x", "r", "c", "clearance_margin",
                 "status"});
  json verdict;
  verdict["directions"] = json::array();
  double c_min = std::numeric_limits<double>::infinity();
  size_t no_hole_points_total = 0, points_total = 0;
  for (const auto& dir : dirs) {
    const PorosityProfile prof = porosity_profile(
        mu, ap, dir, points, scales, cfg.seed, cfg.threads, filter);
    for (const auto& row : prof.rows) {
      std::string xs;
      for (int d = 0; d < spec.dim; ++d) {
        if (d) xs += ';';
        xs += fmt_double(row.x.v[d]);
      }
      csv.row({dir.id, fmt_double(detail::direction_theta(dir)), xs,
               fmt_double(row.r), fmt_double(row.c),
               fmt_double(row.clearance_margin),
               row.status == HoleStatus::hole ? "hole" : "no-hole"});
    }
    size_t no_hole_points = 0;
    for (double c : prof.per_point_c)
      if (c == 0.0) ++no_hole_points;
    no_hole_points_total += no_hole_points;
    points_total += prof.per_point_c.size();
    json dj;
    dj["id"] = dir.id;
    dj["theta"] = detail::direction_theta(dir);
    dj["c_estimate"] = prof.c_estimate;
    dj["no_hole_point_fraction"] =
        static_cast<double>(no_hole_points) /
        static_cast<double>(prof.per_point_c.size());
    verdict["directions"].push_back(dj);
    c_min = std::min(c_min, prof.c_estimate);
  }
  verdict["c_min"] = c_min;
  verdict["no_hole_point_fraction"] =
      points_total ? static_cast<double>(no_hole_points_total) /
                         static_cast<double>(points_total)
                   : 0.0;
  verdict["points"] = points;
  verdict["scales"] = scales;
  verdict["seed"] = cfg.seed;
  res.verdict = verdict;
  emit(res, "porosity.csv", csv.str());
  emit(res, "porosity.json", verdict.dump(1) + "\n");
  return res;
}

inline ExperimentResult run_covering(const ExperimentConfig& cfg,
                                     const SystemSpec& spec) {
  ExperimentResult res;
  const int depth = require_single_depth(cfg);
  const LimitSetApprox ap = generate(spec, depth, cfg.atom_budget);
  const AtomicMeasure mu = AtomicMeasure::natural_measure(ap);
  const Vec x = cfg.params.contains("x")
                    ? detail::vec_from_json(cfg.params["x"], spec.dim, "params.x")
                    : spec.seed_box.center();
  const double r = cfg.params.value("r", 1.0);
  const int axis = cfg.params.value("axis", spec.dim);
  const int M = cfg.params.value("grid_m", 4);
  const int levels = cfg.params.value("levels", 3);
  const CoveringFamily fam = build_covering(mu, ap, x, r, axis, M, levels);
  json j;
  j["axis"] = axis;
  j["grid_m"] = M;
  j["levels_requested"] = levels;
  j["complete"] = fam.complete;
  if (fam.failing_cube) {
    std::vector<double> c(fam.failing_cube->data(),
                          fam.failing_cube->data() + spec.dim);
    j["failing_cube"] = c;
  }
  j["levels"] = json::array();
  for (const auto& lv : fam.levels) {
    json lj;
    lj["level"] = lv.level;
    lj["count"] = lv.cube_count;
    lj["expected"] = lv.expected_count;
    lj["coverage_ok"] = lv.coverage_ok;
    lj["strip_half_width"] = lv.strip_half_width;
    j["levels"].push_back(lj);
  }
  res.verdict = j;
  emit(res, "covering.json", j.dump(1) + "\n");
  return res;
}

inline ExperimentResult run_strips(const ExperimentConfig& cfg,
                                   const SystemSpec& spec) {
  ExperimentResult res;
  const int depth = require_single_depth(cfg);
  const LimitSetApprox ap = generate(spec, depth, cfg.atom_budget);
  const AtomicMeasure mu = AtomicMeasure::natural_measure(ap);
  const double a = cfg.params.value("a", 0.25);
  const int k_max = cfg.params.value("k_max", 8);

  StripSurface surface;
  if (cfg.params.contains("sphere_center")) {
    SphereShell sh;
    sh.center = detail::vec_from_json(cfg.params["sphere_center"], spec.dim,
                                      "params.sphere_center");
    sh.radius = cfg.params.value("sphere_radius", 1.0);
    surface = sh;
  } else {
    const int axis = cfg.params.value("plane_axis", spec.dim);
    const double value = cfg.params.value("plane_value", 0.0);
    Vec base = Vec::zero(spec.dim);
    base.v[axis - 1] = value;
    surface = DirectionPlane::coordinate(spec.dim, axis, base);
  }

  std::optional<EnvelopeParams> env;
  if (cfg.params.contains("envelope")) {
    const auto& ej = cfg.params["envelope"];
    EnvelopeParams ep;
    ep.x = detail::vec_from_json(ej.at("x"), spec.dim, "params.envelope.x");
    ep.axis = ej.value("axis", spec.dim);
    ep.M = ej.value("M", 4);
    ep.k_max = ej.value("k_max", 6);
    const GrowthReport gr = growth_constant(
        mu, spec.dim - 1, std::min<size_t>(mu.count(), 256), cfg.seed,
        cfg.threads);
    ep.C_hat = gr.C_hat;
    env = ep;
  }

  const StripSeriesReport rep = strip_series(mu, surface, a, k_max, env);
  CsvWriter csv({"k", "lo", "hi", "mass", "term", "partial_sum", "flag"});
  for (const auto& row : rep.rows)
    csv.row({std::to_string(row.k), fmt_double(row.lo), fmt_double(row.hi),
             fmt_double(row.mass), fmt_double(row.term),
             fmt_double(row.partial_sum),
             row.resolution_limited ? "resolution_limited" : "ok"});
  json j;
  j["a"] = a;
  j["k_max"] = k_max;
  j["series_total"] = rep.series_total;
  j["surface_hits"] = rep.surface_hits;
  if (!rep.envelope.empty()) {
    j["envelope_dominates"] = rep.envelope_dominates;
    j["envelope"] = json::array();
    for (const auto& er : rep.envelope) {
      json e;
      e["k"] = er.k;
      e["measured"] = er.measured;
      e["envelope"] = er.envelope;
      e["slack"] = std::isfinite(er.slack) ? er.slack : -1.0;
      j["envelope"].push_back(e);
    }
  }
  res.verdict = j;
  emit(res, "strips.csv", csv.str());
  emit(res, "strips.json", j.dump(1) + "\n");
  return res;
}

inline ExperimentResult run_weakconv(const ExperimentConfig& cfg,
                                     const SystemSpec& spec) {
  ExperimentResult res;
  if (cfg.depths.size() < 2)
    throw UsageError("weakconv needs 'depths' with at least two entries");
  std::vector<int> depths = cfg.depths;
  std::sort(depths.begin(), depths.end());
  std::vector<LimitSetApprox> approxes;
  std::vector<AtomicMeasure> measures;
  for (int d : depths) approxes.push_back(generate(spec, d, cfg.atom_budget));
  for (const auto& ap : approxes)
    measures.push_back(AtomicMeasure::natural_measure(ap));
  double h_coarse = 0;
  for (const auto& mu : measures) h_coarse = std::max(h_coarse, mu.resolution);

  const KernelSpec K = detail::load_kernel(cfg.params, spec.dim);
  const double pad = 2.0 * h_coarse;
  if (spec.dim != 2 && (!cfg.params.contains("f") || !cfg.params.contains("g")))
    throw UsageError("weakconv default f/g cubes exist only for dimension 2");
  SimpleFunction f, g;
  if (cfg.params.contains("f"))
    f = detail::function_from_json(cfg.params["f"], spec.dim, pad);
  else
    f = SimpleFunction::indicator_cube(
        HalfOpenCube{Vec{0.25, 0.25}, 0.5 + pad});
  if (cfg.params.contains("g"))
    g = detail::function_from_json(cfg.params["g"], spec.dim, pad);
  else
    g = SimpleFunction::indicator_cube(
        HalfOpenCube{Vec{0.75, 0.25}, 0.5 + pad});

  const double eps_start = cfg.params.value("eps_start", 0.1);
  const double eps_ratio = cfg.params.value("eps_ratio", 0.5);
  const int eps_count = cfg.params.value("eps_count", 9);
  const auto schedule = geometric_schedule(eps_start, eps_ratio, eps_count);

  const GrowthReport gr = growth_constant(
      measures.back(), spec.dim - 1,
      std::min<size_t>(measures.back().count(), 256), cfg.seed, cfg.threads);

  std::vector<const AtomicMeasure*> mptr;
  for (const auto& mu : measures) mptr.push_back(&mu);
  const WeakConvergenceReport rep =
      weak_convergence_trace(mptr, K, f, g, schedule, gr.C_hat, cfg.threads);

  for (size_t i = 0; i < rep.depths.size(); ++i) {
    const std::string name =
        "trace_depth" + std::to_string(depths[i]) + ".csv";
    emit(res, name, rep.depths[i].trace.csv());
  }

  // Paired pointwise diagnostic at a few recorded atoms of the finest depth.
  json pw = json::array();
  {
    const AtomicMeasure& fine = measures.back();
    std::vector<size_t> recorded;
    if (cfg.params.contains("pointwise_atoms"))
      recorded = cfg.params["pointwise_atoms"].get<std::vector<size_t>>();
    else
      recorded = {0, fine.count() / 3, fine.count() / 2, 2 * fine.count() / 3};
    CsvWriter pcsv({"atom", "epsilon", "value", "increment", "flag"});
    for (size_t idx : recorded) {
      if (idx >= fine.count()) continue;
      const Vec x = Vec::from(fine.point(idx), fine.dim);
      const ConvergenceTrace tr =
          pointwise_trace(fine, K, SimpleFunction::one(), x, schedule);
      const OscillationReport osc = oscillation_report(tr);
      for (size_t j = 0; j < tr.epsilons.size(); ++j)
        pcsv.row({std::to_string(idx), fmt_double(tr.epsilons[j]),
                  fmt_double(tr.values[j]),
                  fmt_double(j + 1 < tr.epsilons.size() ? tr.increments[j] : 0.0),
                  trace_flag_name(tr.flags[j])});
      json pj;
      pj["atom"] = idx;
      pj["max_increment"] = osc.max_increment;
      pj["late_max_increment"] = osc.late_max_increment;
      pj["non_decaying"] = osc.non_decaying;
      pw.push_back(pj);
    }
    emit(res, "pointwise.csv", pcsv.str());
  }

  json j;
  j["cauchy_consistent"] = rep.cauchy_consistent;
  j["cross_depth_max_disagreement"] = rep.max_disagreement;
  j["agreement_ok"] = rep.agreement_ok;
  j["increments_monotone"] = rep.increments_monotone;
  j["valid_eps"] = {rep.valid_lo, rep.valid_hi};
  j["growth_C_hat"] = gr.C_hat;
  j["pointwise"] = pw;
  res.verdict = j;
  emit(res, "weakconv.json", j.dump(1) + "\n");
  return res;
}

inline ExperimentResult run_crossint(const ExperimentConfig& cfg,
                                     const SystemSpec& spec) {
  ExperimentResult res;
  const int depth = require_single_depth(cfg);
  const LimitSetApprox ap = generate(spec, depth, cfg.atom_budget);
  const AtomicMeasure mu = AtomicMeasure::natural_measure(ap);
  const KernelSpec K = detail::load_kernel(cfg.params, spec.dim);
  HalfOpenCube cube;
  cube.center = cfg.params.contains("cube_center")
                    ? detail::vec_from_json(cfg.params["cube_center"], spec.dim,
                                            "params.cube_center")
                    : Vec{0.25, 0.25};
  cube.side = cfg.params.value("cube_side", 0.5);
  if (cfg.params.value("pad_2h", true)) cube.side += 2.0 * mu.resolution;
  const int M = cfg.params.value("grid_m", 4);
  const GrowthReport gr = growth_constant(
      mu, spec.dim - 1, std::min<size_t>(mu.count(), 256), cfg.seed,
      cfg.threads);
  const CrossIntegralReport rep =
      cross_integral(mu, K, cube, M, gr.C_hat, cfg.threads);
  json j;
  j["value"] = rep.value;
  j["shell_bound"] = rep.shell_bound;
  j["strip_expression"] = rep.strip_expression;
  j["value_le_shell"] = rep.value_le_shell;
  j["shell_le_strip"] = rep.shell_le_strip;
  j["interior_atoms"] = rep.interior_atoms;
  j["outside_atoms"] = rep.outside_atoms;
  j["excluded_face_atoms"] = rep.excluded_face_atoms;
  j["C_hat"] = rep.C_hat;
  j["a"] = rep.decay_a;
  j["faces"] = json::array();
  for (const auto& fr : rep.faces) {
    json fj;
    fj["log_integral"] = fr.log_integral;
    fj["strip_bound"] = fr.strip_bound;
    fj["strip_series"] = fr.strip_series;
    fj["ok"] = fr.ok;
    j["faces"].push_back(fj);
  }
  res.verdict = j;
  emit(res, "crossint.json", j.dump(1) + "\n");
  return res;
}

}  // namespace detail

// Runs one experiment; writes artifacts into cfg.out_dir when set. A nonzero
// exit code means an internal invariant failed, not a negative scientific
// verdict.
inline ExperimentResult run(const ExperimentConfig& cfg) {
  const SystemSpec spec = detail::load_system(cfg.system);
  ExperimentResult res;
  if (cfg.experiment == "generate")
    res = detail::run_generate(cfg, spec);
  else if (cfg.experiment == "osc")
    res = detail::run_osc(cfg, spec);
  else if (cfg.experiment == "porosity")
    res = detail::run_porosity(cfg, spec);
  else if (cfg.experiment == "covering")
    res = detail::run_covering(cfg, spec);
  else if (cfg.experiment == "strips")
    res = detail::run_strips(cfg, spec);
  else if (cfg.experiment == "weakconv")
    res = detail::run_weakconv(cfg, spec);
  else if (cfg.experiment == "crossint")
    res = detail::run_crossint(cfg, spec);
  else
    throw UsageError("unknown experiment '" + cfg.experiment + "'");

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    for (const auto& name : res.artifacts)
      write_text_file(cfg.out_dir + "/" + name, res.payloads.at(name));
    // A record of the exact configuration next to the artifacts.
    write_text_file(cfg.out_dir + "/config.json", cfg.to_json().dump(1) + "\n");
  }
  return res;
}

// Merges artifacts of several completed runs into one bundle directory:
// a manifest plus per-figure CSV tables. Missing artifacts are listed, and a
// partial bundle is still produced.
struct BundleResult {
  json manifest;
  std::map<std::string, std::string> payloads;
};

inline BundleResult report_bundle(const std::vector<std::string>& run_dirs,
                                  const std::string& bundle_dir) {
  BundleResult out;
  json manifest;
  manifest["runs"] = json::array();
  manifest["missing"] = json::array();
  CsvWriter fig_trace({"run", "depth_file", "epsilon", "value", "increment",
                       "flag"});
  CsvWriter fig_strips({"run", "k", "term", "partial_sum"});
  CsvWriter fig_porosity({"run", "direction_id", "theta", "c_estimate"});

  for (const auto& dir : run_dirs) {
    json entry;
    entry["dir"] = dir;
    entry["artifacts"] = json::array();
    if (!std::filesystem::exists(dir)) {
      manifest["missing"].push_back(dir);
      manifest["runs"].push_back(entry);
      continue;
    }
    std::vector<std::string> names;
    for (const auto& de : std::filesystem::directory_iterator(dir))
      names.push_back(de.path().filename().string());
    std::sort(names.begin(), names.end());
    for (const std::string& fname : names) {
      entry["artifacts"].push_back(fname);
      const std::string text = read_text_file(dir + "/" + fname);
      if (fname.rfind("trace_", 0) == 0) {
        std::istringstream ss(text);
        std::string line;
        std::getline(ss, line);  // header
        while (std::getline(ss, line)) {
          std::istringstream ls(line);
          std::string eps, val, inc, flag;
          std::getline(ls, eps, ',');
          std::getline(ls, val, ',');
          std::getline(ls, inc, ',');
          std::getline(ls, flag, ',');
          fig_trace.row({dir, fname, eps, val, inc, flag});
        }
      } else if (fname == "strips.csv") {
        std::istringstream ss(text);
        std::string line;
        std::getline(ss, line);
        while (std::getline(ss, line)) {
          std::istringstream ls(line);
          std::string k, lo, hi, mass, term, partial, flag;
          std::getline(ls, k, ',');
          std::getline(ls, lo, ',');
          std::getline(ls, hi, ',');
          std::getline(ls, mass, ',');
          std::getline(ls, term, ',');
          std::getline(ls, partial, ',');
          fig_strips.row({dir, k, term, partial});
        }
      } else if (fname == "porosity.json") {
        const json pj = json::parse(text);
        for (const auto& dj : pj["directions"])
          fig_porosity.row({dir, dj["id"].get<std::string>(),
                            fmt_double(dj["theta"].is_null()
                                           ? std::nan("")
                                           : dj["theta"].get<double>()),
                            fmt_double(dj["c_estimate"].get<double>())});
      }
    }
    manifest["runs"].push_back(entry);
  }
  out.manifest = manifest;
  out.payloads["bundle.json"] = manifest.dump(1) + "\n";
  out.payloads["fig_trace.csv"] = fig_trace.str();
  out.payloads["fig_strips.csv"] = fig_strips.str();
  out.payloads["fig_porosity.csv"] = fig_porosity.str();
  if (!bundle_dir.empty()) {
    std::filesystem::create_directories(bundle_dir);
    for (const auto& [name, bytes] : out.payloads)
      write_text_file(bundle_dir + "/" + name, bytes);
  }
  return out;
}

}  // namespace porolab
