// Command-line front end: one experiment per invocation, artifacts written as
// CSV/JSON into --out. Exit codes: 0 success (any scientific verdict),
// 2 usage, 3 capacity, 4 internal invariant failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "porolab/experiment.hpp"

namespace {

using porolab::ExperimentConfig;
using nlohmann::json;

struct CommonOpts {
  std::string system = "four_corners";
  std::string config_file;
  std::vector<int> depths;
  uint64_t seed = 1;
  int threads = 0;
  std::string out;
  size_t atom_budget = porolab::kDefaultAtomBudget;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--system", o.system, "built-in system key or a JSON file");
  cmd->add_option("--config", o.config_file, "JSON config file (flags override)");
  cmd->add_option("--depth", o.depths, "cylinder depth(s)");
  cmd->add_option("--seed", o.seed, "seed for all sampling");
  cmd->add_option("--threads", o.threads, "worker cap (0 = hardware)");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--budget", o.atom_budget, "atom budget");
}

json system_field(const std::string& s) {
  if (s.size() > 5 && s.substr(s.size() - 5) == ".json")
    return json::parse(porolab::read_text_file(s));
  return json(s);
}

ExperimentConfig build_config(const std::string& experiment, const CommonOpts& o,
                              const json& params) {
  json j;
  if (!o.config_file.empty())
    j = json::parse(porolab::read_text_file(o.config_file));
  if (j.is_null()) j = json::object();
  if (!j.is_object())
    throw porolab::UsageError("config file must hold a JSON object");
  j["experiment"] = experiment;
  if (!j.contains("system") || !o.system.empty())
    j["system"] = system_field(o.system);
  if (!o.depths.empty()) {
    j.erase("depth");
    if (o.depths.size() == 1)
      j["depth"] = o.depths[0];
    else
      j["depths"] = o.depths;
  }
  if (!j.contains("seed")) j["seed"] = o.seed;
  j["threads"] = o.threads;
  if (!o.out.empty()) j["out"] = o.out;
  if (!j.contains("atom_budget")) j["atom_budget"] = o.atom_budget;
  json p = j.value("params", json::object());
  for (auto it = params.begin(); it != params.end(); ++it) p[it.key()] = it.value();
  j["params"] = p;
  return ExperimentConfig::from_json(j);
}

int dispatch(const ExperimentConfig& cfg) {
  const auto res = porolab::run(cfg);
  std::cout << cfg.experiment << ": "
            << (res.verdict.is_null() ? json::object() : res.verdict).dump(1)
            << "\n";
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"limit-set porosity and singular-integral laboratory"};
  app.require_subcommand(1);

  CommonOpts gen, osc, por, cov, strips, weak, cross, suite, bundle;
  json por_params = json::object(), cov_params = json::object(),
       strip_params = json::object(), weak_params = json::object(),
       cross_params = json::object();

  auto* c_gen = app.add_subcommand("generate", "cylinders, atoms and measure");
  add_common(c_gen, gen);

  auto* c_osc = app.add_subcommand("osc-check", "open set condition and constants");
  add_common(c_osc, osc);

  auto* c_por = app.add_subcommand("porosity", "directed hole search profiles");
  add_common(c_por, por);
  std::string direction;
  int fan = 0, on_axis = 0;
  double on_value = 0;
  size_t n_points = 64, n_scales = 5;
  c_por->add_option("--direction", direction, "axis<i> or theta:<radians>");
  c_por->add_option("--directions", fan, "fan of N line directions (n=2)");
  c_por->add_option("--points", n_points, "sample points per direction");
  c_por->add_option("--scales", n_scales, "dyadic radii per point");
  c_por->add_option("--on-axis", on_axis, "restrict samples to atoms at axis value");
  c_por->add_option("--on-value", on_value, "value for --on-axis");

  auto* c_cov = app.add_subcommand("covering", "inductive grid coverings");
  add_common(c_cov, cov);
  std::vector<double> cov_x;
  double cov_r = 1.0;
  int cov_axis = 0, grid_m = 4, levels = 3;
  c_cov->add_option("--x", cov_x, "cube center");
  c_cov->add_option("--r", cov_r, "cube side");
  c_cov->add_option("--axis", cov_axis, "coordinate held fixed by the grids");
  c_cov->add_option("--grid-m", grid_m, "grid refinement M");
  c_cov->add_option("--levels", levels, "covering levels k");

  auto* c_strips = app.add_subcommand("strips", "strip family series");
  add_common(c_strips, strips);
  double a = 0.25;
  int k_max = 8, plane_axis = 0;
  double plane_value = 0;
  std::vector<double> sphere_center;
  double sphere_radius = 0;
  bool with_envelope = false;
  c_strips->add_option("--a", a, "strip decay in (0,1)");
  c_strips->add_option("--k-max", k_max, "bands to measure");
  c_strips->add_option("--plane-axis", plane_axis, "coordinate plane axis");
  c_strips->add_option("--plane-value", plane_value, "plane offset");
  c_strips->add_option("--sphere-center", sphere_center, "sphere center");
  c_strips->add_option("--sphere-radius", sphere_radius, "sphere radius");
  c_strips->add_flag("--envelope", with_envelope,
                     "compare axis strips against the covering envelope");

  auto* c_weak = app.add_subcommand("weakconv", "bilinear traces across depths");
  add_common(c_weak, weak);
  double eps_start = 0.1, eps_ratio = 0.5;
  int eps_count = 9;
  std::string kernel = "riesz";
  int kernel_coord = 1;
  c_weak->add_option("--eps-start", eps_start, "largest truncation");
  c_weak->add_option("--eps-ratio", eps_ratio, "schedule ratio");
  c_weak->add_option("--eps-count", eps_count, "schedule length");
  c_weak->add_option("--kernel", kernel, "riesz or riesz_sign");
  c_weak->add_option("--kernel-coord", kernel_coord, "riesz coordinate");

  auto* c_cross = app.add_subcommand("crossint", "cross integral bound chain");
  add_common(c_cross, cross);
  std::vector<double> cube_center;
  double cube_side = 0.5;
  int cross_m = 4;
  std::string cross_kernel = "riesz";
  c_cross->add_option("--cube-center", cube_center, "cube center");
  c_cross->add_option("--cube-side", cube_side, "cube side before 2h padding");
  c_cross->add_option("--grid-m", cross_m, "M fixing the strip decay a = 1/M");
  c_cross->add_option("--kernel", cross_kernel, "riesz or riesz_sign");

  auto* c_suite = app.add_subcommand("suite", "canonical experiment battery");
  add_common(c_suite, suite);

  auto* c_bundle = app.add_subcommand("bundle", "merge run artifacts");
  std::vector<std::string> run_dirs;
  std::string bundle_out = "bundle";
  c_bundle->add_option("--runs", run_dirs, "completed run directories")->required();
  c_bundle->add_option("--out", bundle_out, "bundle directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_gen->parsed()) return dispatch(build_config("generate", gen, {}));
    if (c_osc->parsed()) return dispatch(build_config("osc", osc, {}));
    if (c_por->parsed()) {
      if (!direction.empty()) por_params["direction"] = direction;
      if (fan > 0) por_params["directions"] = fan;
      por_params["points"] = n_points;
      por_params["scales"] = n_scales;
      if (on_axis > 0) {
        por_params["on_surface_axis"] = on_axis;
        por_params["on_surface_value"] = on_value;
      }
      return dispatch(build_config("porosity", por, por_params));
    }
    if (c_cov->parsed()) {
      if (!cov_x.empty()) cov_params["x"] = cov_x;
      cov_params["r"] = cov_r;
      if (cov_axis > 0) cov_params["axis"] = cov_axis;
      cov_params["grid_m"] = grid_m;
      cov_params["levels"] = levels;
      return dispatch(build_config("covering", cov, cov_params));
    }
    if (c_strips->parsed()) {
      strip_params["a"] = a;
      strip_params["k_max"] = k_max;
      if (plane_axis > 0) {
        strip_params["plane_axis"] = plane_axis;
        strip_params["plane_value"] = plane_value;
      }
      if (!sphere_center.empty()) {
        strip_params["sphere_center"] = sphere_center;
        strip_params["sphere_radius"] = sphere_radius;
      }
      if (with_envelope) {
        json env;
        env["x"] = std::vector<double>{0.0, 0.0};
        env["axis"] = plane_axis > 0 ? plane_axis : 2;
        env["M"] = 4;
        env["k_max"] = 6;
        strip_params["envelope"] = env;
      }
      return dispatch(build_config("strips", strips, strip_params));
    }
    if (c_weak->parsed()) {
      weak_params["eps_start"] = eps_start;
      weak_params["eps_ratio"] = eps_ratio;
      weak_params["eps_count"] = eps_count;
      weak_params["kernel"] = kernel;
      weak_params["kernel_coord"] = kernel_coord;
      return dispatch(build_config("weakconv", weak, weak_params));
    }
    if (c_cross->parsed()) {
      if (!cube_center.empty()) cross_params["cube_center"] = cube_center;
      cross_params["cube_side"] = cube_side;
      cross_params["grid_m"] = cross_m;
      cross_params["kernel"] = cross_kernel;
      return dispatch(build_config("crossint", cross, cross_params));
    }
    if (c_suite->parsed()) {
      // Standard battery: one run per experiment kind under out/<kind>.
      const std::string base = suite.out.empty() ? "suite_out" : suite.out;
      std::vector<std::string> dirs;
      auto run_one = [&](const std::string& kind, json params,
                         std::vector<int> depths) {
        CommonOpts o = suite;
        o.out = base + "/" + kind;
        o.depths = depths;
        dirs.push_back(o.out);
        const auto cfg = build_config(kind, o, params);
        porolab::run(cfg);
      };
      const int d = suite.depths.empty() ? 6 : suite.depths[0];
      run_one("generate", {}, {d});
      run_one("osc", {}, {std::min(d, 6)});
      run_one("porosity", json{{"direction", "axis1"}, {"points", 16}, {"scales", 3}},
              {d});
      run_one("strips",
              json{{"a", 0.25},
                   {"k_max", 8},
                   {"plane_axis", 2},
                   {"plane_value", 0.0}},
              {d});
      run_one("weakconv", {}, {d - 1, d});
      run_one("crossint", {}, {d});
      const auto bundle_res = porolab::report_bundle(dirs, base + "/bundle");
      std::cout << "suite: " << bundle_res.manifest.dump(1) << "\n";
      return 0;
    }
    if (c_bundle->parsed()) {
      const auto res = porolab::report_bundle(run_dirs, bundle_out);
      std::cout << res.manifest.dump(1) << "\n";
      return res.manifest["missing"].empty() ? 0 : 0;
    }
  } catch (const porolab::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return porolab::kExitCapacity;
  } catch (const porolab::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return porolab::kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return porolab::kExitUsage;
  } catch (const porolab::InternalError& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return porolab::kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return porolab::kExitInternal;
  }
  return 0;
}
