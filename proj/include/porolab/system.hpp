#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "porolab/errors.hpp"
#include "porolab/geometry.hpp"
#include "porolab/similitude.hpp"

namespace porolab {

// Letters are 1-based, matching the index set I = {1..card(I)} used in words
// and reports. An empty word denotes the identity.
struct Word {
  std::vector<int> letters;

  Word() = default;
  Word(std::initializer_list<int> ls) : letters(ls) {}
  explicit Word(std::vector<int> ls) : letters(std::move(ls)) {}

  size_t length() const { return letters.size(); }
  bool empty() const { return letters.empty(); }

  Word parent() const {
    Word w = *this;
    if (!w.letters.empty()) w.letters.pop_back();
    return w;
  }

  std::string str() const {
    std::string s;
    for (size_t i = 0; i < letters.size(); ++i) {
      if (i) s += '.';
      s += std::to_string(letters[i]);
    }
    return s.empty() ? "()" : s;
  }

  bool operator==(const Word& o) const { return letters == o.letters; }
  bool operator<(const Word& o) const { return letters < o.letters; }
};

struct SystemSpec {
  int dim = 0;
  std::vector<SimilitudeMap> maps;
  Box seed_box;
  double uniform_ratio_bound = 0;  // s = max_i ratio_i
  std::string name;

  size_t branching() const { return maps.size(); }
  double seed_diameter() const { return seed_box.diameter(); }
  double min_ratio() const {
    double m = 1.0;
    for (const auto& f : maps) m = std::min(m, f.ratio);
    return m;
  }

  void validate() const {
    if (dim < 2 || dim > kMaxDim)
      throw UsageError("ambient dimension must lie in [2," +
                       std::to_string(kMaxDim) + "]");
    if (maps.size() < 2) throw UsageError("a system needs at least two maps");
    for (const auto& f : maps) {
      f.validate(/*strict_contraction=*/true);
      if (f.dim() != dim) throw UsageError("map dimension mismatch");
    }
    if (!(uniform_ratio_bound < 1.0))
      throw UsageError("uniform contraction bound must be < 1");
    // Invariance: each image box must sit inside the seed box. A small
    // relative tolerance absorbs corner-transform rounding.
    const double tol = 1e-12 * (1.0 + seed_diameter());
    for (size_t i = 0; i < maps.size(); ++i) {
      const Box img = maps[i].image_box(seed_box);
      if (!seed_box.contains_box(img, tol))
        throw UsageError("map " + std::to_string(i + 1) +
                         " does not keep the seed box invariant");
    }
  }

  static SystemSpec make(int dim, std::vector<SimilitudeMap> maps, Box seed,
                         std::string name = "") {
    SystemSpec s;
    s.dim = dim;
    s.maps = std::move(maps);
    s.seed_box = seed;
    s.name = std::move(name);
    double smax = 0;
    for (const auto& f : s.maps) smax = std::max(smax, f.ratio);
    s.uniform_ratio_bound = smax;
    s.validate();
    return s;
  }
};

// ---- built-in systems ------------------------------------------------------

inline SystemSpec builtin_system(const std::string& key) {
  auto scaled = [](int n, double ratio, std::initializer_list<double> shift) {
    Vec t(n);
    int i = 0;
    for (double x : shift) t.v[i++] = x;
    return SimilitudeMap::scaling(n, ratio, t);
  };
  if (key == "four_corners") {
    Box seed = Box::from_corner_sides(Vec{0, 0}, Vec{1, 1});
    return SystemSpec::make(
        2,
        {scaled(2, 0.25, {0.0, 0.0}), scaled(2, 0.25, {0.75, 0.0}),
         scaled(2, 0.25, {0.0, 0.75}), scaled(2, 0.25, {0.75, 0.75})},
        seed, key);
  }
  if (key == "segment2") {
    Box seed = Box::from_corner_sides(Vec{0, 0}, Vec{1, 0});
    return SystemSpec::make(
        2, {scaled(2, 0.5, {0.0, 0.0}), scaled(2, 0.5, {0.5, 0.0})}, seed, key);
  }
  if (key == "sierpinski") {
    const double h = std::sqrt(3.0) / 2.0;
    Box seed = Box::from_corner_sides(Vec{0, 0}, Vec{1, h});
    return SystemSpec::make(2,
                            {scaled(2, 0.5, {0.0, 0.0}),
                             scaled(2, 0.5, {0.5, 0.0}),
                             scaled(2, 0.5, {0.25, h / 2})},
                            seed, key);
  }
  if (key == "cantor_dust_unrect3d") {
    Box seed = Box::from_corner_sides(Vec{0, 0, 0}, Vec{1, 1, 1});
    std::vector<SimilitudeMap> maps;
    for (unsigned mask = 0; mask < 8; ++mask) {
      Vec t(3);
      for (int i = 0; i < 3; ++i) t.v[i] = (mask >> i) & 1u ? 0.75 : 0.0;
      maps.push_back(SimilitudeMap::scaling(3, 0.25, t));
    }
    return SystemSpec::make(3, std::move(maps), seed, key);
  }
  throw UsageError("unknown built-in system: " + key);
}

// ---- JSON (de)serialization ------------------------------------------------

inline nlohmann::json system_to_json(const SystemSpec& s) {
  nlohmann::json j;
  j["dim"] = s.dim;
  j["seed_box"]["corner"] =
      std::vector<double>(s.seed_box.lo.data(), s.seed_box.lo.data() + s.dim);
  std::vector<double> sides(static_cast<size_t>(s.dim));
  for (int i = 0; i < s.dim; ++i) sides[static_cast<size_t>(i)] = s.seed_box.side(i);
  j["seed_box"]["sides"] = sides;
  j["maps"] = nlohmann::json::array();
  for (const auto& f : s.maps) {
    nlohmann::json m;
    m["ratio"] = f.ratio;
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < s.dim; ++i) {
      std::vector<double> row(static_cast<size_t>(s.dim));
      for (int k = 0; k < s.dim; ++k) row[static_cast<size_t>(k)] = f.orthogonal.at(i, k);
      rows.push_back(row);
    }
    m["orthogonal"] = rows;
    m["translation"] =
        std::vector<double>(f.translation.data(), f.translation.data() + s.dim);
    j["maps"].push_back(m);
  }
  return j;
}

inline SystemSpec system_from_json(const nlohmann::json& j) {
  if (!j.contains("dim")) throw UsageError("system: missing field 'dim'");
  const int n = j.at("dim").get<int>();
  if (n < 2 || n > kMaxDim) throw UsageError("system.dim out of range");
  auto vec_of = [n](const nlohmann::json& arr, const std::string& path) {
    if (!arr.is_array() || static_cast<int>(arr.size()) != n)
      throw UsageError("system: " + path + " must be an array of length dim");
    Vec v(n);
    for (int i = 0; i < n; ++i) v.v[i] = arr[static_cast<size_t>(i)].get<double>();
    return v;
  };
  if (!j.contains("seed_box")) throw UsageError("system: missing 'seed_box'");
  const Vec corner = vec_of(j["seed_box"].at("corner"), "seed_box.corner");
  const Vec sides = vec_of(j["seed_box"].at("sides"), "seed_box.sides");
  Box seed = Box::from_corner_sides(corner, sides);
  if (!j.contains("maps")) throw UsageError("system: missing 'maps'");
  std::vector<SimilitudeMap> maps;
  size_t idx = 0;
  for (const auto& m : j["maps"]) {
    SimilitudeMap f;
    f.ratio = m.at("ratio").get<double>();
    f.translation = vec_of(m.at("translation"),
                           "maps[" + std::to_string(idx) + "].translation");
    f.orthogonal = Mat(n);
    const auto& rows = m.at("orthogonal");
    if (!rows.is_array() || static_cast<int>(rows.size()) != n)
      throw UsageError("system: maps[" + std::to_string(idx) +
                       "].orthogonal must be n x n");
    for (int r = 0; r < n; ++r) {
      const auto& row = rows[static_cast<size_t>(r)];
      if (!row.is_array() || static_cast<int>(row.size()) != n)
        throw UsageError("system: maps[" + std::to_string(idx) +
                         "].orthogonal must be n x n");
      for (int c = 0; c < n; ++c)
        f.orthogonal.at(r, c) = row[static_cast<size_t>(c)].get<double>();
    }
    maps.push_back(f);
    ++idx;
  }
  return SystemSpec::make(n, std::move(maps), seed);
}

// ---- word composition ------------------------------------------------------

inline SimilitudeMap compose(const SystemSpec& spec, const Word& w) {
  SimilitudeMap acc = SimilitudeMap::identity(spec.dim);
  for (size_t pos = 0; pos < w.letters.size(); ++pos) {
    const int letter = w.letters[pos];
    if (letter < 1 || letter > static_cast<int>(spec.branching()))
      throw UsageError("word letter " + std::to_string(letter) +
                       " at position " + std::to_string(pos) +
                       " outside index set [1," +
                       std::to_string(spec.branching()) + "]");
    acc = acc.compose(spec.maps[static_cast<size_t>(letter - 1)]);
  }
  return acc;
}

// ---- open set condition ----------------------------------------------------

struct OscReport {
  bool satisfied = true;
  // 1-based indices of a violating pair, or (i,i) for a containment failure.
  std::optional<std::pair<int, int>> witness;
};

// U = (relative) interior of the seed box. Checks containment of each image
// in U and pairwise disjointness of the open image boxes.
inline OscReport check_osc(const SystemSpec& spec) {
  OscReport rep;
  std::vector<Box> images;
  images.reserve(spec.maps.size());
  for (const auto& f : spec.maps) images.push_back(f.image_box(spec.seed_box));
  const double tol = 1e-12 * (1.0 + spec.seed_diameter());
  for (size_t i = 0; i < images.size(); ++i) {
    if (!spec.seed_box.contains_box(images[i], tol)) {
      rep.satisfied = false;
      rep.witness = {static_cast<int>(i + 1), static_cast<int>(i + 1)};
      return rep;
    }
  }
  for (size_t i = 0; i < images.size(); ++i)
    for (size_t j = i + 1; j < images.size(); ++j)
      if (open_boxes_intersect(images[i], images[j])) {
        rep.satisfied = false;
        rep.witness = {static_cast<int>(i + 1), static_cast<int>(j + 1)};
        return rep;
      }
  return rep;
}

// ---- similarity dimension --------------------------------------------------

// Unique t > 0 with sum_i ratio_i^t = 1; closed form for equal ratios,
// bisection to 1e-12 otherwise.
inline double similarity_dimension(const SystemSpec& spec) {
  const double r0 = spec.maps.front().ratio;
  bool equal = true;
  for (const auto& f : spec.maps)
    if (f.ratio != r0) {
      equal = false;
      break;
    }
  const double m = static_cast<double>(spec.branching());
  if (equal) return std::log(m) / std::log(1.0 / r0);

  auto moran = [&](double t) {
    double s = 0;
    for (const auto& f : spec.maps) s += std::pow(f.ratio, t);
    return s - 1.0;
  };
  double lo = 1e-12, hi = 64.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (moran(mid) > 0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace porolab
