#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "porolab/errors.hpp"
#include "porolab/geometry.hpp"
#include "porolab/system.hpp"

namespace porolab {

inline constexpr size_t kDefaultAtomBudget = size_t{1} << 22;

class LimitSetApprox;

// Cheap view over the pooled per-cylinder arrays.
struct CylinderView {
  const LimitSetApprox* owner = nullptr;
  size_t index = 0;

  Word word() const;
  SimilitudeMap map() const;
  Box image_box() const;
  Vec atom() const;
  double diameter() const;
  double weight() const;
};

// All cylinders of one fixed depth, stored in base-m rank order (the rank of
// (i1..ik) is sum (i_j - 1) m^{k-j}); the leaves under a shorter prefix are a
// contiguous rank range.
class LimitSetApprox {
 public:
  SystemSpec spec;
  int depth = 0;
  double dimension_t = 0;     // Moran exponent used for the weights
  Vec reference_point;        // fixed point of the first map
  double resolution = 0;      // max cylinder diameter
  double seed_diameter = 0;

  std::vector<double> ratios;      // count
  std::vector<double> rotations;   // count * dim * dim
  std::vector<double> shifts;      // count * dim
  std::vector<double> boxes_lo;    // count * dim
  std::vector<double> boxes_hi;    // count * dim
  std::vector<double> atoms;       // count * dim
  std::vector<double> weights;     // count

  size_t count() const { return ratios.size(); }
  int dim() const { return spec.dim; }

  CylinderView cylinder(size_t i) const { return CylinderView{this, i}; }

  Word word_of(size_t rank) const {
    const size_t m = spec.branching();
    std::vector<int> letters(static_cast<size_t>(depth));
    size_t r = rank;
    for (int j = depth - 1; j >= 0; --j) {
      letters[static_cast<size_t>(j)] = static_cast<int>(r % m) + 1;
      r /= m;
    }
    return Word(std::move(letters));
  }

  const double* atom_ptr(size_t i) const {
    return atoms.data() + i * static_cast<size_t>(spec.dim);
  }

  // Leaf rank range below the level-`level` cylinder of rank `rank`.
  std::pair<size_t, size_t> leaf_range(int level, size_t rank) const {
    size_t span = 1;
    for (int j = level; j < depth; ++j) span *= spec.branching();
    return {rank * span, (rank + 1) * span};
  }
};

inline Word CylinderView::word() const { return owner->word_of(index); }
inline SimilitudeMap CylinderView::map() const {
  const int n = owner->dim();
  SimilitudeMap f;
  f.ratio = owner->ratios[index];
  f.orthogonal = Mat(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      f.orthogonal.at(i, j) =
          owner->rotations[(index * static_cast<size_t>(n) + static_cast<size_t>(i)) *
                               static_cast<size_t>(n) +
                           static_cast<size_t>(j)];
  f.translation = Vec::from(owner->shifts.data() + index * static_cast<size_t>(n), n);
  return f;
}
inline Box CylinderView::image_box() const {
  const int n = owner->dim();
  Box b;
  b.lo = Vec::from(owner->boxes_lo.data() + index * static_cast<size_t>(n), n);
  b.hi = Vec::from(owner->boxes_hi.data() + index * static_cast<size_t>(n), n);
  return b;
}
inline Vec CylinderView::atom() const {
  return Vec::from(owner->atom_ptr(index), owner->dim());
}
inline double CylinderView::diameter() const {
  return owner->ratios[index] * owner->seed_diameter;
}
inline double CylinderView::weight() const { return owner->weights[index]; }

// Enumerates all depth-k cylinders. Atoms sit at the image of the reference
// point (the coded point of the constant word 1,1,1,...), weights follow the
// Moran exponent, boxes come from exact corner transforms.
inline LimitSetApprox generate(const SystemSpec& spec, int depth,
                               size_t atom_budget = kDefaultAtomBudget) {
  if (depth < 0) throw UsageError("depth must be >= 0");
  const size_t m = spec.branching();
  double req = 1;
  for (int j = 0; j < depth; ++j) {
    req *= static_cast<double>(m);
    if (req > static_cast<double>(atom_budget))
      throw CapacityError("atom budget exceeded: depth " + std::to_string(depth) +
                              " needs " + std::to_string(req) + " atoms (budget " +
                              std::to_string(atom_budget) + ")",
                          req);
  }
  const size_t total = static_cast<size_t>(req);
  const int n = spec.dim;

  LimitSetApprox ap;
  ap.spec = spec;
  ap.depth = depth;
  ap.dimension_t = similarity_dimension(spec);
  ap.reference_point = spec.maps.front().fixed_point();
  ap.seed_diameter = spec.seed_diameter();
  ap.ratios.resize(total);
  ap.rotations.resize(total * static_cast<size_t>(n) * static_cast<size_t>(n));
  ap.shifts.resize(total * static_cast<size_t>(n));
  ap.boxes_lo.resize(total * static_cast<size_t>(n));
  ap.boxes_hi.resize(total * static_cast<size_t>(n));
  ap.atoms.resize(total * static_cast<size_t>(n));
  ap.weights.resize(total);

  std::vector<double> letter_wt(m);
  for (size_t i = 0; i < m; ++i)
    letter_wt[i] = std::pow(spec.maps[i].ratio, ap.dimension_t);

  double max_ratio_seen = 0;
  size_t out = 0;

  // Depth-first over the word tree, children in letter order, so leaves land
  // in rank order.
  struct Frame {
    SimilitudeMap map;
    double weight;
    int level;
    size_t next_letter;
  };
  std::vector<Frame> stack;
  stack.push_back({SimilitudeMap::identity(n), 1.0, 0, 0});
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.level == depth) {
      const size_t i = out++;
      ap.ratios[i] = f.map.ratio;
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
          ap.rotations[(i * static_cast<size_t>(n) + static_cast<size_t>(r)) *
                           static_cast<size_t>(n) +
                       static_cast<size_t>(c)] = f.map.orthogonal.at(r, c);
      const Box bx = f.map.image_box(spec.seed_box);
      const Vec atom = f.map.apply(ap.reference_point);
      for (int d = 0; d < n; ++d) {
        ap.shifts[i * static_cast<size_t>(n) + static_cast<size_t>(d)] =
            f.map.translation.v[d];
        ap.boxes_lo[i * static_cast<size_t>(n) + static_cast<size_t>(d)] = bx.lo.v[d];
        ap.boxes_hi[i * static_cast<size_t>(n) + static_cast<size_t>(d)] = bx.hi.v[d];
        ap.atoms[i * static_cast<size_t>(n) + static_cast<size_t>(d)] = atom.v[d];
      }
      ap.weights[i] = f.weight;
      max_ratio_seen = std::max(max_ratio_seen, f.map.ratio);
      stack.pop_back();
      continue;
    }
    if (f.next_letter == m) {
      stack.pop_back();
      continue;
    }
    const size_t letter = f.next_letter++;
    stack.push_back({f.map.compose(spec.maps[letter]),
                     f.weight * letter_wt[letter], f.level + 1, 0});
  }

  ap.resolution = (depth == 0 ? 1.0 : max_ratio_seen) * ap.seed_diameter;
  return ap;
}

// ---- stopping families -----------------------------------------------------

struct StoppingFamily {
  Vec center;
  double radius = 0;
  std::vector<Word> words;
  std::vector<Box> boxes;          // image boxes, parallel to words
  std::vector<double> diameters;   // cylinder diameters, parallel to words
  size_t cardinality = 0;          // observed bound N
  double lower_ratio = 0;          // observed C: min diameter / r
  bool coverage_checked = false;
  bool coverage_ok = true;
};

// First words along each branch whose cylinder diameter drops to <= r, kept
// only when the cylinder box meets the closed ball B(x,r). Ball/box tests are
// closed-vs-closed on squared distances.
inline StoppingFamily stopping_family(const SystemSpec& spec,
                                      const LimitSetApprox& approx, const Vec& x,
                                      double r, bool verify_coverage = false) {
  const double dX = spec.seed_diameter();
  if (!(r > 0)) throw DomainError("stopping family needs r > 0");
  if (r > dX)
    throw DomainError("stopping family needs r <= seed diameter " +
                      std::to_string(dX));
  // Depth with s^depth d(X) <= r is enough to terminate every branch.
  {
    const double s = spec.uniform_ratio_bound;
    const int needed =
        r >= dX ? 0
                : static_cast<int>(std::ceil(std::log(r / dX) / std::log(s)));
    if (needed > approx.depth)
      throw RefinementError("stopping family at r=" + std::to_string(r) +
                                " needs approximation depth >= " +
                                std::to_string(needed),
                            needed);
  }

  StoppingFamily fam;
  fam.center = x;
  fam.radius = r;

  struct Frame {
    SimilitudeMap map;
    Word word;
  };
  std::vector<Frame> stack;
  stack.push_back({SimilitudeMap::identity(spec.dim), Word{}});
  const double r2 = r * r;
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const Box bx = f.map.image_box(spec.seed_box);
    if (bx.dist2_to(x.data()) > r2) continue;
    const double dia = f.map.ratio * dX;
    if (dia <= r) {
      fam.words.push_back(f.word);
      fam.boxes.push_back(bx);
      fam.diameters.push_back(dia);
      continue;
    }
    // Push children in reverse letter order so they pop in letter order.
    for (size_t i = spec.branching(); i-- > 0;) {
      Word w = f.word;
      w.letters.push_back(static_cast<int>(i) + 1);
      stack.push_back({f.map.compose(spec.maps[i]), std::move(w)});
    }
  }

  fam.cardinality = fam.words.size();
  fam.lower_ratio = 0;
  for (size_t i = 0; i < fam.diameters.size(); ++i) {
    const double c = fam.diameters[i] / r;
    fam.lower_ratio = i == 0 ? c : std::min(fam.lower_ratio, c);
  }

  if (verify_coverage) {
    fam.coverage_checked = true;
    const int n = spec.dim;
    const size_t count = approx.count();
    for (size_t i = 0; i < count && fam.coverage_ok; ++i) {
      const double* p = approx.atom_ptr(i);
      if (dist2(p, x.data(), n) > r2) continue;
      bool covered = false;
      for (const Box& b : fam.boxes)
        if (b.contains_closed(p)) {
          covered = true;
          break;
        }
      if (!covered) fam.coverage_ok = false;
    }
  }
  return fam;
}

// ---- distortion / diameter-comparability constants --------------------------

struct BdpReport {
  double K_bdp = 1.0;
  double D = 1.0;
};

// Similitude derivatives are constant, so the distortion constant is exactly 1.
// D compares ||phi_w'|| = prod of ratios with the cylinder's limit-set
// diameter, estimated by the spread (bounding-box diagonal) of its descendant
// atoms. Levels close to the leaf depth are skipped: their descendant clouds
// are too shallow to fill the cylinder.
inline BdpReport bdp_cifs1_constants(const SystemSpec& spec,
                                     const LimitSetApprox& approx) {
  if (approx.depth < 1) throw UsageError("bdp constants need depth >= 1");
  BdpReport rep;
  rep.K_bdp = 1.0;
  const int n = spec.dim;
  const int top_level = std::max(1, approx.depth - 5);
  double worst = 1.0;
  for (int level = 1; level <= top_level; ++level) {
    size_t n_cyl = 1;
    for (int j = 0; j < level; ++j) n_cyl *= spec.branching();
    for (size_t rank = 0; rank < n_cyl; ++rank) {
      const auto [b, e] = approx.leaf_range(level, rank);
      Vec lo = Vec::from(approx.atom_ptr(b), n);
      Vec hi = lo;
      double ratio = 0;
      for (size_t i = b; i < e; ++i) {
        const double* p = approx.atom_ptr(i);
        for (int d = 0; d < n; ++d) {
          lo.v[d] = std::min(lo.v[d], p[d]);
          hi.v[d] = std::max(hi.v[d], p[d]);
        }
      }
      // ||phi_w'|| for the prefix equals leaf ratio divided by the tail
      // product; with pooled data it is cheapest to recompose the prefix.
      {
        Word w = approx.word_of(b);
        w.letters.resize(static_cast<size_t>(level));
        ratio = 1.0;
        for (int letter : w.letters)
          ratio *= spec.maps[static_cast<size_t>(letter - 1)].ratio;
      }
      const double spread = norm(hi - lo);
      if (spread <= 0) continue;
      worst = std::max(worst, std::max(ratio / spread, spread / ratio));
    }
  }
  rep.D = worst;
  return rep;
}

}  // namespace porolab
