#pragma once

#include <cmath>

#include "porolab/errors.hpp"
#include "porolab/geometry.hpp"

namespace porolab {

inline constexpr double kOrthogonalityTol = 1e-12;

// x -> ratio * O x + shift with O orthogonal. Compositions of system maps are
// again of this form, so cylinder geometry is exact.
struct SimilitudeMap {
  double ratio = 1.0;
  Mat orthogonal;
  Vec translation;

  int dim() const { return translation.n; }

  static SimilitudeMap identity(int n) {
    return SimilitudeMap{1.0, Mat::identity(n), Vec::zero(n)};
  }
  static SimilitudeMap scaling(int n, double ratio, const Vec& shift) {
    return SimilitudeMap{ratio, Mat::identity(n), shift};
  }

  Vec apply(const Vec& x) const {
    Vec r = orthogonal.apply(x);
    for (int i = 0; i < r.n; ++i) r.v[i] = ratio * r.v[i] + translation.v[i];
    return r;
  }

  // this ∘ other
  SimilitudeMap compose(const SimilitudeMap& other) const {
    SimilitudeMap r;
    r.ratio = ratio * other.ratio;
    r.orthogonal = orthogonal.mul(other.orthogonal);
    r.translation = apply(other.translation);
    return r;
  }

  // Unique solution of p = ratio * O p + shift, i.e. (I - ratio O) p = shift.
  Vec fixed_point() const {
    const int n = dim();
    Mat m(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        m.at(i, j) = (i == j ? 1.0 : 0.0) - ratio * orthogonal.at(i, j);
    return solve_linear(m, translation);
  }

  // Axis-aligned bounding box of the image of a box (exact: min/max over the
  // transformed corners, and a similitude maps a box onto a rotated box).
  Box image_box(const Box& domain) const {
    const int n = dim();
    Box out;
    out.lo = Vec(n);
    out.hi = Vec(n);
    bool first = true;
    const unsigned corners = 1u << n;
    for (unsigned mask = 0; mask < corners; ++mask) {
      const Vec p = apply(domain.corner(mask));
      if (first) {
        out.lo = p;
        out.hi = p;
        first = false;
      } else {
        for (int i = 0; i < n; ++i) {
          out.lo.v[i] = std::min(out.lo.v[i], p.v[i]);
          out.hi.v[i] = std::max(out.hi.v[i], p.v[i]);
        }
      }
    }
    return out;
  }

  void validate(bool strict_contraction) const {
    if (!(ratio > 0.0) || ratio > 1.0 || (strict_contraction && ratio >= 1.0))
      throw UsageError("similitude ratio must lie in (0,1), got " +
                       std::to_string(ratio));
    if (orthogonal.n != translation.n)
      throw UsageError("similitude dimension mismatch");
    if (orthogonal.orthogonality_defect() > kOrthogonalityTol)
      throw UsageError("orthogonal part fails O O^T = I at 1e-12");
  }
};

}  // namespace porolab
