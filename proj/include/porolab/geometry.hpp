#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace porolab {

// Ambient dimensions are small (2 or 3 for the built-in systems); everything
// lives on the stack up to kMaxDim.
inline constexpr int kMaxDim = 6;

struct Vec {
  std::array<double, kMaxDim> v{};
  int n = 0;

  Vec() = default;
  explicit Vec(int dim) : n(dim) {}
  Vec(std::initializer_list<double> xs) {
    n = static_cast<int>(xs.size());
    int i = 0;
    for (double x : xs) v[i++] = x;
  }
  static Vec zero(int dim) { return Vec(dim); }
  static Vec from(const double* p, int dim) {
    Vec r(dim);
    for (int i = 0; i < dim; ++i) r.v[i] = p[i];
    return r;
  }

  int size() const { return n; }
  double& operator[](int i) { return v[i]; }
  double operator[](int i) const { return v[i]; }
  const double* data() const { return v.data(); }
  double* data() { return v.data(); }

  Vec operator+(const Vec& o) const {
    Vec r(n);
    for (int i = 0; i < n; ++i) r.v[i] = v[i] + o.v[i];
    return r;
  }
  Vec operator-(const Vec& o) const {
    Vec r(n);
    for (int i = 0; i < n; ++i) r.v[i] = v[i] - o.v[i];
    return r;
  }
  Vec operator*(double s) const {
    Vec r(n);
    for (int i = 0; i < n; ++i) r.v[i] = v[i] * s;
    return r;
  }
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (int i = 0; i < a.n; ++i) s += a.v[i] * b.v[i];
  return s;
}
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

inline double dist2(const double* a, const double* b, int n) {
  double s = 0;
  for (int i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}
inline double dist2(const Vec& a, const Vec& b) { return dist2(a.data(), b.data(), a.n); }
inline double dist(const Vec& a, const Vec& b) { return std::sqrt(dist2(a, b)); }

inline double linf_dist(const double* a, const double* b, int n) {
  double m = 0;
  for (int i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

// Lexicographic order on coordinates, used for deterministic tie-breaking.
inline bool lex_less(const Vec& a, const Vec& b) {
  for (int i = 0; i < a.n; ++i) {
    if (a.v[i] < b.v[i]) return true;
    if (a.v[i] > b.v[i]) return false;
  }
  return false;
}

struct Mat {
  std::array<double, kMaxDim * kMaxDim> a{};
  int n = 0;

  Mat() = default;
  explicit Mat(int dim) : n(dim) {}
  static Mat identity(int dim) {
    Mat m(dim);
    for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
  }
  static Mat rotation2(double theta) {
    Mat m(2);
    const double c = std::cos(theta), s = std::sin(theta);
    m.at(0, 0) = c;
    m.at(0, 1) = -s;
    m.at(1, 0) = s;
    m.at(1, 1) = c;
    return m;
  }

  double& at(int i, int j) { return a[static_cast<size_t>(i) * kMaxDim + j]; }
  double at(int i, int j) const { return a[static_cast<size_t>(i) * kMaxDim + j]; }

  Vec apply(const Vec& x) const {
    Vec r(n);
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (int j = 0; j < n; ++j) s += at(i, j) * x.v[j];
      r.v[i] = s;
    }
    return r;
  }
  Mat mul(const Mat& o) const {
    Mat r(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0;
        for (int k = 0; k < n; ++k) s += at(i, k) * o.at(k, j);
        r.at(i, j) = s;
      }
    return r;
  }

  // Max entrywise deviation of M Mᵀ from the identity.
  double orthogonality_defect() const {
    double worst = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0;
        for (int k = 0; k < n; ++k) s += at(i, k) * at(j, k);
        worst = std::max(worst, std::fabs(s - (i == j ? 1.0 : 0.0)));
      }
    return worst;
  }
};

// Dense solve with partial pivoting; n <= kMaxDim so everything stays local.
inline Vec solve_linear(Mat m, Vec b) {
  const int n = m.n;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(m.at(r, col)) > std::fabs(m.at(piv, col))) piv = r;
    if (std::fabs(m.at(piv, col)) < 1e-300)
      throw std::runtime_error("solve_linear: singular matrix");
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(m.at(piv, j), m.at(col, j));
      std::swap(b.v[piv], b.v[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = m.at(r, col) / m.at(col, col);
      for (int j = col; j < n; ++j) m.at(r, j) -= f * m.at(col, j);
      b.v[r] -= f * b.v[col];
    }
  }
  Vec x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b.v[i];
    for (int j = i + 1; j < n; ++j) s -= m.at(i, j) * x.v[j];
    x.v[i] = s / m.at(i, i);
  }
  return x;
}

// Axis-aligned box given by its lower corner and upper corner.
struct Box {
  Vec lo;
  Vec hi;

  int dim() const { return lo.n; }
  double side(int i) const { return hi.v[i] - lo.v[i]; }
  Vec sides() const { return hi - lo; }
  Vec center() const { return (lo + hi) * 0.5; }
  double diameter() const { return norm(hi - lo); }

  static Box from_corner_sides(const Vec& corner, const Vec& s) {
    return Box{corner, corner + s};
  }

  Vec corner(unsigned mask) const {
    Vec c(lo.n);
    for (int i = 0; i < lo.n; ++i) c.v[i] = (mask >> i) & 1u ? hi.v[i] : lo.v[i];
    return c;
  }

  bool contains_closed(const double* p) const {
    for (int i = 0; i < lo.n; ++i)
      if (p[i] < lo.v[i] || p[i] > hi.v[i]) return false;
    return true;
  }
  bool contains_halfopen(const double* p) const {
    for (int i = 0; i < lo.n; ++i)
      if (p[i] < lo.v[i] || p[i] >= hi.v[i]) return false;
    return true;
  }
  bool contains_open(const double* p) const {
    for (int i = 0; i < lo.n; ++i)
      if (p[i] <= lo.v[i] || p[i] >= hi.v[i]) return false;
    return true;
  }
  bool contains_box(const Box& b, double tol = 0.0) const {
    for (int i = 0; i < lo.n; ++i)
      if (b.lo.v[i] < lo.v[i] - tol || b.hi.v[i] > hi.v[i] + tol) return false;
    return true;
  }

  // Squared Euclidean distance from a point to the closed box.
  double dist2_to(const double* p) const {
    double s = 0;
    for (int i = 0; i < lo.n; ++i) {
      double d = 0;
      if (p[i] < lo.v[i]) d = lo.v[i] - p[i];
      else if (p[i] > hi.v[i]) d = p[i] - hi.v[i];
      s += d * d;
    }
    return s;
  }
  // Max Euclidean distance from a point to the closed box (farthest corner).
  double max_dist2_to(const double* p) const {
    double s = 0;
    for (int i = 0; i < lo.n; ++i) {
      const double d = std::max(std::fabs(p[i] - lo.v[i]), std::fabs(p[i] - hi.v[i]));
      s += d * d;
    }
    return s;
  }
  double linf_dist_to(const double* p) const {
    double m = 0;
    for (int i = 0; i < lo.n; ++i) {
      double d = 0;
      if (p[i] < lo.v[i]) d = lo.v[i] - p[i];
      else if (p[i] > hi.v[i]) d = p[i] - hi.v[i];
      m = std::max(m, d);
    }
    return m;
  }

  bool intersects_closed_ball(const Vec& x, double r) const {
    return dist2_to(x.data()) <= r * r;
  }
  bool intersects_closed_box(const Box& b) const {
    for (int i = 0; i < lo.n; ++i)
      if (b.hi.v[i] < lo.v[i] || b.lo.v[i] > hi.v[i]) return false;
    return true;
  }

  Box expanded(double delta) const {
    Box b = *this;
    for (int i = 0; i < lo.n; ++i) {
      b.lo.v[i] -= delta;
      b.hi.v[i] += delta;
    }
    return b;
  }
  Box shrunk(double delta) const { return expanded(-delta); }
};

// Interiors of image boxes are taken per axis: axes of (near) zero extent are
// kept as points, so degenerate seed boxes (a segment in the plane) still get
// a meaningful disjointness test.
inline constexpr double kDegenerateSide = 1e-13;

inline bool open_boxes_intersect(const Box& a, const Box& b) {
  for (int i = 0; i < a.dim(); ++i) {
    const bool dega = a.side(i) <= kDegenerateSide;
    const bool degb = b.side(i) <= kDegenerateSide;
    if (dega && degb) {
      if (std::fabs(a.lo.v[i] - b.lo.v[i]) > kDegenerateSide) return false;
    } else {
      const double lo = std::max(a.lo.v[i], b.lo.v[i]);
      const double hi = std::min(a.hi.v[i], b.hi.v[i]);
      if (!(lo < hi)) return false;
    }
  }
  return true;
}

// A(x,r) = prod_i [x_i - r/2, x_i + r/2): closed below, open above.
struct HalfOpenCube {
  Vec center;
  double side = 0;

  Box to_box() const {
    Box b;
    b.lo = Vec(center.n);
    b.hi = Vec(center.n);
    for (int i = 0; i < center.n; ++i) {
      b.lo.v[i] = center.v[i] - side / 2;
      b.hi.v[i] = center.v[i] + side / 2;
    }
    return b;
  }
  bool contains(const double* p) const {
    for (int i = 0; i < center.n; ++i) {
      const double lo = center.v[i] - side / 2;
      const double hi = center.v[i] + side / 2;
      if (p[i] < lo || p[i] >= hi) return false;
    }
    return true;
  }
  bool contains(const Vec& p) const { return contains(p.data()); }
};

// Neumaier compensated accumulator. All measure sums and kernel sums go
// through this in a fixed order so results are reproducible bit for bit.
struct Kahan {
  double sum = 0;
  double comp = 0;

  void add(double x) {
    const double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  void merge(const Kahan& o) {
    add(o.sum);
    comp += o.comp;
  }
  double value() const { return sum + comp; }
};

}  // namespace porolab
