#pragma once

#include <string>
#include <vector>

#include "porolab/geometry.hpp"
#include "porolab/measure.hpp"

namespace porolab {

// Finite linear combination of indicators of half-open cubes and closed
// balls; evaluation sums the coefficients of the regions containing a point.
struct SimpleFunction {
  enum class Region { cube, ball, everything };

  struct Term {
    double coef = 0;
    Region region = Region::cube;
    HalfOpenCube cube;
    Vec ball_center;
    double ball_radius = 0;
  };

  std::vector<Term> terms;

  static SimpleFunction zero() { return {}; }
  static SimpleFunction one() {
    SimpleFunction f;
    Term t;
    t.coef = 1.0;
    t.region = Region::everything;
    f.terms.push_back(t);
    return f;
  }
  static SimpleFunction indicator_cube(const HalfOpenCube& c, double coef = 1.0) {
    SimpleFunction f;
    Term t;
    t.coef = coef;
    t.region = Region::cube;
    t.cube = c;
    f.terms.push_back(t);
    return f;
  }
  static SimpleFunction indicator_ball(const Vec& center, double radius,
                                       double coef = 1.0) {
    SimpleFunction f;
    Term t;
    t.coef = coef;
    t.region = Region::ball;
    t.ball_center = center;
    t.ball_radius = radius;
    f.terms.push_back(t);
    return f;
  }

  SimpleFunction& add_cube(const HalfOpenCube& c, double coef) {
    Term t;
    t.coef = coef;
    t.region = Region::cube;
    t.cube = c;
    terms.push_back(t);
    return *this;
  }
  SimpleFunction& add_ball(const Vec& center, double radius, double coef) {
    Term t;
    t.coef = coef;
    t.region = Region::ball;
    t.ball_center = center;
    t.ball_radius = radius;
    terms.push_back(t);
    return *this;
  }

  double eval(const double* p, int n) const {
    double s = 0;
    for (const Term& t : terms) {
      switch (t.region) {
        case Region::everything:
          s += t.coef;
          break;
        case Region::cube:
          if (t.cube.contains(p)) s += t.coef;
          break;
        case Region::ball:
          if (dist2(p, t.ball_center.data(), n) <= t.ball_radius * t.ball_radius)
            s += t.coef;
          break;
      }
    }
    return s;
  }
  double eval(const Vec& p) const { return eval(p.data(), p.n); }

  // Values at every atom, in atom order.
  std::vector<double> values_on(const AtomicMeasure& mu) const {
    std::vector<double> vals(mu.count());
    for (size_t i = 0; i < mu.count(); ++i) vals[i] = eval(mu.point(i), mu.dim);
    return vals;
  }

  double sup_norm_on(const AtomicMeasure& mu) const {
    double m = 0;
    for (size_t i = 0; i < mu.count(); ++i)
      m = std::max(m, std::fabs(eval(mu.point(i), mu.dim)));
    return m;
  }
};

}  // namespace porolab
