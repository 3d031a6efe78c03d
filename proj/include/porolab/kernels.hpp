#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>

#include "porolab/errors.hpp"
#include "porolab/geometry.hpp"
#include "porolab/rng.hpp"

namespace porolab {

// Antisymmetric kernel with growth |K(z)| <= C_K |z|^{-singular_exponent}.
// Evaluators must be pure; continuity is not assumed.
struct KernelSpec {
  std::string name;
  double C_K = 1.0;
  double singular_exponent = 1.0;
  std::function<double(const double* z, int n)> eval;

  double operator()(const double* z, int n) const { return eval(z, n); }
};

// Coordinate Riesz kernel R_i^m(z) = z_i / |z|^{m+1} (1-based coordinate).
inline KernelSpec riesz_kernel(int coord, int m, int ambient_dim) {
  if (coord < 1 || coord > ambient_dim)
    throw UsageError("riesz kernel coordinate out of range");
  const int c = coord - 1;
  const double expo = (m + 1) / 2.0;
  KernelSpec k;
  k.name = "riesz" + std::to_string(coord) + "_" + std::to_string(m);
  k.C_K = 1.0;
  k.singular_exponent = m;
  k.eval = [c, expo](const double* z, int n) {
    double r2 = 0;
    for (int i = 0; i < n; ++i) r2 += z[i] * z[i];
    return z[c] / std::pow(r2, expo);
  };
  return k;
}

// Discontinuous stress kernel: sign(z_1) |z|^{-m}. Still antisymmetric and
// within the growth bound, but jumps across {z_1 = 0}.
inline KernelSpec riesz_sign_kernel(int m, int /*ambient_dim*/) {
  const double expo = m / 2.0;
  KernelSpec k;
  k.name = "riesz_sign_" + std::to_string(m);
  k.C_K = 1.0;
  k.singular_exponent = m;
  k.eval = [expo](const double* z, int n) {
    double r2 = 0;
    for (int i = 0; i < n; ++i) r2 += z[i] * z[i];
    const double s = z[0] > 0 ? 1.0 : (z[0] < 0 ? -1.0 : 0.0);
    return s / std::pow(r2, expo);
  };
  return k;
}

struct KernelCheckReport {
  bool antisymmetric = true;
  bool growth_ok = true;
  double worst_antisymmetry = 0;  // relative
  double worst_growth_ratio = 0;  // |K| |z|^m / C_K
};

// Spot-checks on seeded sample vectors with norms spread across dyadic scales.
inline KernelCheckReport spot_check_kernel(const KernelSpec& k, int n,
                                           uint64_t seed = 17,
                                           size_t samples = 1000) {
  KernelCheckReport rep;
  Rng rng(seed);
  for (size_t s = 0; s < samples; ++s) {
    Vec z(n);
    double r2 = 0;
    for (int i = 0; i < n; ++i) {
      z.v[i] = rng.uniform(-1.0, 1.0);
      r2 += z.v[i] * z.v[i];
    }
    if (r2 == 0) continue;
    const double scale = std::pow(2.0, static_cast<double>(rng.index(24)) - 12.0);
    for (int i = 0; i < n; ++i) z.v[i] *= scale;
    Vec nz = z * -1.0;
    const double a = k(z.data(), n);
    const double b = k(nz.data(), n);
    const double mag = std::max(std::fabs(a), std::fabs(b));
    if (mag > 0) {
      const double rel = std::fabs(a + b) / mag;
      rep.worst_antisymmetry = std::max(rep.worst_antisymmetry, rel);
      if (rel > 1e-12) rep.antisymmetric = false;
    }
    const double zn = norm(z);
    const double ratio =
        std::fabs(a) * std::pow(zn, k.singular_exponent) / k.C_K;
    rep.worst_growth_ratio = std::max(rep.worst_growth_ratio, ratio);
    if (ratio > 1.0 + 1e-9) rep.growth_ok = false;
  }
  return rep;
}

}  // namespace porolab
