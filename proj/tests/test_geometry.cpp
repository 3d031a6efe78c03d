#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "porolab/geometry.hpp"
#include "porolab/kdtree.hpp"
#include "porolab/rng.hpp"
#include "porolab/surfaces.hpp"

using namespace porolab;

TEST_CASE("vector and matrix basics") {
  Vec a{1, 2};
  Vec b{3, -1};
  CHECK(dot(a, b) == 1.0);
  CHECK(norm2(a - b) == 13.0);

  Mat r = Mat::rotation2(0.7);
  CHECK(r.orthogonality_defect() < 1e-15);
  Mat rr = r.mul(Mat::rotation2(-0.7));
  CHECK(rr.orthogonality_defect() < 1e-14);

  // Solve (I - 0.5 R) p = t and check the residual.
  Mat m(2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m.at(i, j) = (i == j ? 1.0 : 0.0) - 0.5 * r.at(i, j);
  Vec t{0.3, -0.2};
  Vec p = solve_linear(m, t);
  Vec res = m.apply(p) - t;
  CHECK(norm(res) < 1e-14);
}

TEST_CASE("box conventions") {
  Box b = Box::from_corner_sides(Vec{0, 0}, Vec{1, 1});
  const double on_face[2] = {1.0, 0.5};
  CHECK(b.contains_closed(on_face));
  CHECK_FALSE(b.contains_halfopen(on_face));
  CHECK_FALSE(b.contains_open(on_face));
  const double inside[2] = {0.25, 0.75};
  CHECK(b.contains_open(inside));

  const double outside[2] = {2.0, 2.0};
  CHECK(b.dist2_to(outside) == 2.0);
  CHECK(b.intersects_closed_ball(Vec{2, 2}, std::sqrt(2.0)));
  CHECK_FALSE(b.intersects_closed_ball(Vec{2, 2}, 1.4));

  HalfOpenCube c{Vec{0.5, 0.5}, 1.0};
  const double upper[2] = {1.0, 0.2};
  CHECK_FALSE(c.contains(upper));
  const double lower[2] = {0.0, 0.0};
  CHECK(c.contains(lower));
}

TEST_CASE("open box intersection honors degenerate axes") {
  Box a = Box::from_corner_sides(Vec{0, 0}, Vec{0.5, 0.0});
  Box b = Box::from_corner_sides(Vec{0.5, 0}, Vec{0.5, 0.0});
  CHECK_FALSE(open_boxes_intersect(a, b));  // only the shared endpoint
  Box c = Box::from_corner_sides(Vec{0.25, 0}, Vec{0.5, 0.0});
  CHECK(open_boxes_intersect(a, c));
  Box d = Box::from_corner_sides(Vec{0.25, 1.0}, Vec{0.5, 0.0});
  CHECK_FALSE(open_boxes_intersect(a, d));  // different line
}

TEST_CASE("kahan compensates") {
  Kahan k;
  k.add(1e16);
  for (int i = 0; i < 10; ++i) k.add(1.0);
  k.add(-1e16);
  CHECK(k.value() == 10.0);
}

namespace {

std::vector<double> random_cloud(size_t n, int dim, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> pts(n * static_cast<size_t>(dim));
  for (double& x : pts) x = rng.uniform(-1.0, 1.0);
  return pts;
}

}  // namespace

TEST_CASE("kd-tree range queries match linear scans exactly") {
  for (int dim : {2, 3}) {
    const size_t n = 4000;
    const auto pts = random_cloud(n, dim, 42 + static_cast<uint64_t>(dim));
    KdTree tree;
    tree.build(pts, dim);
    Rng rng(7);
    for (int rep = 0; rep < 25; ++rep) {
      Vec x(dim);
      for (int d = 0; d < dim; ++d) x.v[d] = rng.uniform(-1.0, 1.0);
      const double r = rng.uniform(0.05, 1.0);
      const double r2 = r * r;
      std::vector<uint32_t> got;
      tree.query(
          [&](const Box& cell) { return cell.dist2_to(x.data()) <= r2; },
          [&](const double* p) { return dist2(p, x.data(), dim) <= r2; }, got);
      std::vector<uint32_t> want;
      for (uint32_t i = 0; i < n; ++i)
        if (dist2(pts.data() + i * static_cast<size_t>(dim), x.data(), dim) <= r2)
          want.push_back(i);
      REQUIRE(got == want);

      const auto nn = tree.nearest_l2(x.data());
      double best = 1e300;
      uint32_t arg = 0;
      for (uint32_t i = 0; i < n; ++i) {
        const double d2 = dist2(pts.data() + i * static_cast<size_t>(dim), x.data(), dim);
        if (d2 < best) {
          best = d2;
          arg = i;
        }
      }
      CHECK(nn.dist2 == best);
      CHECK(nn.index == arg);

      const auto nl = tree.nearest_linf(x.data());
      double bestl = 1e300;
      for (uint32_t i = 0; i < n; ++i)
        bestl = std::min(bestl, linf_dist(pts.data() + i * static_cast<size_t>(dim),
                                          x.data(), dim));
      CHECK(nl.dist == bestl);
    }
  }
}

TEST_CASE("plane cell bounds bracket the true distance") {
  Rng rng(11);
  const int dim = 3;
  for (int rep = 0; rep < 50; ++rep) {
    Vec nrm(dim);
    for (int d = 0; d < dim; ++d) nrm.v[d] = rng.uniform(-1.0, 1.0);
    const DirectionPlane pl = DirectionPlane::hyperplane(nrm, Vec::zero(dim));
    Box cell;
    cell.lo = Vec(dim);
    cell.hi = Vec(dim);
    for (int d = 0; d < dim; ++d) {
      const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0);
      cell.lo.v[d] = std::min(a, b);
      cell.hi.v[d] = std::max(a, b);
    }
    double lo2, hi2;
    pl.cell_bounds2(cell, lo2, hi2);
    for (int s = 0; s < 40; ++s) {
      Vec p(dim);
      for (int d = 0; d < dim; ++d)
        p.v[d] = rng.uniform(cell.lo.v[d], cell.hi.v[d]);
      const double d2 = pl.distance2(p.data());
      CHECK(d2 >= lo2 - 1e-12);
      CHECK(d2 <= hi2 + 1e-12);
    }
  }
}

TEST_CASE("direction plane constructors validate") {
  const DirectionPlane v2 = DirectionPlane::coordinate(3, 2, Vec::zero(3));
  CHECK(v2.plane_dim == 2);
  const double p[3] = {0.3, -0.7, 0.1};
  CHECK(v2.distance(p) == 0.7);

  const DirectionPlane line = DirectionPlane::line2(0.3, Vec{1, 1});
  const Vec q = Vec{1, 1} + line.tangent[0] * 2.5;
  CHECK(line.distance(q.data()) < 1e-12);
}
