#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "porolab/geometry.hpp"

namespace porolab {

// Balanced kd-tree over a flat point array. Nodes own contiguous ranges of a
// permutation array; bounding boxes are exact coordinate min/max, so box-vs-box
// pruning involves no arithmetic. Band pruning uses a small relative slack and
// final membership is always decided by the exact per-point predicate, which
// keeps range sums identical to a brute-force scan.
class KdTree {
 public:
  static constexpr size_t kLeafSize = 16;

  KdTree() = default;

  void build(const std::vector<double>& points, int dim) {
    pts_ = &points;
    dim_ = dim;
    const size_t n = points.size() / static_cast<size_t>(dim);
    perm_.resize(n);
    for (size_t i = 0; i < n; ++i) perm_[i] = static_cast<uint32_t>(i);
    nodes_.clear();
    if (n == 0) return;
    nodes_.reserve(2 * n / kLeafSize + 8);
    build_node(0, n);
  }

  size_t size() const { return perm_.size(); }
  bool empty() const { return perm_.empty(); }

  // Collects original indices of points passing `pred`, pruning subtrees for
  // which `cell_may_contain` is false. Output is sorted ascending.
  template <class CellTest, class PointPred>
  void query(const CellTest& cell_may_contain, const PointPred& pred,
             std::vector<uint32_t>& out) const {
    out.clear();
    if (nodes_.empty()) return;
    collect(0, cell_may_contain, pred, out);
    std::sort(out.begin(), out.end());
  }

  template <class PointPred>
  void query_box(const Box& query_box, const PointPred& pred,
                 std::vector<uint32_t>& out) const {
    query([&](const Box& cell) { return cell.intersects_closed_box(query_box); },
          pred, out);
  }

  struct Nearest {
    uint32_t index = 0;
    double dist2 = std::numeric_limits<double>::infinity();
  };

  Nearest nearest_l2(const double* p) const {
    Nearest best;
    if (!nodes_.empty()) nn_l2(0, p, best);
    return best;
  }

  struct NearestLinf {
    uint32_t index = 0;
    double dist = std::numeric_limits<double>::infinity();
  };

  NearestLinf nearest_linf(const double* p) const {
    NearestLinf best;
    if (!nodes_.empty()) nn_linf(0, p, best);
    return best;
  }

  const Box& root_box() const { return nodes_.front().bbox; }

 private:
  struct Node {
    Box bbox;
    uint32_t begin = 0, end = 0;
    int32_t left = -1, right = -1;
  };

  const double* pt(uint32_t i) const {
    return pts_->data() + static_cast<size_t>(i) * static_cast<size_t>(dim_);
  }

  Box bbox_of(size_t b, size_t e) const {
    Box box;
    box.lo = Vec::from(pt(perm_[b]), dim_);
    box.hi = box.lo;
    for (size_t i = b + 1; i < e; ++i) {
      const double* p = pt(perm_[i]);
      for (int d = 0; d < dim_; ++d) {
        box.lo.v[d] = std::min(box.lo.v[d], p[d]);
        box.hi.v[d] = std::max(box.hi.v[d], p[d]);
      }
    }
    return box;
  }

  int32_t build_node(size_t b, size_t e) {
    const int32_t id = static_cast<int32_t>(nodes_.size());
    nodes_.push_back({});
    nodes_[static_cast<size_t>(id)].begin = static_cast<uint32_t>(b);
    nodes_[static_cast<size_t>(id)].end = static_cast<uint32_t>(e);
    Box box = bbox_of(b, e);
    nodes_[static_cast<size_t>(id)].bbox = box;
    if (e - b > kLeafSize) {
      int axis = 0;
      double widest = -1;
      for (int d = 0; d < dim_; ++d)
        if (box.side(d) > widest) {
          widest = box.side(d);
          axis = d;
        }
      const size_t mid = b + (e - b) / 2;
      std::nth_element(perm_.begin() + static_cast<std::ptrdiff_t>(b),
                       perm_.begin() + static_cast<std::ptrdiff_t>(mid),
                       perm_.begin() + static_cast<std::ptrdiff_t>(e),
                       [&](uint32_t a, uint32_t c) {
                         const double pa = pt(a)[axis], pc = pt(c)[axis];
                         if (pa != pc) return pa < pc;
                         return a < c;  // deterministic on ties
                       });
      const int32_t l = build_node(b, mid);
      const int32_t r = build_node(mid, e);
      nodes_[static_cast<size_t>(id)].left = l;
      nodes_[static_cast<size_t>(id)].right = r;
    }
    return id;
  }

  template <class CellTest, class PointPred>
  void collect(int32_t id, const CellTest& cell_ok, const PointPred& pred,
               std::vector<uint32_t>& out) const {
    const Node& nd = nodes_[static_cast<size_t>(id)];
    if (!cell_ok(nd.bbox)) return;
    if (nd.left < 0) {
      for (uint32_t i = nd.begin; i < nd.end; ++i) {
        const uint32_t idx = perm_[i];
        if (pred(pt(idx))) out.push_back(idx);
      }
      return;
    }
    collect(nd.left, cell_ok, pred, out);
    collect(nd.right, cell_ok, pred, out);
  }

  void nn_l2(int32_t id, const double* p, Nearest& best) const {
    const Node& nd = nodes_[static_cast<size_t>(id)];
    if (nd.bbox.dist2_to(p) > best.dist2) return;
    if (nd.left < 0) {
      for (uint32_t i = nd.begin; i < nd.end; ++i) {
        const uint32_t idx = perm_[i];
        const double d2 = dist2(pt(idx), p, dim_);
        if (d2 < best.dist2 || (d2 == best.dist2 && idx < best.index)) {
          best.dist2 = d2;
          best.index = idx;
        }
      }
      return;
    }
    // Visit the closer child first.
    const double dl = nodes_[static_cast<size_t>(nd.left)].bbox.dist2_to(p);
    const double dr = nodes_[static_cast<size_t>(nd.right)].bbox.dist2_to(p);
    if (dl <= dr) {
      nn_l2(nd.left, p, best);
      nn_l2(nd.right, p, best);
    } else {
      nn_l2(nd.right, p, best);
      nn_l2(nd.left, p, best);
    }
  }

  void nn_linf(int32_t id, const double* p, NearestLinf& best) const {
    const Node& nd = nodes_[static_cast<size_t>(id)];
    if (nd.bbox.linf_dist_to(p) > best.dist) return;
    if (nd.left < 0) {
      for (uint32_t i = nd.begin; i < nd.end; ++i) {
        const uint32_t idx = perm_[i];
        const double d = linf_dist(pt(idx), p, dim_);
        if (d < best.dist || (d == best.dist && idx < best.index)) {
          best.dist = d;
          best.index = idx;
        }
      }
      return;
    }
    const double dl = nodes_[static_cast<size_t>(nd.left)].bbox.linf_dist_to(p);
    const double dr = nodes_[static_cast<size_t>(nd.right)].bbox.linf_dist_to(p);
    if (dl <= dr) {
      nn_linf(nd.left, p, best);
      nn_linf(nd.right, p, best);
    } else {
      nn_linf(nd.right, p, best);
      nn_linf(nd.left, p, best);
    }
  }

  const std::vector<double>* pts_ = nullptr;
  int dim_ = 0;
  std::vector<uint32_t> perm_;
  std::vector<Node> nodes_;
};

}  // namespace porolab
