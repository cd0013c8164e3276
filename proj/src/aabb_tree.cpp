#include "graspxfer/aabb_tree.hpp"

#include <algorithm>
#include <numeric>

namespace gx {

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c) {
  Vec3 ab = b - a, ac = c - a, ap = p - a;
  double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  Vec3 bp = p - b;
  double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  Vec3 cp = p - c;
  double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

namespace {

// Moller-Trumbore, double-sided.
bool ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                  const Vec3& b, const Vec3& c, double& t_out) {
  constexpr double kEps = 1e-14;
  Vec3 e1 = b - a, e2 = c - a;
  Vec3 pvec = dir.cross(e2);
  double det = e1.dot(pvec);
  if (std::abs(det) < kEps) return false;
  double inv_det = 1.0 / det;
  Vec3 tvec = origin - a;
  double u = tvec.dot(pvec) * inv_det;
  if (u < -1e-12 || u > 1.0 + 1e-12) return false;
  Vec3 qvec = tvec.cross(e1);
  double v = dir.dot(qvec) * inv_det;
  if (v < -1e-12 || u + v > 1.0 + 1e-12) return false;
  t_out = e2.dot(qvec) * inv_det;
  return true;
}

bool ray_box(const Vec3& origin, const Vec3& inv_dir, const Aabb& box,
             double t_min, double t_max) {
  for (int i = 0; i < 3; ++i) {
    double t0 = (box.lo[i] - origin[i]) * inv_dir[i];
    double t1 = (box.hi[i] - origin[i]) * inv_dir[i];
    if (inv_dir[i] < 0.0) std::swap(t0, t1);
    t_min = std::max(t_min, t0);
    t_max = std::min(t_max, t1);
    if (t_max < t_min) return false;
  }
  return true;
}

constexpr int kLeafSize = 4;

}  // namespace

AabbTree::AabbTree(const TriangleMesh& mesh) : mesh_(mesh) {
  int n = static_cast<int>(mesh.triangles.size());
  if (n == 0) throw InvalidArgument("AabbTree: empty mesh");
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0);
  centroids_.resize(n);
  for (int t = 0; t < n; ++t) centroids_[t] = mesh.face_centroid(t);
  nodes_.reserve(2 * n);
  build(0, n, 0);
}

int AabbTree::build(int begin, int end, int depth) {
  int index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  for (int i = begin; i < end; ++i) {
    const auto& tri = mesh_.triangles[order_[i]];
    for (int k = 0; k < 3; ++k) box.expand(mesh_.vertices[tri[k]]);
  }
  nodes_[index].box = box;
  if (end - begin <= kLeafSize || depth > 60) {
    nodes_[index].begin = begin;
    nodes_[index].end = end;
    return index;
  }
  int axis;
  box.extent().maxCoeff(&axis);
  int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](int a, int b) {
                     return centroids_[a][axis] < centroids_[b][axis];
                   });
  int left = build(begin, mid, depth + 1);
  int right = build(mid, end, depth + 1);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

AabbTree::ClosestResult AabbTree::closest_point(const Vec3& query) const {
  ClosestResult best;
  // Explicit stack, nearer child first.
  std::vector<int> stack{0};
  while (!stack.empty()) {
    int ni = stack.back();
    stack.pop_back();
    const Node& node = nodes_[ni];
    if (node.box.dist2(query) >= best.dist2) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        int t = order_[i];
        const auto& tri = mesh_.triangles[t];
        Vec3 cp = closest_point_on_triangle(query, mesh_.vertices[tri[0]],
                                            mesh_.vertices[tri[1]],
                                            mesh_.vertices[tri[2]]);
        double d2 = (cp - query).squaredNorm();
        if (d2 < best.dist2) {
          best.dist2 = d2;
          best.point = cp;
          best.triangle = t;
        }
      }
      continue;
    }
    double dl = nodes_[node.left].box.dist2(query);
    double dr = nodes_[node.right].box.dist2(query);
    if (dl < dr) {
      if (dr < best.dist2) stack.push_back(node.right);
      if (dl < best.dist2) stack.push_back(node.left);
    } else {
      if (dl < best.dist2) stack.push_back(node.left);
      if (dr < best.dist2) stack.push_back(node.right);
    }
  }
  return best;
}

std::optional<RayHit> AabbTree::raycast(const Vec3& origin, const Vec3& dir,
                                        double t_min, double t_max) const {
  Vec3 inv_dir;
  for (int i = 0; i < 3; ++i)
    inv_dir[i] = dir[i] != 0.0 ? 1.0 / dir[i]
                               : std::numeric_limits<double>::infinity();
  std::optional<RayHit> best;
  double best_t = t_max;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    int ni = stack.back();
    stack.pop_back();
    const Node& node = nodes_[ni];
    if (!ray_box(origin, inv_dir, node.box, t_min, best_t)) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        int t = order_[i];
        const auto& tri = mesh_.triangles[t];
        double hit_t;
        if (ray_triangle(origin, dir, mesh_.vertices[tri[0]],
                         mesh_.vertices[tri[1]], mesh_.vertices[tri[2]],
                         hit_t) &&
            hit_t > t_min && hit_t < best_t) {
          best_t = hit_t;
          best = RayHit{hit_t, t, origin + hit_t * dir};
        }
      }
      continue;
    }
    stack.push_back(node.left);
    stack.push_back(node.right);
  }
  return best;
}

double AabbTree::minimize(const std::function<double(const Aabb&)>& node_bound,
                          const std::function<void(int, double&)>& leaf_visit,
                          double init_best) const {
  double best = init_best;
  std::vector<std::pair<double, int>> stack;
  stack.emplace_back(node_bound(nodes_[0].box), 0);
  while (!stack.empty()) {
    auto [bound, ni] = stack.back();
    stack.pop_back();
    if (bound >= best) continue;
    const Node& node = nodes_[ni];
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) leaf_visit(order_[i], best);
      continue;
    }
    double bl = node_bound(nodes_[node.left].box);
    double br = node_bound(nodes_[node.right].box);
    // Push the farther child first so the nearer one is explored first.
    if (bl < br) {
      if (br < best) stack.emplace_back(br, node.right);
      if (bl < best) stack.emplace_back(bl, node.left);
    } else {
      if (bl < best) stack.emplace_back(bl, node.left);
      if (br < best) stack.emplace_back(br, node.right);
    }
  }
  return best;
}

void AabbTree::query_box(const Aabb& box,
                         const std::function<void(int)>& visit) const {
  std::vector<int> stack{0};
  while (!stack.empty()) {
    int ni = stack.back();
    stack.pop_back();
    const Node& node = nodes_[ni];
    if ((node.box.lo.array() > box.hi.array()).any() ||
        (node.box.hi.array() < box.lo.array()).any())
      continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) visit(order_[i]);
      continue;
    }
    stack.push_back(node.left);
    stack.push_back(node.right);
  }
}

PointTree::PointTree(const std::vector<Vec3>& points) : points_(points) {
  int n = static_cast<int>(points_.size());
  if (n == 0) throw InvalidArgument("PointTree: empty point set");
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * n);
  build(0, n, 0);
}

int PointTree::build(int begin, int end, int depth) {
  int index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  for (int i = begin; i < end; ++i) box.expand(points_[order_[i]]);
  nodes_[index].box = box;
  if (end - begin <= 8 || depth > 60) {
    nodes_[index].begin = begin;
    nodes_[index].end = end;
    return index;
  }
  int axis;
  box.extent().maxCoeff(&axis);
  int mid = (begin + end) / 2;
  std::nth_element(
      order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
      [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
  int left = build(begin, mid, depth + 1);
  int right = build(mid, end, depth + 1);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

int PointTree::nearest(const Vec3& query,
                       const std::function<bool(int)>& accept) const {
  int best = -1;
  double best_d2 = std::numeric_limits<double>::max();
  std::vector<int> stack{0};
  while (!stack.empty()) {
    int ni = stack.back();
    stack.pop_back();
    const Node& node = nodes_[ni];
    if (node.box.dist2(query) >= best_d2) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        int p = order_[i];
        if (accept && !accept(p)) continue;
        double d2 = (points_[p] - query).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best = p;
        }
      }
      continue;
    }
    double dl = nodes_[node.left].box.dist2(query);
    double dr = nodes_[node.right].box.dist2(query);
    if (dl < dr) {
      if (dr < best_d2) stack.push_back(node.right);
      if (dl < best_d2) stack.push_back(node.left);
    } else {
      if (dl < best_d2) stack.push_back(node.left);
      if (dr < best_d2) stack.push_back(node.right);
    }
  }
  return best;
}

std::vector<int> PointTree::k_nearest(
    const Vec3& query, int k, double max_radius,
    const std::function<bool(int)>& accept) const {
  if (k <= 0) return {};
  // (dist2, index) max-heap of current best k.
  std::vector<std::pair<double, int>> heap;
  double cap2 = max_radius > 0.0 ? max_radius * max_radius
                                 : std::numeric_limits<double>::max();
  auto worst = [&] {
    return heap.size() < static_cast<size_t>(k) ? cap2
                                                : std::min(cap2, heap.front().first);
  };
  std::vector<int> stack{0};
  while (!stack.empty()) {
    int ni = stack.back();
    stack.pop_back();
    const Node& node = nodes_[ni];
    if (node.box.dist2(query) > worst()) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        int p = order_[i];
        if (accept && !accept(p)) continue;
        double d2 = (points_[p] - query).squaredNorm();
        if (d2 > worst()) continue;
        heap.emplace_back(d2, p);
        std::push_heap(heap.begin(), heap.end());
        if (heap.size() > static_cast<size_t>(k)) {
          std::pop_heap(heap.begin(), heap.end());
          heap.pop_back();
        }
      }
      continue;
    }
    stack.push_back(node.left);
    stack.push_back(node.right);
  }
  std::sort_heap(heap.begin(), heap.end());
  std::vector<int> out;
  out.reserve(heap.size());
  for (auto& [d2, p] : heap) out.push_back(p);
  return out;
}

void PointTree::query_radius(const Vec3& center, double radius,
                             const std::function<void(int)>& visit) const {
  double r2 = radius * radius;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    int ni = stack.back();
    stack.pop_back();
    const Node& node = nodes_[ni];
    if (node.box.dist2(center) > r2) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        int p = order_[i];
        if ((points_[p] - center).squaredNorm() <= r2) visit(p);
      }
      continue;
    }
    stack.push_back(node.left);
    stack.push_back(node.right);
  }
}

}  // namespace gx
