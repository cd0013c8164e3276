#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "graspxfer/geometry.hpp"

namespace gx {

// Closest point on triangle (a,b,c) to p. Ericson, Real-Time Collision
// Detection, 5.1.5.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c);

struct RayHit {
  double t = 0.0;
  int triangle = -1;
  Vec3 point;
};

// Median-split AABB tree over mesh triangles. Read-only after build.
class AabbTree {
 public:
  explicit AabbTree(const TriangleMesh& mesh);

  const Aabb& root_bounds() const { return nodes_[0].box; }

  struct ClosestResult {
    Vec3 point;
    int triangle = -1;
    double dist2 = std::numeric_limits<double>::max();
  };
  ClosestResult closest_point(const Vec3& query) const;

  // First hit along the ray with t in (t_min, t_max).
  std::optional<RayHit> raycast(const Vec3& origin, const Vec3& dir,
                                double t_min, double t_max) const;

  // Visits triangle indices whose AABB intersects `box`.
  void query_box(const Aabb& box, const std::function<void(int)>& visit) const;

  // Best-first minimization: node_bound returns a lower bound of the leaf
  // objective inside the node's box; subtrees with bound >= best are pruned.
  // leaf_visit may lower `best`. Returns the final best.
  double minimize(const std::function<double(const Aabb&)>& node_bound,
                  const std::function<void(int, double&)>& leaf_visit,
                  double init_best) const;

 private:
  struct Node {
    Aabb box;
    int left = -1;   // -1 for leaves
    int right = -1;
    int begin = 0;   // leaf triangle range in order_
    int end = 0;
  };

  int build(int begin, int end, int depth);

  const TriangleMesh& mesh_;
  std::vector<Node> nodes_;
  std::vector<int> order_;
  std::vector<Vec3> centroids_;
};

// Same structure over points, for nearest-neighbor queries.
class PointTree {
 public:
  explicit PointTree(const std::vector<Vec3>& points);

  // Nearest point index passing `accept` (nullptr accepts all); -1 if none.
  int nearest(const Vec3& query,
              const std::function<bool(int)>& accept = nullptr) const;

  // Indices of the k nearest points passing `accept`, closest first,
  // restricted to within `max_radius` when positive.
  std::vector<int> k_nearest(const Vec3& query, int k,
                             double max_radius = -1.0,
                             const std::function<bool(int)>& accept =
                                 nullptr) const;

  // Visits every point index within `radius` of `center`.
  void query_radius(const Vec3& center, double radius,
                    const std::function<void(int)>& visit) const;

 private:
  struct Node {
    Aabb box;
    int left = -1;
    int right = -1;
    int begin = 0;
    int end = 0;
  };

  int build(int begin, int end, int depth);

  std::vector<Vec3> points_;
  std::vector<Node> nodes_;
  std::vector<int> order_;
};

}  // namespace gx
