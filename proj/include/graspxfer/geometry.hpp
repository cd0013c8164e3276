#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "graspxfer/common.hpp"

namespace gx {

class AabbTree;
class PointTree;

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::max());

  void expand(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void expand(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 extent() const { return hi - lo; }
  double diagonal() const { return (hi - lo).norm(); }
  Aabb inflated(double margin) const {
    return {lo.array() - margin, hi.array() + margin};
  }
  // Squared distance from p to the box (0 inside).
  double dist2(const Vec3& p) const {
    Vec3 d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
    return d.squaredNorm();
  }
};

// Indexed triangle mesh, units are meters. Vertex normals are derived from
// area-weighted face normals; triangle winding is assumed outward.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Vec3> vertex_normals;

  Vec3 face_normal(int t) const;
  double face_area(int t) const;
  Vec3 face_centroid(int t) const;
  double total_area() const;
  Aabb bounds() const;
  // Area-weighted surface centroid.
  Vec3 surface_centroid() const;

  // Drops zero-area triangles, recomputes vertex normals, validates indices.
  // Throws ParseError on an out-of-range index.
  void finalize();

  const AabbTree& tree() const;

 private:
  mutable std::shared_ptr<AabbTree> tree_;
};

// Oriented point cloud; points and normals are index-aligned.
struct SurfacePointSet {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;

  size_t size() const { return points.size(); }
  Aabb bounds() const;
  Vec3 centroid() const;

  const PointTree& tree() const;

 private:
  mutable std::shared_ptr<PointTree> tree_;
};

struct SurfaceHit {
  Vec3 point;
  Vec3 normal;  // outward, unit
  double distance = 0.0;
};

// A mesh or a point cloud behind one query surface. Contact, mapping and
// collision code does not branch on the representation.
class Geometry {
 public:
  Geometry() = default;
  explicit Geometry(TriangleMesh mesh) : rep_(std::move(mesh)) {}
  explicit Geometry(SurfacePointSet cloud) : rep_(std::move(cloud)) {}

  bool is_mesh() const { return std::holds_alternative<TriangleMesh>(rep_); }
  const TriangleMesh& mesh() const { return std::get<TriangleMesh>(rep_); }
  const SurfacePointSet& cloud() const {
    return std::get<SurfacePointSet>(rep_);
  }

  bool empty() const;
  Aabb bounds() const;
  // Area-weighted surface centroid for meshes, point centroid for clouds.
  Vec3 center_of_mass() const;
  // Largest distance from `origin` to the surface.
  double max_radius_about(const Vec3& origin) const;

  SurfaceHit closest_surface_point(const Vec3& query) const;

  // Builds the spatial index now; construction is single-owner, queries
  // afterwards are concurrent-safe.
  void ensure_accelerators() const;

  // Uniform surface samples; for clouds a deterministic subsample (or the
  // full cloud when n >= size).
  SurfacePointSet sample_points(int n, uint64_t seed) const;

 private:
  std::variant<std::monostate, TriangleMesh, SurfacePointSet> rep_;
};

// Geometry plus a per-face (mesh) or per-point (cloud) part labeling.
// Labels are compacted to 0..num_parts-1 in first-appearance order.
struct SegmentedObject {
  Geometry geometry;
  std::vector<int> labels;
  std::vector<Geometry> parts;

  int num_parts() const { return static_cast<int>(parts.size()); }
};

enum class GeometryKind { Mesh, PointCloud };

// OBJ or ascii PLY mesh; ascii PLY or whitespace xyz+normal cloud.
Geometry load_object(const std::string& path, GeometryKind kind);

TriangleMesh load_mesh(const std::string& path);
SurfacePointSet load_point_cloud(const std::string& path);

void save_point_cloud_xyz(const SurfacePointSet& cloud,
                          const std::string& path);

// Area-uniform sampling: triangle by area, then uniform barycentric.
// Normals are interpolated from vertex normals and renormalized.
SurfacePointSet sample_surface_points(const TriangleMesh& mesh, int n,
                                      uint64_t seed);

// Unit normal at a point on triangle `tri`, barycentric-interpolated from
// vertex normals.
Vec3 interpolated_normal(const TriangleMesh& mesh, int tri, const Vec3& point);

struct SdfParams {
  int rays_per_face = 24;
  double cone_half_angle = M_PI / 6.0;
  uint64_t seed = 0;
};

// Per-face shape-diameter values: robust mean of inward ray-hit distances
// inside a cone about the inward normal.
std::vector<double> shape_diameter_values(const TriangleMesh& mesh,
                                          const SdfParams& params);

// SDF segmentation: 1D k-means over per-face SDF, connected-component
// cleanup, minor components merged into the neighbor with the longest
// shared boundary.
SegmentedObject segment_by_sdf(const TriangleMesh& mesh, int num_parts,
                               const SdfParams& params);

// Label file: one integer per line, line i labels face/point i.
SegmentedObject load_segmentation(Geometry geometry, const std::string& path);
SegmentedObject make_segmented(Geometry geometry, std::vector<int> labels);
void save_segmentation(const std::vector<int>& labels,
                       const std::string& path);

}  // namespace gx
