#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "graspxfer/geometry.hpp"
#include "graspxfer/grasp_search.hpp"

namespace gx {

struct MappingParams {
  double delta = M_PI / 6.0;  // normal angle bias for map candidacy
  double gamma = -1.0;        // consistency tolerance; <= 0: 2% of source diag
  int k_interp = 5;
  double r_interp_frac = 0.05;  // neighbor radius as a fraction of part diag
  int align_max_iters = 60;
  double align_tol = 1e-10;
};

struct AlignTrace {
  std::vector<double> objective;  // per accepted iteration, non-increasing
};

// Rigid alignment A -> B minimizing sum |Ra + T - b_a|^2 +
// arccos^2(n^{b_a} . R n^a) over nearest neighbors b_a, by normal-agreement
// weighted point registration with guarded acceptance.
Pose rigid_align(const SurfacePointSet& A, const SurfacePointSet& B,
                 int max_iters = 60, double tol = 1e-10,
                 AlignTrace* trace = nullptr);

struct TargetContact {
  Vec3 point;
  Vec3 normal;  // outward target surface normal
};

// Bijective correspondence between a sampled example part A and a sampled
// novel part B: per-point nearest-neighbor maps filtered by normal agreement,
// plus interpolated maps over the continuous surfaces.
class CorrespondenceMapping {
 public:
  CorrespondenceMapping(std::shared_ptr<const Geometry> source_geom,
                        std::shared_ptr<const Geometry> target_geom,
                        SurfacePointSet source, SurfacePointSet target,
                        const MappingParams& params = {});

  const Pose& transform() const { return transform_; }
  const SurfacePointSet& source() const { return source_; }
  const SurfacePointSet& target() const { return target_; }
  const MappingParams& params() const { return params_; }
  double gamma() const { return gamma_; }
  const AlignTrace& align_trace() const { return align_trace_; }

  // Index maps; -1 where undefined (empty candidate set).
  const std::vector<int>& forward() const { return forward_; }
  const std::vector<int>& backward() const { return backward_; }

  std::optional<int> forward_map_point(int a) const;
  std::optional<int> backward_map_point(int b) const;

  // Centroid of the k nearest defined maps, projected to the surface.
  std::optional<Vec3> interp_forward(const Vec3& x) const;
  std::optional<Vec3> interp_backward(const Vec3& y) const;

  bool consistency_check(const Vec3& x) const;

  // Maps every grasp contact through the interpolated forward map; all
  // contacts must pass the consistency check (nullopt otherwise).
  std::optional<std::vector<TargetContact>> map_grasp_contacts(
      const Grasp& grasp) const;

  void save(const std::string& path) const;

 private:
  friend CorrespondenceMapping load_mapping(
      const std::string& path, std::shared_ptr<const Geometry> source_geom,
      std::shared_ptr<const Geometry> target_geom);
  CorrespondenceMapping() = default;
  void build_trees();

  std::shared_ptr<const Geometry> source_geom_;
  std::shared_ptr<const Geometry> target_geom_;
  SurfacePointSet source_;
  SurfacePointSet target_;
  SurfacePointSet source_transformed_;  // R* a + T*, normals rotated
  MappingParams params_;
  Pose transform_;
  double gamma_ = 0.0;
  double r_interp_source_ = 0.0;
  double r_interp_target_ = 0.0;
  std::vector<int> forward_;
  std::vector<int> backward_;
  AlignTrace align_trace_;
};

CorrespondenceMapping load_mapping(const std::string& path,
                                   std::shared_ptr<const Geometry> source_geom,
                                   std::shared_ptr<const Geometry> target_geom);

}  // namespace gx
