#include "graspxfer/quality.hpp"

#include <algorithm>

#include "graspxfer/hull.hpp"

namespace gx {

using Wrench = Eigen::Matrix<double, 6, 1>;

std::vector<Wrench> friction_cone_primitives(const Contact& contact, int m,
                                             double torque_scale,
                                             const Vec3& center_of_mass) {
  if (m < 3) throw InvalidArgument("friction cone needs m >= 3 edges");
  if (torque_scale <= 0.0)
    throw InvalidArgument("torque_scale must be positive");
  Vec3 n = contact.normal.normalized();
  Vec3 t1, t2;
  tangent_basis(n, t1, t2);
  Vec3 r = contact.position - center_of_mass;
  std::vector<Wrench> out;
  out.reserve(m);
  for (int j = 0; j < m; ++j) {
    double phi = 2.0 * M_PI * j / m;
    // Unit normal component: the cone edge makes angle atan(mu) with n.
    Vec3 f = n + contact.friction_mu * (std::cos(phi) * t1 + std::sin(phi) * t2);
    Wrench w;
    w.head<3>() = f;
    w.tail<3>() = r.cross(f) / torque_scale;
    out.push_back(w);
  }
  return out;
}

GraspQuality epsilon_quality(const std::vector<Contact>& contacts,
                             const QualityParams& params) {
  GraspQuality q;
  if (contacts.empty()) return q;

  double lambda = params.torque_scale;
  if (lambda <= 0.0) {
    for (const auto& c : contacts)
      lambda = std::max(lambda, (c.position - params.center_of_mass).norm());
    if (lambda <= 0.0) lambda = 1.0;
  }

  std::vector<VecX> wrenches;
  for (const auto& c : contacts) {
    for (const auto& w :
         friction_cone_primitives(c, params.cone_edges, lambda,
                                  params.center_of_mass)) {
      // Collapsed cones (mu = 0) produce duplicates; drop them.
      bool dup = false;
      for (const auto& existing : wrenches)
        if ((existing - w).norm() < 1e-12) {
          dup = true;
          break;
        }
      if (!dup) wrenches.push_back(w);
    }
  }
  q.wrench_count = static_cast<int>(wrenches.size());

  if (wrenches.size() < 7 || affine_rank(wrenches, 1e-9) < 6) return q;

  ConvexHullND hull(wrenches);
  if (hull.degenerate()) return q;
  double eps = hull.min_origin_offset();
  if (eps <= 1e-9) return q;  // origin on or outside the boundary
  q.epsilon = std::min(eps, 1.0);
  q.force_closure = true;
  return q;
}

double hybrid_grasp_measure(const std::vector<Vec3>& hand_points,
                            const std::vector<Vec3>& hand_point_normals,
                            const Geometry& object, const GraspQuality& quality,
                            const MeasureWeights& weights) {
  if (hand_points.empty())
    throw InvalidArgument("hybrid_grasp_measure: no hand points");
  if (hand_points.size() != hand_point_normals.size())
    throw InvalidArgument("hybrid_grasp_measure: point/normal size mismatch");
  double fit = 0.0;
  for (size_t i = 0; i < hand_points.size(); ++i) {
    SurfaceHit hit = object.closest_surface_point(hand_points[i]);
    Vec3 delta = hand_points[i] - hit.point;
    double dist = delta.norm();
    fit += weights.w1 * dist;
    if (dist >= 1e-9)
      fit += weights.w2 * (1.0 - hand_point_normals[i].dot(delta / dist));
  }
  double eps = std::max(quality.epsilon, kEpsilonFloor);
  return fit + weights.w3 * std::log10(1.0 / eps);
}

}  // namespace gx
