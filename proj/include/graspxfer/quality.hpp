#pragma once

#include <vector>

#include "graspxfer/geometry.hpp"

namespace gx {

// Hard point contact with Coulomb friction. The normal is the unit inward
// force direction (into the object surface).
struct Contact {
  Vec3 position;
  Vec3 normal;
  double friction_mu = 0.8;
};

struct GraspQuality {
  double epsilon = 0.0;  // 0 <=> not force closure; <= 1
  bool force_closure = false;
  int wrench_count = 0;
};

struct MeasureWeights {
  double w1 = 0.02;
  double w2 = 1.0;
  double w3 = 20.0;
};

struct QualityParams {
  int cone_edges = 8;
  double torque_scale = 1.0;  // lambda, meters; <= 0 means auto from contacts
  Vec3 center_of_mass = Vec3::Zero();
};

// Linearized Coulomb cone at one contact: m edge forces with unit normal
// component, each mapped to the 6d wrench (f, (r x f) / lambda) with
// r = position - center_of_mass. mu = 0 collapses all edges to the normal
// force. Throws InvalidArgument when m < 3 or lambda <= 0.
std::vector<Eigen::Matrix<double, 6, 1>> friction_cone_primitives(
    const Contact& contact, int m, double torque_scale,
    const Vec3& center_of_mass);

// Distance from the wrench-space origin to the hull boundary of all cone
// primitives when the origin is strictly interior; 0 otherwise. With
// torque_scale <= 0, lambda = max lever arm over the contacts.
GraspQuality epsilon_quality(const std::vector<Contact>& contacts,
                             const QualityParams& params = {});

// Floor applied to epsilon inside logarithmic quality terms so objectives
// stay finite for non-force-closure candidates.
inline constexpr double kEpsilonFloor = 1e-6;

// Hand-to-surface fitting plus wrench quality:
//   sum_i [ w1 |p_i - c_i| + w2 (1 - n_i . (p_i - c_i)/|p_i - c_i|) ]
//     + w3 log10(1 / max(epsilon, floor))
// with c_i the closest surface point to p_i. The direction term is 0 when
// |p_i - c_i| < 1e-9. Lower is better.
double hybrid_grasp_measure(const std::vector<Vec3>& hand_points,
                            const std::vector<Vec3>& hand_point_normals,
                            const Geometry& object, const GraspQuality& quality,
                            const MeasureWeights& weights);

}  // namespace gx
