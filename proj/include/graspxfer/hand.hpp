#pragma once

#include <optional>
#include <string>
#include <vector>

#include "graspxfer/collision.hpp"
#include "graspxfer/geometry.hpp"

namespace gx {

enum class DofRole { Spread, Flex, Aux };

// One actuated degree of freedom with its limits. Coupled joints reference a
// dof through Joint::master_dof and do not appear here.
struct Dof {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  DofRole role = DofRole::Flex;
};

struct Joint {
  bool fixed = true;
  Vec3 axis = Vec3::UnitZ();   // in the link frame, after the fixed transform
  int dof = -1;                // index into HandModel::dofs, or -1
  int master_dof = -1;         // coupled: angle = ratio * joints[master_dof]
  double ratio = 1.0;
};

struct Link {
  std::string name;
  int parent = -1;  // root has -1; parents precede children
  ConvexPrimitive shape;
  Pose fixed_transform;  // parent frame -> joint frame
  Joint joint;
};

struct PredefinedPoint {
  int link = 0;
  Vec3 position;  // link frame, on the primitive surface
  Vec3 normal;    // link frame, outward from the primitive, unit
};

// Palm pose plus the independent joint vector.
struct HandConfiguration {
  Pose palm_pose;
  VecX joints;
};

struct FkResult {
  std::vector<Pose> link_poses;
  std::vector<PosedPrimitive> links;
  std::vector<Vec3> points;         // predefined points, world
  std::vector<Vec3> point_normals;  // unit, world
};

// Kinematic tree rooted at the palm, with joint limits and predefined
// surface points. Immutable after load.
class HandModel {
 public:
  std::string name;
  std::vector<Link> links;
  std::vector<Dof> dofs;
  std::vector<PredefinedPoint> points;

  int dof_count() const { return static_cast<int>(dofs.size()); }

  // Tree shape, limit ordering, and on-surface predefined points (1e-6 m).
  // Throws InvalidArgument on violation.
  void validate() const;

  double joint_angle(int link_index, const VecX& joints) const;
  FkResult forward_kinematics(const HandConfiguration& config) const;

  // Conservative bound on the distance from the palm origin to any link
  // surface point over all configurations.
  double max_reach() const;

  // Links driven by a flex dof, palm-outward order; one entry per finger.
  struct Finger {
    int dof = -1;
    std::vector<int> links;
  };
  const std::vector<Finger>& fingers() const { return fingers_; }
  void build_fingers();

  HandConfiguration rest_configuration() const;

 private:
  std::vector<Finger> fingers_;
};

HandModel load_hand(const std::string& path);
HandModel parse_hand(const std::string& text);

// Three-fingered model: one spread dof coupling two fingers, one flex dof
// per finger with distal coupling ratio 0.42, 13 predefined points.
HandModel make_default_hand();
std::string default_hand_text();

enum class LimitMode { Clamp, Reject };

// Clamp returns the nearest in-limits configuration; Reject throws
// InvalidArgument naming the offending joint.
HandConfiguration validate_configuration(const HandModel& hand,
                                         const HandConfiguration& config,
                                         LimitMode mode);

// Straight-line interpolation: translation lerp, rotation slerp, joints lerp.
HandConfiguration interpolate_configuration(const HandConfiguration& from,
                                            const HandConfiguration& to,
                                            double t);

struct CcdParams {
  double eps = 1e-3;        // resolution, interpolation-parameter units
  double scan_step = 1.0 / 64.0;  // normalized c-space pre-scan spacing
  int max_scan = 512;
};

// Earliest t in [0,1] at which any link first touches the object, none when
// the segment is free. config_from must be collision-free (InvalidArgument
// otherwise). The returned t satisfies: config(t - eps) is collision-free
// whenever t > eps. link_filter, when non-empty, restricts the moving links.
std::optional<double> continuous_contact_toi(
    const HandModel& hand, const HandConfiguration& config_from,
    const HandConfiguration& config_to, const Geometry& object,
    const CcdParams& params = {}, const std::vector<int>& link_filter = {});

struct CloseResult {
  HandConfiguration config;
  std::vector<ContactEvent> contacts;
};

// Advances each finger's flex dof toward its upper limit (coupled joints
// follow), stopping at first object contact; spread is frozen. Contacts are
// reported per touching link, palm included. The final configuration never
// penetrates beyond kContactTol.
CloseResult close_fingers(const HandModel& hand,
                          const HandConfiguration& config,
                          const Geometry& object);

// Penetration tolerance shared by closing, replanning and assembly checks.
inline constexpr double kContactTol = 1e-4;
// Links within this clearance of the surface count as touching.
inline constexpr double kContactCaptureTol = 1e-3;

}  // namespace gx
