#pragma once

#include <optional>
#include <vector>

#include "graspxfer/geometry.hpp"

namespace gx {

enum class PrimitiveType { Sphere, Capsule, Box };

// Convex link volume in its local frame. Sphere: radius = dims[0].
// Capsule: radius = dims[0], segment from origin to (0,0,dims[1]).
// Box: half extents (dims[0], dims[1], dims[2]) about the origin.
struct ConvexPrimitive {
  PrimitiveType type = PrimitiveType::Sphere;
  Vec3 dims = Vec3::Zero();
};

struct PosedPrimitive {
  ConvexPrimitive shape;
  Pose pose;      // local -> world
  int link_id = 0;
};

struct ContactEvent {
  Vec3 point;          // on the object surface
  Vec3 normal_object;  // outward from the object, unit
  int link_id = -1;
  double penetration_depth = 0.0;  // >= 0
};

struct CollisionResult {
  bool in_collision = false;
  // Deepest penetration per colliding link.
  std::vector<ContactEvent> contacts;
};

// Signed clearance between a primitive and the object surface: negative
// inside (= -penetration), positive outside (= separation). `witness` is the
// closest/deepest object surface point.
double primitive_clearance(const PosedPrimitive& prim, const Geometry& object,
                           SurfaceHit* witness = nullptr);

// Volume overlap test: a link collides with a mesh when it intersects the
// surface, and with a cloud when it contains points.
CollisionResult check_collision(const std::vector<PosedPrimitive>& links,
                                const Geometry& object);

bool box_triangle_overlap(const Vec3& half, const Vec3& a, const Vec3& b,
                          const Vec3& c);  // box centered at origin

}  // namespace gx
