#include "graspxfer/collision.hpp"

#include <algorithm>

#include "graspxfer/aabb_tree.hpp"

namespace gx {

namespace {

// ---------------------------------------------------------------------------
// Primitive support geometry in world frame

struct WorldPrimitive {
  PrimitiveType type;
  Vec3 dims;
  Pose pose;
  Mat3 inv_rot;
  Vec3 seg_a, seg_b, seg_mid;  // capsule core (== center for spheres)
  Vec3 core_lo, core_hi;       // axis intervals of the core / box volume
  double seg_half = 0.0;
  double radius = 0.0;

  explicit WorldPrimitive(const PosedPrimitive& p)
      : type(p.shape.type), dims(p.shape.dims), pose(p.pose) {
    inv_rot = pose.rotation.transpose();
    seg_a = pose.translation;
    seg_b = pose.translation;
    if (type == PrimitiveType::Sphere) {
      radius = dims[0];
    } else if (type == PrimitiveType::Capsule) {
      radius = dims[0];
      seg_b = pose.apply(Vec3(0, 0, dims[1]));
    }
    seg_mid = 0.5 * (seg_a + seg_b);
    seg_half = 0.5 * (seg_b - seg_a).norm();
    if (type == PrimitiveType::Box) {
      Aabb b = bounds();
      core_lo = b.lo;
      core_hi = b.hi;
    } else {
      core_lo = seg_a.cwiseMin(seg_b);
      core_hi = seg_a.cwiseMax(seg_b);
    }
  }

  // Lower bound on the distance from the core (or box volume) to any point
  // inside `box`: per-axis interval gaps combine by the same witness pair.
  double core_gap(const Aabb& box) const {
    double acc = 0.0;
    for (int k = 0; k < 3; ++k) {
      double g = std::max({0.0, box.lo[k] - core_hi[k], core_lo[k] - box.hi[k]});
      acc += g * g;
    }
    return std::sqrt(acc);
  }

  Aabb bounds() const {
    Aabb box;
    if (type == PrimitiveType::Box) {
      for (int sx : {-1, 1})
        for (int sy : {-1, 1})
          for (int sz : {-1, 1})
            box.expand(pose.apply(
                Vec3(sx * dims[0], sy * dims[1], sz * dims[2])));
    } else {
      box.expand(seg_a);
      box.expand(seg_b);
      box = box.inflated(radius);
    }
    return box;
  }

  // Signed distance from a world point to the primitive surface
  // (negative inside).
  double signed_distance(const Vec3& p) const {
    if (type == PrimitiveType::Sphere) return (p - seg_a).norm() - radius;
    if (type == PrimitiveType::Capsule) {
      Vec3 ab = seg_b - seg_a;
      double t = ab.squaredNorm() > 0.0
                     ? std::clamp((p - seg_a).dot(ab) / ab.squaredNorm(), 0.0,
                                  1.0)
                     : 0.0;
      return (p - (seg_a + t * ab)).norm() - radius;
    }
    Vec3 local = inv_rot * (p - pose.translation);
    Vec3 q = local.cwiseAbs() - dims;
    double outside = q.cwiseMax(0.0).norm();
    double inside = std::min(q.maxCoeff(), 0.0);
    return outside + inside;
  }
};

// Exact segment-triangle distance with witness points. The minimum is
// either at a segment endpoint, between the segment and a triangle edge
// (Ericson 5.1.9 closest-segment pair), or zero when the segment crosses
// the triangle.
double segment_triangle_dist(const Vec3& a, const Vec3& b, const Vec3& t0,
                             const Vec3& t1, const Vec3& t2, Vec3& seg_point,
                             Vec3& tri_point) {
  // Segment crossing the triangle interior: distance 0.
  Vec3 n = (t1 - t0).cross(t2 - t0);
  double da = n.dot(a - t0), db = n.dot(b - t0);
  if (da * db < 0.0 && n.squaredNorm() > 1e-30) {
    double t = da / (da - db);
    Vec3 p = a + t * (b - a);
    Vec3 cp = closest_point_on_triangle(p, t0, t1, t2);
    if ((cp - p).squaredNorm() < 1e-24) {
      seg_point = p;
      tri_point = cp;
      return 0.0;
    }
  }
  // Otherwise the minimum involves an endpoint or an edge pair.
  double best2 = std::numeric_limits<double>::max();
  auto consider_point = [&](const Vec3& p) {
    Vec3 cp = closest_point_on_triangle(p, t0, t1, t2);
    double d2 = (cp - p).squaredNorm();
    if (d2 < best2) {
      best2 = d2;
      seg_point = p;
      tri_point = cp;
    }
  };
  consider_point(a);
  consider_point(b);
  const Vec3* edges[3][2] = {{&t0, &t1}, {&t1, &t2}, {&t2, &t0}};
  for (auto& e : edges) {
    // Re-derive witness points from the parameters for exactness.
    Vec3 d1 = b - a, d2 = *e[1] - *e[0], r = a - *e[0];
    double aa = d1.squaredNorm(), ee = d2.squaredNorm(), ff = d2.dot(r);
    double s = 0.0, t = 0.0;
    constexpr double kEps = 1e-30;
    if (aa <= kEps && ee <= kEps) {
      s = t = 0.0;
    } else if (aa <= kEps) {
      t = std::clamp(ff / ee, 0.0, 1.0);
    } else {
      double cc = d1.dot(r);
      if (ee <= kEps) {
        s = std::clamp(-cc / aa, 0.0, 1.0);
      } else {
        double bb = d1.dot(d2);
        double denom = aa * ee - bb * bb;
        s = denom > kEps ? std::clamp((bb * ff - cc * ee) / denom, 0.0, 1.0)
                         : 0.0;
        t = (bb * s + ff) / ee;
        if (t < 0.0) {
          t = 0.0;
          s = std::clamp(-cc / aa, 0.0, 1.0);
        } else if (t > 1.0) {
          t = 1.0;
          s = std::clamp((bb - cc) / aa, 0.0, 1.0);
        }
      }
    }
    Vec3 ps = a + s * d1;
    Vec3 pt = *e[0] + t * d2;
    double d2v = (ps - pt).squaredNorm();
    if (d2v < best2) {
      best2 = d2v;
      seg_point = ps;
      tri_point = pt;
    }
  }
  return std::sqrt(best2);
}

// Min of the box signed distance over the triangle (convex over a convex
// domain), by nested barycentric grid refinement. Negative result =
// deepest triangle point inside the box.
double triangle_box_dist(const Vec3& t0, const Vec3& t1, const Vec3& t2,
                         const WorldPrimitive& box, Vec3& tri_point) {
  double best = std::numeric_limits<double>::max();
  double cu = 1.0 / 3.0, cv = 1.0 / 3.0;  // center of current window
  double span = 1.0;
  for (int level = 0; level < 8; ++level) {
    double best_u = cu, best_v = cv;
    for (int i = 0; i <= 4; ++i) {
      for (int j = 0; j + i <= 4; ++j) {
        double u = cu + span * (i / 4.0 - 0.5);
        double v = cv + span * (j / 4.0 - 0.5);
        u = std::clamp(u, 0.0, 1.0);
        v = std::clamp(v, 0.0, 1.0 - u);
        Vec3 p = (1.0 - u - v) * t0 + u * t1 + v * t2;
        double d = box.signed_distance(p);
        if (d < best) {
          best = d;
          best_u = u;
          best_v = v;
          tri_point = p;
        }
      }
    }
    cu = best_u;
    cv = best_v;
    span *= 0.4;
  }
  return best;
}

}  // namespace

// Akenine-Moller separating-axis test, box centered at origin.
bool box_triangle_overlap(const Vec3& half, const Vec3& a, const Vec3& b,
                          const Vec3& c) {
  Vec3 v0 = a, v1 = b, v2 = c;
  Vec3 e0 = v1 - v0, e1 = v2 - v1, e2 = v0 - v2;

  auto axis_test = [&](const Vec3& axis) {
    double p0 = axis.dot(v0), p1 = axis.dot(v1), p2 = axis.dot(v2);
    double r = half[0] * std::abs(axis[0]) + half[1] * std::abs(axis[1]) +
               half[2] * std::abs(axis[2]);
    double lo = std::min({p0, p1, p2}), hi = std::max({p0, p1, p2});
    return !(lo > r || hi < -r);
  };

  for (int i = 0; i < 3; ++i) {
    double lo = std::min({v0[i], v1[i], v2[i]});
    double hi = std::max({v0[i], v1[i], v2[i]});
    if (lo > half[i] || hi < -half[i]) return false;
  }
  Vec3 n = e0.cross(e1);
  if (!axis_test(n)) return false;
  const Vec3 axes[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  for (const Vec3& u : axes)
    for (const Vec3* e : {&e0, &e1, &e2}) {
      Vec3 cross = u.cross(*e);
      if (cross.squaredNorm() > 1e-24 && !axis_test(cross)) return false;
    }
  return true;
}

namespace {

double clearance_mesh(const WorldPrimitive& prim, const TriangleMesh& mesh,
                      SurfaceHit* witness) {
  const AabbTree& tree = mesh.tree();
  const bool is_box = prim.type == PrimitiveType::Box;

  // Best-first search for the nearest triangle. For spheres/capsules the
  // objective is the unsigned core distance (sign resolved at the argmin
  // triangle); for boxes it is the signed box distance minimized over the
  // triangle, which is volume-correct on its own.
  Vec3 best_point = Vec3::Zero();
  Vec3 best_seg_point = Vec3::Zero();
  int best_tri = -1;
  double half_diag = is_box ? prim.dims.norm() : 0.0;

  std::function<double(const Aabb&)> node_bound;
  std::function<void(int, double&)> leaf;
  if (is_box) {
    const double min_half = prim.dims.minCoeff();
    node_bound = [&, min_half](const Aabb& box) {
      double gap = prim.core_gap(box);
      return gap > 0.0 ? gap : -min_half;
    };
    leaf = [&](int t, double& best) {
      const auto& tri = mesh.triangles[t];
      const Vec3& t0 = mesh.vertices[tri[0]];
      const Vec3& t1 = mesh.vertices[tri[1]];
      const Vec3& t2 = mesh.vertices[tri[2]];
      // Cheap reject against the current best.
      double lb = std::min({(t0 - prim.pose.translation).norm(),
                            (t1 - prim.pose.translation).norm(),
                            (t2 - prim.pose.translation).norm()}) -
                  half_diag;
      Vec3 cp = closest_point_on_triangle(prim.pose.translation, t0, t1, t2);
      lb = std::min(lb, (cp - prim.pose.translation).norm() - half_diag);
      if (lb >= best) return;
      Vec3 tp;
      double d = triangle_box_dist(t0, t1, t2, prim, tp);
      if (d < best) {
        best = d;
        best_point = tp;
        best_tri = t;
      }
    };
  } else {
    node_bound = [&](const Aabb& box) { return prim.core_gap(box); };
    leaf = [&](int t, double& best) {
      const auto& tri = mesh.triangles[t];
      Vec3 sp, tp;
      double d = segment_triangle_dist(prim.seg_a, prim.seg_b,
                                       mesh.vertices[tri[0]],
                                       mesh.vertices[tri[1]],
                                       mesh.vertices[tri[2]], sp, tp);
      if (d < best) {
        best = d;
        best_point = tp;
        best_seg_point = sp;
        best_tri = t;
      }
    };
  }
  double best = tree.minimize(node_bound, leaf,
                              std::numeric_limits<double>::max());

  double clearance;
  if (is_box) {
    clearance = best;
  } else if (best <= 1e-12) {
    clearance = -prim.radius;  // core crosses the surface
  } else {
    double side =
        (best_seg_point - best_point).dot(mesh.face_normal(best_tri));
    clearance = (side >= 0.0 ? best : -best) - prim.radius;
  }

  if (witness && best_tri >= 0) {
    witness->point = best_point;
    witness->normal = interpolated_normal(mesh, best_tri, best_point);
    witness->distance = std::abs(clearance);
  }
  return clearance;
}

double point_segment_dist(const Vec3& p, const Vec3& a, const Vec3& b) {
  Vec3 ab = b - a;
  double t = ab.squaredNorm() > 0.0
                 ? std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0)
                 : 0.0;
  return (p - (a + t * ab)).norm();
}

double clearance_cloud(const WorldPrimitive& prim, const SurfacePointSet& cloud,
                       SurfaceHit* witness) {
  const PointTree& tree = cloud.tree();
  double best = std::numeric_limits<double>::max();
  int best_idx = -1;
  if (prim.type == PrimitiveType::Sphere ||
      prim.type == PrimitiveType::Capsule) {
    for (const Vec3& probe : {prim.seg_a, prim.seg_mid, prim.seg_b}) {
      int idx = tree.nearest(probe);
      if (idx >= 0) {
        double d = point_segment_dist(cloud.points[idx], prim.seg_a,
                                      prim.seg_b) - prim.radius;
        if (d < best) {
          best = d;
          best_idx = idx;
        }
      }
    }
    // Exhaustive pass over candidates within the refined bound.
    double bound = best + prim.radius + prim.seg_half + 1e-9;
    tree.query_radius(prim.seg_mid, bound, [&](int idx) {
      double d = point_segment_dist(cloud.points[idx], prim.seg_a,
                                    prim.seg_b) - prim.radius;
      if (d < best) {
        best = d;
        best_idx = idx;
      }
    });
  } else {
    double bound_r = prim.dims.norm();
    int idx = tree.nearest(prim.pose.translation);
    if (idx >= 0) {
      best = prim.signed_distance(cloud.points[idx]);
      best_idx = idx;
    }
    double bound = std::max(0.0, best) + bound_r + 1e-9;
    tree.query_radius(prim.pose.translation, bound, [&](int i) {
      double d = prim.signed_distance(cloud.points[i]);
      if (d < best) {
        best = d;
        best_idx = i;
      }
    });
  }
  if (witness && best_idx >= 0) {
    witness->point = cloud.points[best_idx];
    witness->normal = cloud.normals[best_idx];
    witness->distance = std::abs(best);
  }
  return best;
}

}  // namespace

double primitive_clearance(const PosedPrimitive& prim, const Geometry& object,
                           SurfaceHit* witness) {
  WorldPrimitive wp(prim);
  if (object.is_mesh()) return clearance_mesh(wp, object.mesh(), witness);
  return clearance_cloud(wp, object.cloud(), witness);
}

CollisionResult check_collision(const std::vector<PosedPrimitive>& links,
                                const Geometry& object) {
  CollisionResult result;
  if (object.empty()) return result;
  for (const auto& link : links) {
    SurfaceHit witness;
    double clearance = primitive_clearance(link, object, &witness);
    if (clearance < 0.0) {
      result.in_collision = true;
      ContactEvent ev;
      ev.point = witness.point;
      ev.normal_object = witness.normal;
      ev.link_id = link.link_id;
      ev.penetration_depth = -clearance;
      result.contacts.push_back(ev);
    }
  }
  return result;
}

}  // namespace gx
