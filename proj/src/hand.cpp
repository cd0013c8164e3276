#include "graspxfer/hand.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace gx {

namespace {

Mat3 rpy_matrix(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
          Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

// Signed distance of a local-frame point to the primitive surface.
double primitive_sdf_local(const ConvexPrimitive& shape, const Vec3& p) {
  switch (shape.type) {
    case PrimitiveType::Sphere:
      return p.norm() - shape.dims[0];
    case PrimitiveType::Capsule: {
      double t = std::clamp(p.z(), 0.0, shape.dims[1]);
      return (p - Vec3(0, 0, t)).norm() - shape.dims[0];
    }
    case PrimitiveType::Box: {
      Vec3 q = p.cwiseAbs() - shape.dims;
      return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
    }
  }
  return 0.0;
}

constexpr double kTouchEps = 1e-5;   // "already touching" clearance
constexpr double kTouchBand = 1e-5;  // closing stop band above the surface

}  // namespace

void HandModel::validate() const {
  if (links.empty()) throw InvalidArgument("hand has no links");
  if (links[0].parent != -1)
    throw InvalidArgument("first link must be the palm root");
  for (size_t i = 1; i < links.size(); ++i)
    if (links[i].parent < 0 || links[i].parent >= static_cast<int>(i))
      throw InvalidArgument("link '" + links[i].name +
                            "': parent must precede it");
  for (const auto& dof : dofs)
    if (!(dof.lower < dof.upper))
      throw InvalidArgument("joint '" + dof.name + "': lower >= upper limit");
  for (const auto& link : links) {
    const Joint& j = link.joint;
    if (!j.fixed && j.dof < 0 && j.master_dof < 0)
      throw InvalidArgument("link '" + link.name + "': joint without dof");
    if (j.dof >= static_cast<int>(dofs.size()) ||
        j.master_dof >= static_cast<int>(dofs.size()))
      throw InvalidArgument("link '" + link.name + "': dof out of range");
  }
  for (const auto& pt : points) {
    if (pt.link < 0 || pt.link >= static_cast<int>(links.size()))
      throw InvalidArgument("predefined point references missing link");
    const ConvexPrimitive& shape = links[pt.link].shape;
    if (std::abs(primitive_sdf_local(shape, pt.position)) > 1e-6)
      throw InvalidArgument("predefined point not on link '" +
                            links[pt.link].name + "' surface");
    if (std::abs(pt.normal.norm() - 1.0) > 1e-9)
      throw InvalidArgument("predefined point normal not unit length");
    // Outward check: stepping along the normal must leave the volume.
    if (primitive_sdf_local(shape, pt.position + 1e-5 * pt.normal) <= 0.0)
      throw InvalidArgument("predefined point normal points inward on '" +
                            links[pt.link].name + "'");
  }
}

double HandModel::joint_angle(int link_index, const VecX& joints) const {
  const Joint& j = links[link_index].joint;
  if (j.fixed) return 0.0;
  if (j.dof >= 0) return joints[j.dof];
  return j.ratio * joints[j.master_dof];
}

FkResult HandModel::forward_kinematics(const HandConfiguration& config) const {
  if (config.joints.size() != dof_count())
    throw InvalidArgument("joint vector has " +
                          std::to_string(config.joints.size()) +
                          " entries, hand has " + std::to_string(dof_count()));
  FkResult out;
  out.link_poses.resize(links.size());
  out.links.reserve(links.size());
  for (size_t i = 0; i < links.size(); ++i) {
    const Link& link = links[i];
    Pose parent =
        link.parent < 0 ? config.palm_pose : out.link_poses[link.parent];
    Pose frame = parent.compose(link.fixed_transform);
    double angle = joint_angle(static_cast<int>(i), config.joints);
    if (!link.joint.fixed && angle != 0.0) {
      Mat3 rot =
          Eigen::AngleAxisd(angle, link.joint.axis).toRotationMatrix();
      frame.rotation = frame.rotation * rot;
    }
    out.link_poses[i] = frame;
    out.links.push_back({link.shape, frame, static_cast<int>(i)});
  }
  out.points.reserve(points.size());
  out.point_normals.reserve(points.size());
  for (const auto& pt : points) {
    const Pose& frame = out.link_poses[pt.link];
    out.points.push_back(frame.apply(pt.position));
    out.point_normals.push_back(frame.rotate(pt.normal));
  }
  return out;
}

double HandModel::max_reach() const {
  std::vector<double> chain(links.size(), 0.0);
  double reach = 0.0;
  for (size_t i = 0; i < links.size(); ++i) {
    const Link& link = links[i];
    double base = link.parent < 0 ? 0.0 : chain[link.parent];
    chain[i] = base + link.fixed_transform.translation.norm();
    double extent = 0.0;
    switch (link.shape.type) {
      case PrimitiveType::Sphere:
        extent = link.shape.dims[0];
        break;
      case PrimitiveType::Capsule:
        extent = link.shape.dims[1] + link.shape.dims[0];
        break;
      case PrimitiveType::Box:
        extent = link.shape.dims.norm();
        break;
    }
    reach = std::max(reach, chain[i] + extent);
  }
  return reach;
}

void HandModel::build_fingers() {
  fingers_.clear();
  // A finger = a flex dof plus every link whose chain passes its driven link.
  std::vector<int> driven(dofs.size(), -1);
  for (size_t i = 0; i < links.size(); ++i) {
    int d = links[i].joint.dof;
    if (d >= 0 && dofs[d].role == DofRole::Flex) driven[d] = static_cast<int>(i);
  }
  for (size_t d = 0; d < dofs.size(); ++d) {
    if (dofs[d].role != DofRole::Flex || driven[d] < 0) continue;
    Finger f;
    f.dof = static_cast<int>(d);
    for (size_t i = 0; i < links.size(); ++i) {
      int cur = static_cast<int>(i);
      while (cur >= 0) {
        if (cur == driven[d]) {
          f.links.push_back(static_cast<int>(i));
          break;
        }
        cur = links[cur].parent;
      }
    }
    fingers_.push_back(std::move(f));
  }
}

HandConfiguration HandModel::rest_configuration() const {
  HandConfiguration c;
  c.joints = VecX::Zero(dof_count());
  for (int d = 0; d < dof_count(); ++d)
    c.joints[d] = std::clamp(0.0, dofs[d].lower, dofs[d].upper);
  return c;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

double to_double(const std::string& tok, const std::string& ctx) {
  try {
    size_t pos;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError("hand file: bad number '" + tok + "' in " + ctx);
  }
}

}  // namespace

HandModel parse_hand(const std::string& text) {
  HandModel hand;
  std::map<std::string, int> link_index;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string ctx = "line " + std::to_string(line_no);
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    if (tok[0] == "hand") {
      if (tok.size() < 2) throw ParseError("hand file: missing name, " + ctx);
      hand.name = tok[1];
      continue;
    }
    if (tok[0] == "link") {
      size_t i = 1;
      auto need = [&](size_t n) {
        if (i + n > tok.size())
          throw ParseError("hand file: truncated link, " + ctx);
      };
      need(2);
      Link link;
      link.name = tok[i++];
      std::string parent = tok[i++];
      if (parent != "-") {
        auto it = link_index.find(parent);
        if (it == link_index.end())
          throw ParseError("hand file: unknown parent '" + parent + "', " +
                           ctx);
        link.parent = it->second;
      }
      need(1);
      std::string shape = tok[i++];
      if (shape == "sphere") {
        need(1);
        link.shape = {PrimitiveType::Sphere,
                      Vec3(to_double(tok[i], ctx), 0, 0)};
        i += 1;
      } else if (shape == "capsule") {
        need(2);
        link.shape = {PrimitiveType::Capsule,
                      Vec3(to_double(tok[i], ctx), to_double(tok[i + 1], ctx),
                           0)};
        i += 2;
      } else if (shape == "box") {
        need(3);
        link.shape = {PrimitiveType::Box,
                      Vec3(to_double(tok[i], ctx), to_double(tok[i + 1], ctx),
                           to_double(tok[i + 2], ctx))};
        i += 3;
      } else {
        throw ParseError("hand file: unknown shape '" + shape + "', " + ctx);
      }
      while (i < tok.size()) {
        if (tok[i] == "origin") {
          need(4);
          link.fixed_transform.translation =
              Vec3(to_double(tok[i + 1], ctx), to_double(tok[i + 2], ctx),
                   to_double(tok[i + 3], ctx));
          i += 4;
        } else if (tok[i] == "rpy") {
          need(4);
          link.fixed_transform.rotation =
              rpy_matrix(to_double(tok[i + 1], ctx),
                         to_double(tok[i + 2], ctx),
                         to_double(tok[i + 3], ctx));
          i += 4;
        } else if (tok[i] == "joint") {
          ++i;
          link.joint.fixed = false;
          while (i < tok.size()) {
            if (tok[i] == "axis") {
              need(4);
              link.joint.axis = Vec3(to_double(tok[i + 1], ctx),
                                     to_double(tok[i + 2], ctx),
                                     to_double(tok[i + 3], ctx))
                                    .normalized();
              i += 4;
            } else if (tok[i] == "limits") {
              need(3);
              Dof dof;
              dof.name = link.name;
              dof.lower = to_double(tok[i + 1], ctx);
              dof.upper = to_double(tok[i + 2], ctx);
              i += 3;
              if (i < tok.size() && tok[i] == "role") {
                need(2);
                std::string role = tok[i + 1];
                if (role == "spread")
                  dof.role = DofRole::Spread;
                else if (role == "flex")
                  dof.role = DofRole::Flex;
                else if (role == "aux")
                  dof.role = DofRole::Aux;
                else
                  throw ParseError("hand file: unknown role '" + role +
                                   "', " + ctx);
                i += 2;
              }
              link.joint.dof = static_cast<int>(hand.dofs.size());
              hand.dofs.push_back(dof);
            } else if (tok[i] == "couple") {
              need(3);
              auto it = link_index.find(tok[i + 1]);
              if (it == link_index.end())
                throw ParseError("hand file: unknown master link '" +
                                 tok[i + 1] + "', " + ctx);
              int master = hand.links[it->second].joint.dof;
              if (master < 0)
                throw ParseError("hand file: master link '" + tok[i + 1] +
                                 "' has no dof, " + ctx);
              link.joint.master_dof = master;
              link.joint.ratio = to_double(tok[i + 2], ctx);
              i += 3;
            } else {
              throw ParseError("hand file: unexpected token '" + tok[i] +
                               "', " + ctx);
            }
          }
        } else {
          throw ParseError("hand file: unexpected token '" + tok[i] + "', " +
                           ctx);
        }
      }
      link_index[link.name] = static_cast<int>(hand.links.size());
      hand.links.push_back(link);
      continue;
    }
    if (tok[0] == "point") {
      if (tok.size() != 8)
        throw ParseError("hand file: point needs link + 6 numbers, " + ctx);
      auto it = link_index.find(tok[1]);
      if (it == link_index.end())
        throw ParseError("hand file: unknown link '" + tok[1] + "', " + ctx);
      PredefinedPoint pt;
      pt.link = it->second;
      pt.position = Vec3(to_double(tok[2], ctx), to_double(tok[3], ctx),
                         to_double(tok[4], ctx));
      pt.normal = Vec3(to_double(tok[5], ctx), to_double(tok[6], ctx),
                       to_double(tok[7], ctx))
                      .normalized();
      hand.points.push_back(pt);
      continue;
    }
    throw ParseError("hand file: unknown directive '" + tok[0] + "', " + ctx);
  }
  hand.validate();
  hand.build_fingers();
  return hand;
}

HandModel load_hand(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_hand(buf.str());
}

std::string default_hand_text() {
  // Three fingers; f1/f2 share a spread dof (f2 mirrored), distal joints
  // coupled at 0.42. 13 predefined points on the grasping surfaces.
  return R"(hand barrett_like

link palm - box 0.045 0.045 0.017 origin 0 0 0 rpy 0 0 0
link f1_knuckle palm sphere 0.008 origin -0.025 -0.042 0.017 rpy -1.5707963267948966 0 3.1415926535897931 joint axis 0 1 0 limits 0 3.1415926535897931 role spread
link f1_prox f1_knuckle capsule 0.009 0.07 origin 0 0 0 rpy 0 0 0 joint axis 1 0 0 limits 0 2.443 role flex
link f1_dist f1_prox capsule 0.0085 0.056 origin 0 0 0.07 rpy 0 0 0 joint axis 1 0 0 couple f1_prox 0.42
link f2_knuckle palm sphere 0.008 origin 0.025 -0.042 0.017 rpy -1.5707963267948966 0 3.1415926535897931 joint axis 0 1 0 couple f1_knuckle -1
link f2_prox f2_knuckle capsule 0.009 0.07 origin 0 0 0 rpy 0 0 0 joint axis 1 0 0 limits 0 2.443 role flex
link f2_dist f2_prox capsule 0.0085 0.056 origin 0 0 0.07 rpy 0 0 0 joint axis 1 0 0 couple f2_prox 0.42
link f3_knuckle palm sphere 0.008 origin 0 0.042 0.017 rpy -1.5707963267948966 0 0
link f3_prox f3_knuckle capsule 0.009 0.07 origin 0 0 0 rpy 0 0 0 joint axis 1 0 0 limits 0 2.443 role flex
link f3_dist f3_prox capsule 0.0085 0.056 origin 0 0 0.07 rpy 0 0 0 joint axis 1 0 0 couple f3_prox 0.42

point palm 0 0 0.017 0 0 1
point f1_prox 0 -0.009 0.023333333333333334 0 -1 0
point f1_prox 0 -0.009 0.046666666666666669 0 -1 0
point f1_dist 0 -0.0085 0.018666666666666668 0 -1 0
point f1_dist 0 -0.0085 0.037333333333333336 0 -1 0
point f2_prox 0 -0.009 0.023333333333333334 0 -1 0
point f2_prox 0 -0.009 0.046666666666666669 0 -1 0
point f2_dist 0 -0.0085 0.018666666666666668 0 -1 0
point f2_dist 0 -0.0085 0.037333333333333336 0 -1 0
point f3_prox 0 -0.009 0.023333333333333334 0 -1 0
point f3_prox 0 -0.009 0.046666666666666669 0 -1 0
point f3_dist 0 -0.0085 0.018666666666666668 0 -1 0
point f3_dist 0 -0.0085 0.037333333333333336 0 -1 0
)";
}

HandModel make_default_hand() { return parse_hand(default_hand_text()); }

// ---------------------------------------------------------------------------
// Configuration ops

HandConfiguration validate_configuration(const HandModel& hand,
                                         const HandConfiguration& config,
                                         LimitMode mode) {
  if (config.joints.size() != hand.dof_count())
    throw InvalidArgument("joint vector length mismatch");
  HandConfiguration out = config;
  for (int d = 0; d < hand.dof_count(); ++d) {
    const Dof& dof = hand.dofs[d];
    double v = out.joints[d];
    if (v < dof.lower || v > dof.upper) {
      if (mode == LimitMode::Reject)
        throw InvalidArgument("joint '" + dof.name + "' = " +
                              std::to_string(v) + " outside [" +
                              std::to_string(dof.lower) + ", " +
                              std::to_string(dof.upper) + "]");
      out.joints[d] = std::clamp(v, dof.lower, dof.upper);
    }
  }
  return out;
}

HandConfiguration interpolate_configuration(const HandConfiguration& from,
                                            const HandConfiguration& to,
                                            double t) {
  HandConfiguration out;
  Quat qa(from.palm_pose.rotation), qb(to.palm_pose.rotation);
  out.palm_pose.rotation = qa.slerp(t, qb).toRotationMatrix();
  out.palm_pose.translation =
      (1.0 - t) * from.palm_pose.translation + t * to.palm_pose.translation;
  out.joints = (1.0 - t) * from.joints + t * to.joints;
  return out;
}

namespace {

// Max-coordinate motion in normalized c-space units: translation over the
// object diagonal, rotation angle over pi, joints over their ranges.
double normalized_config_distance(const HandModel& hand,
                                  const HandConfiguration& a,
                                  const HandConfiguration& b,
                                  const Geometry& object) {
  double diag = std::max(object.bounds().diagonal(), 1e-6);
  double d = (a.palm_pose.translation - b.palm_pose.translation).norm() / diag;
  Quat qa(a.palm_pose.rotation), qb(b.palm_pose.rotation);
  d = std::max(d, qa.angularDistance(qb) / M_PI);
  for (int i = 0; i < hand.dof_count(); ++i) {
    double range = hand.dofs[i].upper - hand.dofs[i].lower;
    if (range > 0.0)
      d = std::max(d, std::abs(a.joints[i] - b.joints[i]) / range);
  }
  return d;
}

std::vector<PosedPrimitive> filtered_links(const HandModel& hand,
                                           const HandConfiguration& config,
                                           const std::vector<int>& filter) {
  FkResult fk = hand.forward_kinematics(config);
  if (filter.empty()) return fk.links;
  std::vector<PosedPrimitive> out;
  out.reserve(filter.size());
  for (int i : filter) out.push_back(fk.links[i]);
  return out;
}

double min_clearance(const HandModel& hand, const HandConfiguration& config,
                     const Geometry& object, const std::vector<int>& filter) {
  double best = std::numeric_limits<double>::max();
  for (const auto& link : filtered_links(hand, config, filter))
    best = std::min(best, primitive_clearance(link, object));
  return best;
}

bool any_link_below(const HandModel& hand, const HandConfiguration& config,
                    const Geometry& object, const std::vector<int>& filter,
                    double threshold) {
  for (const auto& link : filtered_links(hand, config, filter))
    if (primitive_clearance(link, object) < threshold) return true;
  return false;
}

// Bound on |d clearance / d theta| for a finger: every surface point moves
// no faster than sum_j |ratio_j| * (chain length below joint j).
double finger_lever_bound(const HandModel& hand,
                          const HandModel::Finger& finger) {
  double total = 0.0;
  for (int link : finger.links) {
    const Joint& joint = hand.links[link].joint;
    if (joint.fixed) continue;
    double ratio = joint.dof >= 0 ? 1.0 : std::abs(joint.ratio);
    // Chain length from this joint to the farthest finger surface point.
    double reach = 0.0;
    for (int other : finger.links) {
      double chain = 0.0;
      int cur = other;
      bool below = false;
      while (cur >= 0) {
        if (cur == link) {
          below = true;
          break;
        }
        chain += hand.links[cur].fixed_transform.translation.norm();
        cur = hand.links[cur].parent;
      }
      if (!below) continue;
      const ConvexPrimitive& shape = hand.links[other].shape;
      double extent = shape.type == PrimitiveType::Capsule
                          ? shape.dims[1] + shape.dims[0]
                          : shape.dims.norm() + shape.dims[0];
      reach = std::max(reach, chain + extent);
    }
    total += ratio * reach;
  }
  return std::max(total, 1e-6);
}

}  // namespace

std::optional<double> continuous_contact_toi(
    const HandModel& hand, const HandConfiguration& config_from,
    const HandConfiguration& config_to, const Geometry& object,
    const CcdParams& params, const std::vector<int>& link_filter) {
  auto colliding = [&](double t) {
    HandConfiguration c = interpolate_configuration(config_from, config_to, t);
    return any_link_below(hand, c, object, link_filter, 0.0);
  };
  if (colliding(0.0))
    throw InvalidArgument("continuous_contact_toi: config_from in collision");

  double length =
      normalized_config_distance(hand, config_from, config_to, object);
  int n = std::clamp(static_cast<int>(std::ceil(length / params.scan_step)),
                     1, params.max_scan);
  double lo = 0.0, hi = -1.0;
  for (int i = 1; i <= n; ++i) {
    double t = static_cast<double>(i) / n;
    if (colliding(t)) {
      hi = t;
      break;
    }
    lo = t;
  }
  if (hi < 0.0) return std::nullopt;

  while (true) {
    while (hi - lo > 0.5 * params.eps) {
      double mid = 0.5 * (lo + hi);
      (colliding(mid) ? hi : lo) = mid;
    }
    // Contract: config(hi - eps) must be free. Rescan earlier on violation.
    if (hi <= params.eps || !colliding(hi - params.eps)) return hi;
    double bound = hi - params.eps;
    lo = 0.0;
    hi = bound;
    int m = std::max(1, static_cast<int>(std::ceil(bound / params.eps)));
    m = std::min(m, 100000);
    double prev = 0.0;
    double found = bound;
    for (int i = 1; i <= m; ++i) {
      double t = bound * i / m;
      if (colliding(t)) {
        found = t;
        break;
      }
      prev = t;
    }
    lo = prev;
    hi = found;
  }
}

CloseResult close_fingers(const HandModel& hand,
                          const HandConfiguration& config,
                          const Geometry& object) {
  if (config.joints.size() != hand.dof_count())
    throw InvalidArgument("close_fingers: joint vector length mismatch");
  if (min_clearance(hand, config, object, {}) < -kContactTol)
    throw InvalidArgument("close_fingers: starting configuration in collision");

  HandConfiguration cfg = config;
  for (const auto& finger : hand.fingers()) {
    const Dof& dof = hand.dofs[finger.dof];
    double theta1 = dof.upper;
    if (theta1 - cfg.joints[finger.dof] < 1e-12) continue;

    auto clearance_at = [&](double theta) {
      HandConfiguration c = cfg;
      c.joints[finger.dof] = theta;
      return min_clearance(hand, c, object, finger.links);
    };
    if (clearance_at(cfg.joints[finger.dof]) <= kTouchEps)
      continue;  // already touching: the finger does not advance

    // Conservative advancement toward the flexion limit. The guaranteed-safe
    // step is clearance/lever; an empirical-derivative step accelerates
    // tangential approaches, capped so the sweep cannot jump over features
    // thicker than kMinFeature. Overshoot is repaired by bisection.
    const double lever = finger_lever_bound(hand, finger);
    constexpr double kMinFeature = 8e-3;
    double theta = cfg.joints[finger.dof];
    double prev_theta = theta, prev_c = -1.0;
    for (int it = 0; it < 600; ++it) {
      double c = clearance_at(theta);
      if (c <= kTouchBand) {
        if (c < 0.0) {
          // Accelerated step overshot: back up to the touch band.
          double lo = prev_theta;
          double hi = theta;
          for (int k = 0; k < 60; ++k) {
            double cl = clearance_at(lo);
            if (cl >= 0.0 && cl <= kTouchBand) break;
            double mid = 0.5 * (lo + hi);
            (clearance_at(mid) < 0.0 ? hi : lo) = mid;
            if (hi - lo < 1e-13) break;
          }
          theta = lo;
        }
        break;  // contact
      }
      if (theta >= theta1) break;  // limit reached, finger stays free
      double safe = (c - 0.5 * kTouchBand) / lever;
      double step = safe;
      if (prev_c > 0.0 && theta > prev_theta) {
        double emp = (prev_c - c) / (theta - prev_theta);
        if (emp > 1e-6) step = std::max(step, 0.9 * c / emp);
        else step = std::max(step, (c + kMinFeature) / lever);
      }
      step = std::min(step, (c + kMinFeature) / lever);
      step = std::max(step, 1e-4);
      prev_theta = theta;
      prev_c = c;
      theta = std::min(theta + step, theta1);
    }
    cfg.joints[finger.dof] = theta;
  }

  CloseResult result;
  result.config = cfg;
  FkResult fk = hand.forward_kinematics(cfg);
  for (const auto& link : fk.links) {
    SurfaceHit witness;
    double clearance = primitive_clearance(link, object, &witness);
    if (clearance <= kContactCaptureTol) {
      ContactEvent ev;
      ev.point = witness.point;
      ev.normal_object = witness.normal;
      ev.link_id = link.link_id;
      ev.penetration_depth = std::max(0.0, -clearance);
      result.contacts.push_back(ev);
    }
  }
  return result;
}

}  // namespace gx
