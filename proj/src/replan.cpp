#include "graspxfer/replan.hpp"

#include <algorithm>

namespace gx {

std::vector<ContactWitness> make_contact_witnesses(const HandModel& hand,
                                                   const Grasp& grasp) {
  if (grasp.contacts.size() != grasp.contact_links.size())
    throw InvalidArgument("grasp contacts and contact_links out of sync");
  FkResult fk = hand.forward_kinematics(grasp.config);
  std::vector<ContactWitness> out;
  out.reserve(grasp.contacts.size());
  for (size_t i = 0; i < grasp.contacts.size(); ++i) {
    ContactWitness w;
    w.link = grasp.contact_links[i];
    Pose inv = fk.link_poses[w.link].inverse();
    w.local_point = inv.apply(grasp.contacts[i].position);
    // Finger surface outward normal at contact = inward force direction.
    w.local_normal = inv.rotate(grasp.contacts[i].normal);
    out.push_back(w);
  }
  return out;
}

double replanning_objective_smooth(const HandModel& hand,
                                   const HandConfiguration& config,
                                   const std::vector<ContactWitness>& witnesses,
                                   const std::vector<TargetContact>& targets,
                                   const ReplanWeights& weights) {
  if (witnesses.size() != targets.size())
    throw InvalidArgument("replanning objective: witness/target count mismatch");
  FkResult fk = hand.forward_kinematics(config);
  double obj = 0.0;
  for (size_t i = 0; i < witnesses.size(); ++i) {
    const Pose& frame = fk.link_poses[witnesses[i].link];
    Vec3 c = frame.apply(witnesses[i].local_point);
    Vec3 nc = frame.rotate(witnesses[i].local_normal);
    obj += weights.mu1 * (c - targets[i].point).squaredNorm();
    obj += std::exp(weights.mu2 * nc.dot(targets[i].normal));
  }
  for (int k = 0; k < hand.dof_count(); ++k) {
    const Dof& dof = hand.dofs[k];
    obj += std::exp(weights.mu3 * (dof.lower - config.joints[k]));
    obj += std::exp(weights.mu3 * (config.joints[k] - dof.upper));
  }
  return obj;
}

double replanning_objective(const HandModel& hand,
                            const HandConfiguration& config,
                            const Geometry& object,
                            const std::vector<ContactWitness>& witnesses,
                            const std::vector<TargetContact>& targets,
                            const ReplanWeights& weights,
                            const GraspEvalParams& eval) {
  double smooth =
      replanning_objective_smooth(hand, config, witnesses, targets, weights);
  CloseResult closed = close_fingers(hand, config, object);
  GraspQuality q =
      epsilon_quality(contacts_from_events(closed.contacts, eval.friction_mu),
                      object_quality_params(object, eval.cone_edges));
  double eps = std::max(q.epsilon, kEpsilonFloor);
  return smooth + weights.mu4 * std::log10(1.0 / eps);
}

namespace {

bool config_free(const HandModel& hand, const HandConfiguration& config,
                 const Geometry& object) {
  FkResult fk = hand.forward_kinematics(config);
  for (const auto& link : fk.links)
    if (primitive_clearance(link, object) < -kContactTol) return false;
  return true;
}

struct CandidateEval {
  double total = std::numeric_limits<double>::max();
  std::optional<Grasp> stable;
};

CandidateEval evaluate_candidate(const HandModel& hand,
                                 const HandConfiguration& config,
                                 const Geometry& object,
                                 const std::vector<ContactWitness>& witnesses,
                                 const std::vector<TargetContact>& targets,
                                 const ReplanWeights& weights,
                                 const GraspEvalParams& eval) {
  CandidateEval out;
  double smooth =
      replanning_objective_smooth(hand, config, witnesses, targets, weights);
  CloseResult closed = close_fingers(hand, config, object);
  std::vector<Contact> contacts =
      contacts_from_events(closed.contacts, eval.friction_mu);
  GraspQuality q =
      epsilon_quality(contacts, object_quality_params(object, eval.cone_edges));
  double eps = std::max(q.epsilon, kEpsilonFloor);
  out.total = smooth + weights.mu4 * std::log10(1.0 / eps);
  if (q.force_closure) {
    Grasp g;
    g.config = closed.config;
    g.contacts = std::move(contacts);
    for (const auto& ev : closed.contacts)
      g.contact_links.push_back(ev.link_id);
    g.quality = q;
    g.provenance = Provenance::Replanned;
    FkResult fk = hand.forward_kinematics(closed.config);
    g.measure = hybrid_grasp_measure(fk.points, fk.point_normals, object, q,
                                     eval.weights);
    out.stable = std::move(g);
  }
  return out;
}

}  // namespace

std::optional<Grasp> anneal_replan(const HandModel& hand,
                                   const HandConfiguration& initial,
                                   const Geometry& object,
                                   const std::vector<ContactWitness>& witnesses,
                                   const std::vector<TargetContact>& targets,
                                   const ReplanWeights& weights,
                                   const AnnealParams& params,
                                   const GraspEvalParams& eval,
                                   AnnealTrace* trace) {
  Rng rng(params.seed);
  HandConfiguration current = initial;
  double current_total = std::numeric_limits<double>::max();
  double best_total = std::numeric_limits<double>::max();
  std::optional<Grasp> best_stable;
  double best_stable_total = std::numeric_limits<double>::max();

  if (config_free(hand, initial, object)) {
    CandidateEval ev = evaluate_candidate(hand, initial, object, witnesses,
                                          targets, weights, eval);
    if (trace) ++trace->evaluated;
    current_total = ev.total;
    best_total = ev.total;
    if (ev.stable && ev.total < best_stable_total) {
      best_stable = ev.stable;
      best_stable_total = ev.total;
    }
  }

  double temperature = params.initial_temperature > 0.0
                           ? params.initial_temperature
                           : (std::isfinite(best_total)
                                  ? 0.1 * std::max(std::abs(best_total), 1.0)
                                  : 1.0);

  auto propose = [&](const HandConfiguration& center) {
    HandConfiguration next = center;
    for (int k = 0; k < hand.dof_count(); ++k) {
      const Dof& dof = hand.dofs[k];
      double step = params.neighbor_scale * (dof.upper - dof.lower);
      next.joints[k] =
          std::clamp(next.joints[k] + step * rng.gaussian(), dof.lower,
                     dof.upper);
    }
    if (params.perturb_palm) {
      Vec3 dt(rng.gaussian(), rng.gaussian(), rng.gaussian());
      next.palm_pose.translation += params.palm_pos_step * dt;
      Vec3 axis(rng.gaussian(), rng.gaussian(), rng.gaussian());
      if (axis.norm() > 1e-12) {
        next.palm_pose.rotation =
            Eigen::AngleAxisd(params.palm_rot_step * rng.gaussian(),
                              axis.normalized())
                .toRotationMatrix() *
            next.palm_pose.rotation;
      }
    }
    return next;
  };

  for (int it = 0; it < params.iterations; ++it) {
    std::optional<HandConfiguration> sample;
    for (int attempt = 0; attempt < 1 + params.exploration_batch; ++attempt) {
      HandConfiguration cand = propose(current);
      if (config_free(hand, cand, object)) {
        sample = std::move(cand);
        break;
      }
    }
    temperature *= params.cooling_rate;
    if (!sample) {
      if (trace) {
        ++trace->skipped_iterations;
        trace->best_objective.push_back(best_total);
      }
      continue;
    }
    CandidateEval ev = evaluate_candidate(hand, *sample, object, witnesses,
                                          targets, weights, eval);
    if (trace) ++trace->evaluated;
    if (ev.stable && ev.total < best_stable_total) {
      best_stable = ev.stable;
      best_stable_total = ev.total;
    }
    best_total = std::min(best_total, ev.total);
    // Metropolis on the temperature-accepted state.
    double delta = ev.total - current_total;
    if (delta <= 0.0 ||
        (temperature > 0.0 && rng.uniform() < std::exp(-delta / temperature))) {
      current = *sample;
      current_total = ev.total;
    }
    if (trace) trace->best_objective.push_back(best_total);
  }
  return best_stable;
}

TransferResultGrasp transfer_grasp(const Grasp& example_grasp,
                                   const CorrespondenceMapping& mapping,
                                   const HandModel& hand,
                                   const Geometry& novel_part,
                                   const ReplanWeights& weights,
                                   const AnnealParams& params,
                                   const GraspEvalParams& eval) {
  TransferResultGrasp result;
  auto targets = mapping.map_grasp_contacts(example_grasp);
  if (!targets) {
    result.failure = TransferFailure::Untransferable;
    return result;
  }
  std::vector<ContactWitness> witnesses =
      make_contact_witnesses(hand, example_grasp);

  HandConfiguration initial = example_grasp.config;
  initial.palm_pose = mapping.transform().compose(initial.palm_pose);

  std::optional<Grasp> g = anneal_replan(hand, initial, novel_part, witnesses,
                                         *targets, weights, params, eval);
  if (!g) {
    result.failure = TransferFailure::ReplanFailed;
    return result;
  }
  g->provenance = Provenance::Transferred;
  g->part_id = example_grasp.part_id;
  result.grasp = std::move(g);
  return result;
}

TransferResultGrasp open_close_from_pose(const HandConfiguration& pose,
                                         const HandModel& hand,
                                         const Geometry& object,
                                         const GraspEvalParams& eval) {
  TransferResultGrasp result;
  HandConfiguration cfg = pose;

  // Palm (root link) collision is unresolvable for this method.
  {
    FkResult fk = hand.forward_kinematics(cfg);
    if (primitive_clearance(fk.links[0], object) < -kContactTol) {
      result.failure = TransferFailure::PalmCollision;
      return result;
    }
  }
  // Straighten each colliding finger toward its lower limit until free.
  for (const auto& finger : hand.fingers()) {
    const Dof& dof = hand.dofs[finger.dof];
    auto finger_free = [&](double theta) {
      HandConfiguration probe = cfg;
      probe.joints[finger.dof] = theta;
      FkResult fk = hand.forward_kinematics(probe);
      for (int link : finger.links)
        if (primitive_clearance(fk.links[link], object) < -kContactTol)
          return false;
      return true;
    };
    if (finger_free(cfg.joints[finger.dof])) continue;
    const int steps = 64;
    double theta0 = cfg.joints[finger.dof];
    bool freed = false;
    for (int s = 1; s <= steps; ++s) {
      double theta = theta0 + (dof.lower - theta0) * s / steps;
      if (finger_free(theta)) {
        cfg.joints[finger.dof] = theta;
        freed = true;
        break;
      }
    }
    if (!freed) {
      result.failure = TransferFailure::ReplanFailed;
      return result;
    }
  }
  // Non-finger links (e.g. knuckles) may still collide; the method has no
  // remedy for those either.
  if (!config_free(hand, cfg, object)) {
    result.failure = TransferFailure::PalmCollision;
    return result;
  }

  CloseResult closed = close_fingers(hand, cfg, object);
  std::vector<Contact> contacts =
      contacts_from_events(closed.contacts, eval.friction_mu);
  GraspQuality q =
      epsilon_quality(contacts, object_quality_params(object, eval.cone_edges));
  if (!q.force_closure) {
    result.failure = TransferFailure::ReplanFailed;
    return result;
  }
  Grasp g;
  g.config = closed.config;
  g.contacts = std::move(contacts);
  for (const auto& ev : closed.contacts) g.contact_links.push_back(ev.link_id);
  g.quality = q;
  g.provenance = Provenance::Baseline;
  FkResult fk = hand.forward_kinematics(closed.config);
  g.measure = hybrid_grasp_measure(fk.points, fk.point_normals, object, q,
                                   eval.weights);
  result.grasp = std::move(g);
  return result;
}

TransferResultGrasp open_close_baseline(const Grasp& example_grasp,
                                        const CorrespondenceMapping& mapping,
                                        const HandModel& hand,
                                        const Geometry& novel_part,
                                        const GraspEvalParams& eval) {
  HandConfiguration pose = example_grasp.config;
  pose.palm_pose = mapping.transform().compose(pose.palm_pose);
  TransferResultGrasp result =
      open_close_from_pose(pose, hand, novel_part, eval);
  if (result.grasp) {
    result.grasp->part_id = example_grasp.part_id;
  }
  return result;
}

}  // namespace gx
