#include "graspxfer/assembly.hpp"

#include <fstream>

namespace gx {

const char* to_string(AssemblyOutcome o) {
  switch (o) {
    case AssemblyOutcome::Kept:
      return "kept";
    case AssemblyOutcome::DiscardedPalmCollision:
      return "discarded_palm_collision";
    case AssemblyOutcome::ReplannedOk:
      return "replanned_ok";
    case AssemblyOutcome::ReplannedFailed:
      return "replanned_failed";
  }
  return "?";
}

void AssemblyReport::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw GxError("cannot write " + path);
  out << "index,outcome,quality_before,quality_after\n";
  out.precision(17);
  for (const auto& e : entries)
    out << e.input_index << ',' << to_string(e.outcome) << ','
        << e.quality_before << ',' << e.quality_after << '\n';
}

void AssemblyReport::save_text(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw GxError("cannot write " + path);
  out << "kept " << kept << "\n"
      << "discarded_palm_collision " << discarded_palm << "\n"
      << "replanned_ok " << replanned_ok << "\n"
      << "replanned_failed " << replanned_failed << "\n"
      << "total " << total() << "\n";
}

namespace {

struct FullObjectCheck {
  bool palm_collision = false;
  bool finger_collision = false;
};

FullObjectCheck check_against_full(const HandModel& hand,
                                   const HandConfiguration& config,
                                   const Geometry& object) {
  FullObjectCheck out;
  FkResult fk = hand.forward_kinematics(config);
  for (size_t i = 0; i < fk.links.size(); ++i) {
    if (primitive_clearance(fk.links[i], object) < -kContactTol) {
      if (i == 0)
        out.palm_collision = true;
      else
        out.finger_collision = true;
    }
  }
  return out;
}

}  // namespace

AssemblyResult assemble_grasps(const std::vector<Grasp>& per_part_grasps,
                               const Geometry& full_object,
                               const HandModel& hand,
                               const ReplanWeights& weights,
                               const AnnealParams& anneal,
                               const GraspEvalParams& eval,
                               bool allow_replan) {
  AssemblyResult result;
  for (size_t i = 0; i < per_part_grasps.size(); ++i) {
    const Grasp& g = per_part_grasps[i];
    AssemblyEntry entry;
    entry.input_index = static_cast<int>(i);
    entry.quality_before = g.quality.epsilon;

    FullObjectCheck check = check_against_full(hand, g.config, full_object);
    if (check.palm_collision) {
      entry.outcome = AssemblyOutcome::DiscardedPalmCollision;
      ++result.report.discarded_palm;
      result.report.entries.push_back(entry);
      continue;
    }

    bool needs_replan = check.finger_collision;
    std::optional<Grasp> final_grasp;
    if (!needs_replan) {
      // Collision-free: stability recomputed on full-object contacts.
      CloseResult closed = close_fingers(hand, g.config, full_object);
      std::vector<Contact> contacts =
          contacts_from_events(closed.contacts, eval.friction_mu);
      GraspQuality q = epsilon_quality(
          contacts, object_quality_params(full_object, eval.cone_edges));
      if (q.force_closure) {
        Grasp kept = g;
        kept.config = closed.config;
        kept.contacts = std::move(contacts);
        kept.contact_links.clear();
        for (const auto& ev : closed.contacts)
          kept.contact_links.push_back(ev.link_id);
        kept.quality = q;
        FkResult fk = hand.forward_kinematics(closed.config);
        kept.measure = hybrid_grasp_measure(fk.points, fk.point_normals,
                                            full_object, q, eval.weights);
        final_grasp = std::move(kept);
        entry.outcome = AssemblyOutcome::Kept;
        ++result.report.kept;
      } else {
        needs_replan = true;
      }
    }

    if (needs_replan) {
      if (allow_replan) {
        // Targets: the grasp's own contacts, to stay close to it.
        std::vector<TargetContact> targets;
        targets.reserve(g.contacts.size());
        for (const auto& c : g.contacts)
          targets.push_back({c.position, -c.normal});
        std::vector<ContactWitness> witnesses =
            make_contact_witnesses(hand, g);
        AnnealParams params = anneal;
        params.seed = Rng(anneal.seed).split(i + 1).next_u64();
        std::optional<Grasp> replanned =
            anneal_replan(hand, g.config, full_object, witnesses, targets,
                          weights, params, eval);
        if (replanned) {
          replanned->part_id = g.part_id;
          replanned->provenance = Provenance::Replanned;
          replanned->source_index = g.source_index;
          final_grasp = std::move(replanned);
          entry.outcome = AssemblyOutcome::ReplannedOk;
          ++result.report.replanned_ok;
        } else {
          entry.outcome = AssemblyOutcome::ReplannedFailed;
          ++result.report.replanned_failed;
        }
      } else {
        // Baseline path: open-close against the full object, no replanning.
        TransferResultGrasp oc =
            open_close_from_pose(g.config, hand, full_object, eval);
        if (oc.grasp) {
          oc.grasp->part_id = g.part_id;
          oc.grasp->provenance = Provenance::Baseline;
          oc.grasp->source_index = g.source_index;
          final_grasp = std::move(oc.grasp);
          entry.outcome = AssemblyOutcome::ReplannedOk;
          ++result.report.replanned_ok;
        } else {
          entry.outcome = AssemblyOutcome::ReplannedFailed;
          ++result.report.replanned_failed;
        }
      }
    }

    if (final_grasp) {
      entry.quality_after = final_grasp->quality.epsilon;
      result.grasps.push_back(std::move(*final_grasp));
    }
    result.report.entries.push_back(entry);
  }
  return result;
}

}  // namespace gx
