#pragma once

#include <string>
#include <vector>

#include "graspxfer/replan.hpp"

namespace gx {

enum class AssemblyOutcome {
  Kept,
  DiscardedPalmCollision,
  ReplannedOk,
  ReplannedFailed
};

const char* to_string(AssemblyOutcome o);

struct AssemblyEntry {
  int input_index = -1;
  AssemblyOutcome outcome = AssemblyOutcome::Kept;
  double quality_before = 0.0;  // epsilon on the part
  double quality_after = 0.0;   // epsilon on the full object, 0 when dropped
};

struct AssemblyReport {
  std::vector<AssemblyEntry> entries;
  int kept = 0;
  int discarded_palm = 0;
  int replanned_ok = 0;
  int replanned_failed = 0;

  int total() const {
    return kept + discarded_palm + replanned_ok + replanned_failed;
  }
  void save_csv(const std::string& path) const;
  void save_text(const std::string& path) const;
};

struct AssemblyResult {
  std::vector<Grasp> grasps;  // final set, index-aligned with report entries
                              // that survived
  AssemblyReport report;
};

// Re-validates per-part grasps against the full object. Palm collision
// discards; finger collision or lost force closure triggers local replanning
// against the grasp's own contacts. With allow_replan = false (baseline
// comparison), such grasps are re-run through the open-close method instead.
AssemblyResult assemble_grasps(const std::vector<Grasp>& per_part_grasps,
                               const Geometry& full_object,
                               const HandModel& hand,
                               const ReplanWeights& weights,
                               const AnnealParams& anneal,
                               const GraspEvalParams& eval = {},
                               bool allow_replan = true);

}  // namespace gx
