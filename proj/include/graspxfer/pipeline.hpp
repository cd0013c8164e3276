#pragma once

#include <string>
#include <vector>

#include "graspxfer/database.hpp"

namespace gx {

// Loads geometry plus labels, from a label file or (meshes only) SDF
// segmentation when no label file is configured.
SegmentedObject load_segmented_object(const std::string& object_path,
                                      const std::string& kind,
                                      const std::string& segmentation_path,
                                      const RunConfig& config);

HandModel load_hand_or_default(const RunConfig& config);

struct PartLearnStats {
  int part_id = 0;
  int samples = 0;
  int support_vectors = 0;
  int seeds = 0;
  int stable_grasps = 0;
  double learn_seconds = 0.0;
  double search_seconds = 0.0;
  double holdout_accuracy = 0.0;
};

struct LearnOutput {
  std::vector<GraspDatabase> databases;  // one per part
  std::vector<PartLearnStats> stats;
  std::vector<std::string> warnings;
};

// Sample/label -> train -> active refine -> free support vectors -> swarm
// search, per part. Writes part databases and a stats file under out_dir.
LearnOutput cmd_learn(const RunConfig& config);

struct PartTransferStats {
  int part_id = 0;
  int attempted = 0;
  int transfer_ok = 0;
  int baseline_transfer_ok = 0;
};

struct TransferOutput {
  GraspDatabase transfer_stage;   // per-part grasps before assembly
  GraspDatabase final_stage;      // after assembly on the full object
  GraspDatabase baseline_stage;   // baseline before assembly (when compared)
  GraspDatabase baseline_final;   // baseline after assembly
  std::vector<PartTransferStats> per_part;
  AssemblyReport assembly_report;
  AssemblyReport baseline_assembly_report;
  int attempted_total = 0;
  int transfer_ok_total = 0;
  int assembly_ok_total = 0;
  int baseline_transfer_ok_total = 0;
  int baseline_assembly_ok_total = 0;
};

// Per part: sample both surfaces, align, build the mapping, transfer each
// example grasp (baseline too when configured), then assemble against the
// full novel object. Writes databases, the assembly report and a
// success-rate table under out_dir.
TransferOutput cmd_transfer(const RunConfig& config,
                            const std::vector<GraspDatabase>& example_dbs);

struct ReportOutput {
  int pairs = 0;
  int above_diagonal = 0;        // replanned epsilon > baseline epsilon
  double above_diagonal_fraction = 0.0;
  int ratio_count = 0;
  int more_stable_than_example = 0;  // transferred eps > example eps
};

// Quality ratios, ours-vs-baseline scatter data and success summary, as CSV
// under out_dir.
ReportOutput cmd_report(const std::vector<GraspDatabase>& example_dbs,
                        const GraspDatabase& final_db,
                        const GraspDatabase& baseline_final_db,
                        const std::string& out_dir);

struct EvaluateOutput {
  bool ok = true;
  std::vector<std::string> failures;  // one line per offending record
};

// Replays every record: joint limits, collision at contact tolerance, and
// recomputed quality within 1e-6 of the stored value.
EvaluateOutput cmd_evaluate(const GraspDatabase& db, const Geometry& object,
                            const HandModel& hand,
                            const GraspEvalParams& eval);

}  // namespace gx
