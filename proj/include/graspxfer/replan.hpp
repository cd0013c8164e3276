#pragma once

#include <optional>
#include <vector>

#include "graspxfer/mapping.hpp"

namespace gx {

struct ReplanWeights {
  double mu1 = 10.0;  // contact points
  double mu2 = 5.0;   // normals
  double mu3 = 5.0;   // joint limits
  double mu4 = 20.0;  // grasp quality
};

struct AnnealParams {
  double initial_temperature = -1.0;  // <= 0: 10% of the initial objective
  double cooling_rate = 0.95;
  int iterations = 150;
  double neighbor_scale = 0.04;  // joint step, fraction of each dof range
  int exploration_batch = 20;
  bool perturb_palm = false;  // small palm jitter (+-1 cm, +-5 deg)
  double palm_pos_step = 0.01;
  double palm_rot_step = 0.0873;
  uint64_t seed = 0;
};

// One contact witness per finger link that held a contact in the example
// grasp: the contact point and the finger's outward surface normal, pulled
// into link-local coordinates.
struct ContactWitness {
  int link = -1;
  Vec3 local_point;
  Vec3 local_normal;
};

std::vector<ContactWitness> make_contact_witnesses(const HandModel& hand,
                                                   const Grasp& grasp);

// Distance + normal-opposition + joint-barrier terms:
//   sum_i [ mu1 |c_i(theta) - d_i|^2 + exp(mu2 (n_i^c(theta) . n_i^d)) ]
//   + sum_k [ exp(mu3 (lo_k - theta_k)) + exp(mu3 (theta_k - up_k)) ]
// (minimized at c_i = d_i with opposed normals, joints inside limits).
double replanning_objective_smooth(const HandModel& hand,
                                   const HandConfiguration& config,
                                   const std::vector<ContactWitness>& witnesses,
                                   const std::vector<TargetContact>& targets,
                                   const ReplanWeights& weights);

// Full objective: smooth terms + mu4 log10(1/eps) with eps from closing the
// fingers at `config` (InvalidArgument on witness/target count mismatch).
double replanning_objective(const HandModel& hand,
                            const HandConfiguration& config,
                            const Geometry& object,
                            const std::vector<ContactWitness>& witnesses,
                            const std::vector<TargetContact>& targets,
                            const ReplanWeights& weights,
                            const GraspEvalParams& eval = {});

struct AnnealTrace {
  std::vector<double> best_objective;  // per iteration, non-increasing
  int evaluated = 0;
  int skipped_iterations = 0;  // all exploration samples collided
};

// Simulated annealing over the joint vector (palm frozen unless
// perturb_palm): neighbors of the temperature-accepted current state, up to
// exploration_batch extra draws when a sample collides. Every collision-free
// sample is closed and quality-checked; stable ones become candidates.
// Returns the best stable candidate by objective, nullopt when none found.
std::optional<Grasp> anneal_replan(const HandModel& hand,
                                   const HandConfiguration& initial,
                                   const Geometry& object,
                                   const std::vector<ContactWitness>& witnesses,
                                   const std::vector<TargetContact>& targets,
                                   const ReplanWeights& weights,
                                   const AnnealParams& params,
                                   const GraspEvalParams& eval = {},
                                   AnnealTrace* trace = nullptr);

enum class TransferFailure { None, Untransferable, ReplanFailed, PalmCollision };

struct TransferResultGrasp {
  std::optional<Grasp> grasp;
  TransferFailure failure = TransferFailure::None;
};

// Maps the example grasp's contacts to the novel part, re-poses the hand by
// the mapping transform and replans locally against the mapped targets.
TransferResultGrasp transfer_grasp(const Grasp& example_grasp,
                                   const CorrespondenceMapping& mapping,
                                   const HandModel& hand,
                                   const Geometry& novel_part,
                                   const ReplanWeights& weights,
                                   const AnnealParams& params,
                                   const GraspEvalParams& eval = {});

// Comparison method: re-pose the palm, straighten colliding fingers toward
// their lower limits, close, check stability. No replanning; unresolvable
// palm collision fails.
TransferResultGrasp open_close_baseline(const Grasp& example_grasp,
                                        const CorrespondenceMapping& mapping,
                                        const HandModel& hand,
                                        const Geometry& novel_part,
                                        const GraspEvalParams& eval = {});

// Baseline variant starting from an existing pose, used at the assembly
// stage (also no replanning).
TransferResultGrasp open_close_from_pose(const HandConfiguration& pose,
                                         const HandModel& hand,
                                         const Geometry& object,
                                         const GraspEvalParams& eval = {});

}  // namespace gx
