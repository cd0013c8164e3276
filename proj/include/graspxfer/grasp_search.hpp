#pragma once

#include <optional>
#include <vector>

#include "graspxfer/cspace.hpp"
#include "graspxfer/hand.hpp"
#include "graspxfer/quality.hpp"

namespace gx {

enum class Provenance { Planned, Transferred, Replanned, Baseline };

struct Grasp {
  HandConfiguration config;  // post-closing
  std::vector<Contact> contacts;
  std::vector<int> contact_links;  // parallel to contacts
  GraspQuality quality;
  int part_id = 0;
  Provenance provenance = Provenance::Planned;
  double measure = 0.0;    // hybrid grasp measure at this configuration
  int source_index = -1;   // example-grasp index for transferred/baseline
};

struct GraspEvalParams {
  int cone_edges = 8;
  double friction_mu = 0.8;
  MeasureWeights weights;
};

// Torque origin at the surface centroid, lambda = largest lever arm of the
// object about it.
QualityParams object_quality_params(const Geometry& object,
                                    int cone_edges = 8);

// Contact events to friction contacts; the force direction is the inward
// surface normal.
std::vector<Contact> contacts_from_events(const std::vector<ContactEvent>& evs,
                                          double mu);

// Closes the fingers, extracts contacts, computes the wrench quality.
// Returns the grasp when force closure holds. config must be collision-free.
std::optional<Grasp> is_stable_grasp(const HandModel& hand,
                                     const HandConfiguration& config,
                                     const Geometry& object,
                                     const GraspEvalParams& eval = {});

struct PsoParams {
  int swarm_size = 64;
  int iterations = 200;
  double inertia = 0.729;
  double cognitive = 1.49445;
  double social = 1.49445;
  double init_velocity = 0.05;  // fraction of the normalized box
  double dedup_radius = 1e-3;   // normalized configuration distance
  uint64_t seed = 0;
};

struct PsoTrace {
  std::vector<double> gbest_history;  // per iteration, non-increasing
  int evaluations = 0;
};

// Swarm minimization of the hybrid grasp measure. Particles start at the
// seed configurations (cycled when fewer than swarm_size; extra seeds beyond
// swarm_size are ignored). Moves that would collide are truncated just before
// first contact. Every force-closure configuration encountered is recorded;
// the result is deduplicated and sorted by measure.
std::vector<Grasp> pso_plan_grasps(const HandModel& hand, const Geometry& part,
                                   const ConfigSpec& spec,
                                   const std::vector<HandConfiguration>& seeds,
                                   const PsoParams& params,
                                   const GraspEvalParams& eval = {},
                                   PsoTrace* trace = nullptr);

}  // namespace gx
