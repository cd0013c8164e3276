#pragma once

#include <string>
#include <vector>

#include "graspxfer/assembly.hpp"
#include "graspxfer/grasp_search.hpp"

namespace gx {

inline constexpr const char* kToolVersion = "0.1.0";

// Everything a run needs, embedded into every output for replay.
struct RunConfig {
  // Inputs
  std::string example_object;
  std::string example_kind = "mesh";  // mesh | pointcloud
  std::string example_segmentation;   // label file; empty -> SDF segmentation
  std::string novel_object;
  std::string novel_kind = "mesh";
  std::string novel_segmentation;
  std::string hand_file;  // empty -> built-in default hand
  int sdf_num_parts = 2;
  int sdf_rays_per_face = 24;
  double sdf_cone_half_angle = M_PI / 6.0;

  // Configuration-space learning
  int training_samples = 40000;
  int holdout_samples = 2000;
  double svm_C = 10.0;
  double svm_gamma = -1.0;  // <= 0: 1/dimension
  double svm_tol = 1e-3;
  int active_rounds = 3;
  int active_batch = 200;
  int active_pool = 2000;
  int max_seeds = 64;

  // Grasp search
  PsoParams pso;
  int cone_edges = 8;
  double friction_mu = 0.8;
  MeasureWeights weights;

  // Mapping + replanning
  MappingParams mapping;
  int mapping_samples = 1200;
  ReplanWeights replan_weights;
  AnnealParams anneal;
  int transfer_count = 40;
  bool compare_baseline = false;

  uint64_t seed = 0;
  std::string out_dir = "out";

  SvmParams svm_params() const;
  ActiveLearnParams active_params() const;
  GraspEvalParams eval_params() const;
  SdfParams sdf_params() const;

  std::string to_json_string() const;
  static RunConfig from_json_string(const std::string& text);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;
  // FNV-1a over the canonical serialization.
  std::string hash() const;
};

struct DatabaseHeader {
  int schema_version = 1;
  std::string tool_version = kToolVersion;
  std::string hand_id;
  std::string object_id;
  int part_id = 0;
  std::string config_hash;
};

// Versioned, human-diffable grasp store; every record is force-closure.
struct GraspDatabase {
  DatabaseHeader header;
  std::string config_json;  // full RunConfig, embedded
  std::vector<Grasp> records;

  void save(const std::string& path) const;
  static GraspDatabase load(const std::string& path);
};

const char* to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

}  // namespace gx
