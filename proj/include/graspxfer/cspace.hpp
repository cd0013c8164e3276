#pragma once

#include <functional>
#include <string>
#include <vector>

#include "graspxfer/hand.hpp"
#include "graspxfer/svm.hpp"

namespace gx {

// Normalization of hand configurations: palm position offset to the sampling
// box center and scaled by the object bounding-box diagonal, orientation as a
// unit quaternion with w >= 0, joints scaled to [0,1] by their limits.
// Coordinate layout: [px py pz qw qx qy qz j0..jk-1].
struct ConfigSpec {
  Aabb sampling_box;
  double position_scale = 1.0;  // object bbox diagonal
  std::vector<double> joint_lower;
  std::vector<double> joint_upper;

  int dimension() const { return 7 + static_cast<int>(joint_lower.size()); }
  VecX normalize(const HandConfiguration& config) const;
  HandConfiguration denormalize(const VecX& x) const;
};

// Sampling box = part bounds inflated by the hand reach.
ConfigSpec make_config_spec(const HandModel& hand, const Geometry& part);

struct ConfigSample {
  VecX x;  // normalized coordinates
  bool free = false;
};

// Kernel classifier over normalized configurations approximating the
// collision-free / in-collision boundary.
struct Classifier {
  SvmModel svm;
  std::vector<int> sv_free;  // 1 when the support vector was collision-free
  ConfigSpec spec;

  double decision(const VecX& x) const { return svm.decision(x); }
  bool predict_free(const VecX& x) const { return decision(x) > 0.0; }
};

using FreeOracle = std::function<bool(const VecX&)>;
using ConfigSampler = std::function<VecX(Rng&)>;

// Uniform sampler / collision oracle over normalized coordinates for a hand
// and an object part.
ConfigSampler hand_config_sampler(const ConfigSpec& spec);
FreeOracle hand_free_oracle(const HandModel& hand, const Geometry& part,
                            const ConfigSpec& spec);

std::vector<ConfigSample> label_samples(const ConfigSampler& sampler,
                                        const FreeOracle& oracle, int n,
                                        Rng& rng);

// Labels n uniform configurations against the part. Deterministic per seed.
std::vector<ConfigSample> sample_and_label(const HandModel& hand,
                                           const Geometry& part,
                                           const ConfigSpec& spec, int n,
                                           uint64_t seed);

// Soft-margin RBF SVM fit of the labeled set (free -> +1). Throws on
// single-class input.
Classifier train_classifier(const std::vector<ConfigSample>& samples,
                            const SvmParams& params = {});

struct ActiveLearnParams {
  int rounds = 3;
  int batch = 200;
  int pool = 2000;
  SvmParams svm;
};

// Margin-based refinement: per round, label the pool candidates closest to
// the decision boundary and retrain on everything seen. `samples` accumulates
// the labeled set; `accuracy_trace` (when given) records held-out accuracy
// before training round r (entry 0 = initial classifier).
Classifier active_learning_refine(const Classifier& classifier,
                                  std::vector<ConfigSample>& samples,
                                  const ConfigSampler& sampler,
                                  const FreeOracle& oracle,
                                  const ActiveLearnParams& params, Rng& rng,
                                  const std::vector<ConfigSample>& holdout = {},
                                  std::vector<double>* accuracy_trace = nullptr);

double holdout_accuracy(const Classifier& classifier,
                        const std::vector<ConfigSample>& holdout);

// Collision-free support vectors, denormalized to world coordinates.
std::vector<HandConfiguration> free_support_vectors(const Classifier& c);

void save_classifier(const Classifier& c, const std::string& path);
Classifier load_classifier(const std::string& path);

}  // namespace gx
