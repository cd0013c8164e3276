#include "graspxfer/cspace.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace gx {

VecX ConfigSpec::normalize(const HandConfiguration& config) const {
  VecX x(dimension());
  Vec3 center = sampling_box.center();
  x.segment<3>(0) = (config.palm_pose.translation - center) / position_scale;
  Quat q(config.palm_pose.rotation);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  x[3] = q.w();
  x[4] = q.x();
  x[5] = q.y();
  x[6] = q.z();
  for (size_t j = 0; j < joint_lower.size(); ++j) {
    double range = joint_upper[j] - joint_lower[j];
    x[7 + j] = range > 0.0 ? (config.joints[j] - joint_lower[j]) / range : 0.0;
  }
  return x;
}

HandConfiguration ConfigSpec::denormalize(const VecX& x) const {
  HandConfiguration config;
  Vec3 center = sampling_box.center();
  config.palm_pose.translation = center + position_scale * Vec3(x[0], x[1], x[2]);
  Quat q(x[3], x[4], x[5], x[6]);
  double len = q.norm();
  if (len < 1e-12)
    q = Quat::Identity();
  else
    q.coeffs() /= len;
  config.palm_pose.rotation = q.toRotationMatrix();
  config.joints.resize(joint_lower.size());
  for (size_t j = 0; j < joint_lower.size(); ++j)
    config.joints[j] =
        joint_lower[j] + x[7 + j] * (joint_upper[j] - joint_lower[j]);
  return config;
}

ConfigSpec make_config_spec(const HandModel& hand, const Geometry& part) {
  ConfigSpec spec;
  Aabb bounds = part.bounds();
  spec.sampling_box = bounds.inflated(hand.max_reach());
  spec.position_scale = std::max(bounds.diagonal(), 1e-9);
  for (const auto& dof : hand.dofs) {
    spec.joint_lower.push_back(dof.lower);
    spec.joint_upper.push_back(dof.upper);
  }
  return spec;
}

ConfigSampler hand_config_sampler(const ConfigSpec& spec) {
  return [spec](Rng& rng) {
    HandConfiguration c;
    for (int i = 0; i < 3; ++i)
      c.palm_pose.translation[i] =
          rng.uniform(spec.sampling_box.lo[i], spec.sampling_box.hi[i]);
    c.palm_pose.rotation = rng.uniform_quaternion().toRotationMatrix();
    c.joints.resize(spec.joint_lower.size());
    for (size_t j = 0; j < spec.joint_lower.size(); ++j)
      c.joints[j] = rng.uniform(spec.joint_lower[j], spec.joint_upper[j]);
    return spec.normalize(c);
  };
}

FreeOracle hand_free_oracle(const HandModel& hand, const Geometry& part,
                            const ConfigSpec& spec) {
  return [&hand, &part, spec](const VecX& x) {
    HandConfiguration c = spec.denormalize(x);
    FkResult fk = hand.forward_kinematics(c);
    return !check_collision(fk.links, part).in_collision;
  };
}

std::vector<ConfigSample> label_samples(const ConfigSampler& sampler,
                                        const FreeOracle& oracle, int n,
                                        Rng& rng) {
  std::vector<ConfigSample> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    ConfigSample s;
    s.x = sampler(rng);
    s.free = oracle(s.x);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ConfigSample> sample_and_label(const HandModel& hand,
                                           const Geometry& part,
                                           const ConfigSpec& spec, int n,
                                           uint64_t seed) {
  Rng rng(seed);
  return label_samples(hand_config_sampler(spec), hand_free_oracle(hand, part, spec),
                       n, rng);
}

Classifier train_classifier(const std::vector<ConfigSample>& samples,
                            const SvmParams& params) {
  std::vector<VecX> xs;
  std::vector<int> ys;
  xs.reserve(samples.size());
  ys.reserve(samples.size());
  for (const auto& s : samples) {
    xs.push_back(s.x);
    ys.push_back(s.free ? 1 : -1);
  }
  Classifier c;
  c.svm = svm_train(xs, ys, params);
  c.sv_free.reserve(c.svm.sv_indices.size());
  for (int idx : c.svm.sv_indices)
    c.sv_free.push_back(samples[idx].free ? 1 : 0);
  return c;
}

double holdout_accuracy(const Classifier& classifier,
                        const std::vector<ConfigSample>& holdout) {
  if (holdout.empty()) return 0.0;
  int correct = 0;
  for (const auto& s : holdout)
    if (classifier.predict_free(s.x) == s.free) ++correct;
  return double(correct) / double(holdout.size());
}

Classifier active_learning_refine(const Classifier& classifier,
                                  std::vector<ConfigSample>& samples,
                                  const ConfigSampler& sampler,
                                  const FreeOracle& oracle,
                                  const ActiveLearnParams& params, Rng& rng,
                                  const std::vector<ConfigSample>& holdout,
                                  std::vector<double>* accuracy_trace) {
  Classifier current = classifier;
  if (accuracy_trace && !holdout.empty())
    accuracy_trace->push_back(holdout_accuracy(current, holdout));
  for (int round = 0; round < params.rounds; ++round) {
    // Candidate pool ranked by |f|, most boundary-adjacent first.
    std::vector<VecX> pool;
    pool.reserve(params.pool);
    for (int i = 0; i < params.pool; ++i) pool.push_back(sampler(rng));
    std::vector<std::pair<double, int>> rank;
    rank.reserve(pool.size());
    for (size_t i = 0; i < pool.size(); ++i)
      rank.emplace_back(std::abs(current.decision(pool[i])),
                        static_cast<int>(i));
    std::sort(rank.begin(), rank.end());
    int take = std::min<int>(params.batch, static_cast<int>(rank.size()));
    for (int i = 0; i < take; ++i) {
      ConfigSample s;
      s.x = pool[rank[i].second];
      s.free = oracle(s.x);
      samples.push_back(std::move(s));
    }
    ConfigSpec spec = current.spec;
    current = train_classifier(samples, params.svm);
    current.spec = spec;
    if (accuracy_trace && !holdout.empty())
      accuracy_trace->push_back(holdout_accuracy(current, holdout));
  }
  return current;
}

std::vector<HandConfiguration> free_support_vectors(const Classifier& c) {
  std::vector<HandConfiguration> out;
  for (size_t i = 0; i < c.svm.support_vectors.size(); ++i)
    if (c.sv_free[i]) out.push_back(c.spec.denormalize(c.svm.support_vectors[i]));
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::ordered_json vec_to_json(const VecX& v) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

VecX vec_from_json(const nlohmann::json& arr) {
  VecX v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
  return v;
}

}  // namespace

void save_classifier(const Classifier& c, const std::string& path) {
  nlohmann::ordered_json j;
  j["format"] = "graspxfer-classifier";
  j["version"] = 1;
  j["gamma"] = c.svm.gamma;
  j["bias"] = c.svm.bias;
  j["spec"]["box_lo"] = {c.spec.sampling_box.lo.x(), c.spec.sampling_box.lo.y(),
                         c.spec.sampling_box.lo.z()};
  j["spec"]["box_hi"] = {c.spec.sampling_box.hi.x(), c.spec.sampling_box.hi.y(),
                         c.spec.sampling_box.hi.z()};
  j["spec"]["position_scale"] = c.spec.position_scale;
  j["spec"]["joint_lower"] = c.spec.joint_lower;
  j["spec"]["joint_upper"] = c.spec.joint_upper;
  nlohmann::ordered_json svs = nlohmann::ordered_json::array();
  for (size_t i = 0; i < c.svm.support_vectors.size(); ++i) {
    nlohmann::ordered_json sv;
    sv["x"] = vec_to_json(c.svm.support_vectors[i]);
    sv["coef"] = c.svm.coefficients[i];
    sv["free"] = c.sv_free[i];
    svs.push_back(std::move(sv));
  }
  j["support_vectors"] = std::move(svs);
  std::ofstream out(path);
  if (!out) throw GxError("cannot write " + path);
  out << j.dump(2) << '\n';
}

Classifier load_classifier(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.value("format", "") != "graspxfer-classifier")
    throw ParseError(path + ": not a classifier file");
  Classifier c;
  c.svm.gamma = j.at("gamma").get<double>();
  c.svm.bias = j.at("bias").get<double>();
  auto lo = j.at("spec").at("box_lo");
  auto hi = j.at("spec").at("box_hi");
  c.spec.sampling_box.lo = Vec3(lo[0], lo[1], lo[2]);
  c.spec.sampling_box.hi = Vec3(hi[0], hi[1], hi[2]);
  c.spec.position_scale = j.at("spec").at("position_scale").get<double>();
  c.spec.joint_lower =
      j.at("spec").at("joint_lower").get<std::vector<double>>();
  c.spec.joint_upper =
      j.at("spec").at("joint_upper").get<std::vector<double>>();
  for (const auto& sv : j.at("support_vectors")) {
    c.svm.support_vectors.push_back(vec_from_json(sv.at("x")));
    c.svm.coefficients.push_back(sv.at("coef").get<double>());
    c.sv_free.push_back(sv.at("free").get<int>());
  }
  return c;
}

}  // namespace gx
