#include "graspxfer/database.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gx {

using nlohmann::json;
using nlohmann::ordered_json;

SvmParams RunConfig::svm_params() const {
  SvmParams p;
  p.C = svm_C;
  p.gamma = svm_gamma;
  p.tol = svm_tol;
  return p;
}

ActiveLearnParams RunConfig::active_params() const {
  ActiveLearnParams p;
  p.rounds = active_rounds;
  p.batch = active_batch;
  p.pool = active_pool;
  p.svm = svm_params();
  return p;
}

GraspEvalParams RunConfig::eval_params() const {
  GraspEvalParams p;
  p.cone_edges = cone_edges;
  p.friction_mu = friction_mu;
  p.weights = weights;
  return p;
}

SdfParams RunConfig::sdf_params() const {
  SdfParams p;
  p.rays_per_face = sdf_rays_per_face;
  p.cone_half_angle = sdf_cone_half_angle;
  p.seed = seed;
  return p;
}

namespace {

ordered_json config_to_json(const RunConfig& c) {
  ordered_json j;
  j["example_object"] = c.example_object;
  j["example_kind"] = c.example_kind;
  j["example_segmentation"] = c.example_segmentation;
  j["novel_object"] = c.novel_object;
  j["novel_kind"] = c.novel_kind;
  j["novel_segmentation"] = c.novel_segmentation;
  j["hand_file"] = c.hand_file;
  j["sdf_num_parts"] = c.sdf_num_parts;
  j["sdf_rays_per_face"] = c.sdf_rays_per_face;
  j["sdf_cone_half_angle"] = c.sdf_cone_half_angle;
  j["training_samples"] = c.training_samples;
  j["holdout_samples"] = c.holdout_samples;
  j["svm_C"] = c.svm_C;
  j["svm_gamma"] = c.svm_gamma;
  j["svm_tol"] = c.svm_tol;
  j["active_rounds"] = c.active_rounds;
  j["active_batch"] = c.active_batch;
  j["active_pool"] = c.active_pool;
  j["max_seeds"] = c.max_seeds;
  j["pso"] = {{"swarm_size", c.pso.swarm_size},
              {"iterations", c.pso.iterations},
              {"inertia", c.pso.inertia},
              {"cognitive", c.pso.cognitive},
              {"social", c.pso.social},
              {"init_velocity", c.pso.init_velocity},
              {"dedup_radius", c.pso.dedup_radius}};
  j["cone_edges"] = c.cone_edges;
  j["friction_mu"] = c.friction_mu;
  j["weights"] = {{"w1", c.weights.w1}, {"w2", c.weights.w2},
                  {"w3", c.weights.w3}};
  j["mapping"] = {{"delta", c.mapping.delta},
                  {"gamma", c.mapping.gamma},
                  {"k_interp", c.mapping.k_interp},
                  {"r_interp_frac", c.mapping.r_interp_frac},
                  {"align_max_iters", c.mapping.align_max_iters},
                  {"align_tol", c.mapping.align_tol}};
  j["mapping_samples"] = c.mapping_samples;
  j["replan_weights"] = {{"mu1", c.replan_weights.mu1},
                         {"mu2", c.replan_weights.mu2},
                         {"mu3", c.replan_weights.mu3},
                         {"mu4", c.replan_weights.mu4}};
  j["anneal"] = {{"initial_temperature", c.anneal.initial_temperature},
                 {"cooling_rate", c.anneal.cooling_rate},
                 {"iterations", c.anneal.iterations},
                 {"neighbor_scale", c.anneal.neighbor_scale},
                 {"exploration_batch", c.anneal.exploration_batch},
                 {"perturb_palm", c.anneal.perturb_palm},
                 {"palm_pos_step", c.anneal.palm_pos_step},
                 {"palm_rot_step", c.anneal.palm_rot_step}};
  j["transfer_count"] = c.transfer_count;
  j["compare_baseline"] = c.compare_baseline;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).template get<std::decay_t<decltype(field)>>();
  };
  get("example_object", c.example_object);
  get("example_kind", c.example_kind);
  get("example_segmentation", c.example_segmentation);
  get("novel_object", c.novel_object);
  get("novel_kind", c.novel_kind);
  get("novel_segmentation", c.novel_segmentation);
  get("hand_file", c.hand_file);
  get("sdf_num_parts", c.sdf_num_parts);
  get("sdf_rays_per_face", c.sdf_rays_per_face);
  get("sdf_cone_half_angle", c.sdf_cone_half_angle);
  get("training_samples", c.training_samples);
  get("holdout_samples", c.holdout_samples);
  get("svm_C", c.svm_C);
  get("svm_gamma", c.svm_gamma);
  get("svm_tol", c.svm_tol);
  get("active_rounds", c.active_rounds);
  get("active_batch", c.active_batch);
  get("active_pool", c.active_pool);
  get("max_seeds", c.max_seeds);
  if (j.contains("pso")) {
    const json& p = j.at("pso");
    c.pso.swarm_size = p.value("swarm_size", c.pso.swarm_size);
    c.pso.iterations = p.value("iterations", c.pso.iterations);
    c.pso.inertia = p.value("inertia", c.pso.inertia);
    c.pso.cognitive = p.value("cognitive", c.pso.cognitive);
    c.pso.social = p.value("social", c.pso.social);
    c.pso.init_velocity = p.value("init_velocity", c.pso.init_velocity);
    c.pso.dedup_radius = p.value("dedup_radius", c.pso.dedup_radius);
  }
  get("cone_edges", c.cone_edges);
  get("friction_mu", c.friction_mu);
  if (j.contains("weights")) {
    c.weights.w1 = j.at("weights").value("w1", c.weights.w1);
    c.weights.w2 = j.at("weights").value("w2", c.weights.w2);
    c.weights.w3 = j.at("weights").value("w3", c.weights.w3);
  }
  if (j.contains("mapping")) {
    const json& m = j.at("mapping");
    c.mapping.delta = m.value("delta", c.mapping.delta);
    c.mapping.gamma = m.value("gamma", c.mapping.gamma);
    c.mapping.k_interp = m.value("k_interp", c.mapping.k_interp);
    c.mapping.r_interp_frac = m.value("r_interp_frac", c.mapping.r_interp_frac);
    c.mapping.align_max_iters =
        m.value("align_max_iters", c.mapping.align_max_iters);
    c.mapping.align_tol = m.value("align_tol", c.mapping.align_tol);
  }
  get("mapping_samples", c.mapping_samples);
  if (j.contains("replan_weights")) {
    const json& m = j.at("replan_weights");
    c.replan_weights.mu1 = m.value("mu1", c.replan_weights.mu1);
    c.replan_weights.mu2 = m.value("mu2", c.replan_weights.mu2);
    c.replan_weights.mu3 = m.value("mu3", c.replan_weights.mu3);
    c.replan_weights.mu4 = m.value("mu4", c.replan_weights.mu4);
  }
  if (j.contains("anneal")) {
    const json& a = j.at("anneal");
    c.anneal.initial_temperature =
        a.value("initial_temperature", c.anneal.initial_temperature);
    c.anneal.cooling_rate = a.value("cooling_rate", c.anneal.cooling_rate);
    c.anneal.iterations = a.value("iterations", c.anneal.iterations);
    c.anneal.neighbor_scale = a.value("neighbor_scale", c.anneal.neighbor_scale);
    c.anneal.exploration_batch =
        a.value("exploration_batch", c.anneal.exploration_batch);
    c.anneal.perturb_palm = a.value("perturb_palm", c.anneal.perturb_palm);
    c.anneal.palm_pos_step = a.value("palm_pos_step", c.anneal.palm_pos_step);
    c.anneal.palm_rot_step = a.value("palm_rot_step", c.anneal.palm_rot_step);
  }
  get("transfer_count", c.transfer_count);
  get("compare_baseline", c.compare_baseline);
  get("seed", c.seed);
  get("out_dir", c.out_dir);
  return c;
}

void validate_ranges(const RunConfig& c) {
  auto req = [](bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument("config: " + what);
  };
  req(c.sdf_num_parts >= 1, "sdf_num_parts >= 1");
  req(c.training_samples > 0, "training_samples > 0");
  req(c.holdout_samples >= 0 && c.holdout_samples < c.training_samples,
      "holdout_samples in [0, training_samples)");
  req(c.svm_C > 0, "svm_C > 0");
  req(c.pso.swarm_size >= 1, "pso.swarm_size >= 1");
  req(c.pso.iterations >= 0, "pso.iterations >= 0");
  req(c.cone_edges >= 3, "cone_edges >= 3");
  req(c.friction_mu >= 0, "friction_mu >= 0");
  req(c.mapping.delta > 0 && c.mapping.delta < M_PI,
      "mapping.delta in (0, pi)");
  req(c.anneal.cooling_rate > 0 && c.anneal.cooling_rate < 1,
      "anneal.cooling_rate in (0,1)");
  req(c.anneal.exploration_batch >= 1, "anneal.exploration_batch >= 1");
  req(c.anneal.iterations >= 0, "anneal.iterations >= 0");
  req(c.transfer_count >= 1, "transfer_count >= 1");
}

}  // namespace

std::string RunConfig::to_json_string() const {
  return config_to_json(*this).dump(2);
}

RunConfig RunConfig::from_json_string(const std::string& text) {
  RunConfig c = config_from_json(json::parse(text));
  validate_ranges(c);
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return from_json_string(buf.str());
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw GxError("cannot write " + path);
  out << to_json_string() << '\n';
}

std::string RunConfig::hash() const {
  char buf[17];
  snprintf(buf, sizeof(buf), "%016llx",
           static_cast<unsigned long long>(fnv1a(to_json_string())));
  return buf;
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Planned:
      return "planned";
    case Provenance::Transferred:
      return "transferred";
    case Provenance::Replanned:
      return "replanned";
    case Provenance::Baseline:
      return "baseline";
  }
  return "?";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "planned") return Provenance::Planned;
  if (s == "transferred") return Provenance::Transferred;
  if (s == "replanned") return Provenance::Replanned;
  if (s == "baseline") return Provenance::Baseline;
  throw ParseError("unknown provenance '" + s + "'");
}

namespace {

ordered_json grasp_to_json(const Grasp& g) {
  ordered_json j;
  const Mat3& r = g.config.palm_pose.rotation;
  j["palm_rotation"] = {r(0, 0), r(0, 1), r(0, 2), r(1, 0), r(1, 1),
                        r(1, 2), r(2, 0), r(2, 1), r(2, 2)};
  j["palm_translation"] = {g.config.palm_pose.translation.x(),
                           g.config.palm_pose.translation.y(),
                           g.config.palm_pose.translation.z()};
  std::vector<double> joints(g.config.joints.data(),
                             g.config.joints.data() + g.config.joints.size());
  j["joints"] = joints;
  ordered_json contacts = ordered_json::array();
  for (size_t i = 0; i < g.contacts.size(); ++i) {
    const Contact& c = g.contacts[i];
    contacts.push_back({{"p", {c.position.x(), c.position.y(), c.position.z()}},
                        {"n", {c.normal.x(), c.normal.y(), c.normal.z()}},
                        {"mu", c.friction_mu},
                        {"link", g.contact_links[i]}});
  }
  j["contacts"] = std::move(contacts);
  j["epsilon"] = g.quality.epsilon;
  j["force_closure"] = g.quality.force_closure;
  j["wrench_count"] = g.quality.wrench_count;
  j["part_id"] = g.part_id;
  j["provenance"] = to_string(g.provenance);
  j["measure"] = g.measure;
  j["source_index"] = g.source_index;
  return j;
}

Grasp grasp_from_json(const json& j) {
  Grasp g;
  auto r = j.at("palm_rotation");
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      g.config.palm_pose.rotation(i, k) = r[3 * i + k].get<double>();
  auto t = j.at("palm_translation");
  g.config.palm_pose.translation = Vec3(t[0], t[1], t[2]);
  auto joints = j.at("joints").get<std::vector<double>>();
  g.config.joints =
      Eigen::Map<const VecX>(joints.data(), static_cast<long>(joints.size()));
  for (const auto& cj : j.at("contacts")) {
    Contact c;
    auto p = cj.at("p");
    auto n = cj.at("n");
    c.position = Vec3(p[0], p[1], p[2]);
    c.normal = Vec3(n[0], n[1], n[2]);
    c.friction_mu = cj.at("mu").get<double>();
    g.contacts.push_back(c);
    g.contact_links.push_back(cj.at("link").get<int>());
  }
  g.quality.epsilon = j.at("epsilon").get<double>();
  g.quality.force_closure = j.at("force_closure").get<bool>();
  g.quality.wrench_count = j.at("wrench_count").get<int>();
  g.part_id = j.at("part_id").get<int>();
  g.provenance = provenance_from_string(j.at("provenance").get<std::string>());
  g.measure = j.at("measure").get<double>();
  g.source_index = j.value("source_index", -1);
  return g;
}

}  // namespace

void GraspDatabase::save(const std::string& path) const {
  for (const auto& g : records)
    if (!g.quality.force_closure)
      throw InvalidArgument("grasp database: record without force closure");
  ordered_json j;
  j["format"] = "graspxfer-grasps";
  j["schema_version"] = header.schema_version;
  j["tool_version"] = header.tool_version;
  j["hand_id"] = header.hand_id;
  j["object_id"] = header.object_id;
  j["part_id"] = header.part_id;
  j["config_hash"] = header.config_hash;
  j["config"] = config_json.empty() ? json::object()
                                    : json::parse(config_json);
  ordered_json recs = ordered_json::array();
  for (const auto& g : records) recs.push_back(grasp_to_json(g));
  j["records"] = std::move(recs);
  std::ofstream out(path);
  if (!out) throw GxError("cannot write " + path);
  out << j.dump(1) << '\n';
}

GraspDatabase GraspDatabase::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (j.value("format", "") != "graspxfer-grasps")
    throw ParseError(path + ": not a grasp database");
  GraspDatabase db;
  db.header.schema_version = j.at("schema_version").get<int>();
  if (db.header.schema_version != 1)
    throw ParseError(path + ": unsupported schema version");
  db.header.tool_version = j.at("tool_version").get<std::string>();
  db.header.hand_id = j.at("hand_id").get<std::string>();
  db.header.object_id = j.at("object_id").get<std::string>();
  db.header.part_id = j.at("part_id").get<int>();
  db.header.config_hash = j.at("config_hash").get<std::string>();
  db.config_json = j.at("config").dump();
  for (const auto& rj : j.at("records")) {
    Grasp g = grasp_from_json(rj);
    if (!g.quality.force_closure)
      throw ParseError(path + ": record without force closure");
    if (g.contacts.size() != g.contact_links.size())
      throw ParseError(path + ": malformed contact record");
    db.records.push_back(std::move(g));
  }
  return db;
}

}  // namespace gx
