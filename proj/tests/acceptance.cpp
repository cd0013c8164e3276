// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Budgets are asserted alongside the functional conditions.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "graspxfer/pipeline.hpp"
#include "graspxfer/cspace.hpp"
#include "graspxfer/mapping.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace gx;
using namespace gxtest;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<bool(std::string&)> run;
};

bool g_all_pass = true;

void run_criterion(const Criterion& c) {
  std::string detail;
  auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  try {
    ok = c.run(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  double elapsed = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  bool in_budget = elapsed < c.budget_seconds;
  bool pass = ok && in_budget;
  g_all_pass = g_all_pass && pass;
  std::printf("[%s] criterion %d: %s (%.1fs / %.0fs budget)%s%s\n",
              pass ? "PASS" : "FAIL", c.id, c.name.c_str(), elapsed,
              c.budget_seconds, detail.empty() ? "" : " - ",
              detail.c_str());
  std::fflush(stdout);
}

// ---------------------------------------------------------------------------
// Shared scene helpers

std::vector<Contact> random_contact_set(Rng& rng, int count, double mu,
                                        bool on_sphere) {
  std::vector<Contact> out;
  for (int i = 0; i < count; ++i) {
    if (on_sphere) {
      Vec3 dir(rng.gaussian(), rng.gaussian(), rng.gaussian());
      dir.normalize();
      out.push_back({dir, -dir, mu});
    } else {
      int face = static_cast<int>(rng.uniform_index(6));
      int axis = face / 2;
      double sign = face % 2 == 0 ? 1.0 : -1.0;
      Vec3 p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
      p[axis] = sign;
      Vec3 n = Vec3::Zero();
      n[axis] = -sign;
      out.push_back({p, n, mu});
    }
  }
  return out;
}

std::vector<HandConfiguration> collision_free_approaches(
    const HandModel& hand, const Geometry& object, const Vec3& center,
    double dist_lo, double dist_hi, int want, Rng& rng) {
  std::vector<HandConfiguration> out;
  int guard = 0;
  while (static_cast<int>(out.size()) < want && guard++ < 4000) {
    Vec3 dir(rng.gaussian(), rng.gaussian(), rng.gaussian());
    if (dir.norm() < 1e-6) continue;
    HandConfiguration c =
        approach_config(hand, center, dir, rng.uniform(dist_lo, dist_hi),
                        rng.uniform(0, 2 * M_PI));
    FkResult fk = hand.forward_kinematics(c);
    if (!check_collision(fk.links, object).in_collision) out.push_back(c);
  }
  return out;
}

std::vector<Grasp> plan_example_grasps(const HandModel& hand,
                                       const Geometry& object,
                                       const Vec3& center, int want,
                                       uint64_t seed) {
  std::vector<Grasp> grasps;
  Rng rng(seed);
  int guard = 0;
  while (static_cast<int>(grasps.size()) < want && guard++ < 6000) {
    Vec3 dir(rng.gaussian(), rng.gaussian(), rng.gaussian());
    if (dir.norm() < 1e-6) continue;
    HandConfiguration c =
        approach_config(hand, center, dir, rng.uniform(0.095, 0.13),
                        rng.uniform(0, 2 * M_PI));
    FkResult fk = hand.forward_kinematics(c);
    if (check_collision(fk.links, object).in_collision) continue;
    auto g = is_stable_grasp(hand, c, object);
    if (g) grasps.push_back(*g);
  }
  return grasps;
}

// ---------------------------------------------------------------------------
// Criteria

bool criterion_epsilon_oracle(std::string& detail) {
  Rng rng(20240001);
  const double mus[3] = {0.3, 0.5, 0.8};
  int flag_mismatch = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    int count = 2 + static_cast<int>(rng.uniform_index(5));  // 2..6
    double mu = mus[rng.uniform_index(3)];
    bool on_sphere = trial % 2 == 0;
    std::vector<Contact> contacts = random_contact_set(rng, count, mu, on_sphere);
    QualityParams qp;
    qp.cone_edges = 8;
    qp.torque_scale = 1.0;
    GraspQuality q = epsilon_quality(contacts, qp);
    OracleQuality oracle =
        oracle_epsilon_quality(contacts, 8, 1.0, Vec3::Zero());
    if (q.force_closure != oracle.force_closure) ++flag_mismatch;
    worst = std::max(worst, std::abs(q.epsilon - oracle.epsilon));
  }
  std::ostringstream os;
  os << "200 sets, max |eps diff| = " << worst << ", flag mismatches = "
     << flag_mismatch;
  detail = os.str();
  return flag_mismatch == 0 && worst < 1e-6;
}

bool criterion_rigid_recovery(std::string& detail) {
  MugFixture mug = make_mug();
  SurfacePointSet A = sample_surface_points(mug.mesh, 800, 5);
  Rng rng(20240002);
  double worst_angle = 0.0, worst_trans = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Vec3 axis(rng.gaussian(), rng.gaussian(), rng.gaussian());
    axis.normalize();
    Pose truth;
    truth.rotation =
        Eigen::AngleAxisd(rng.uniform(0.0, 30.0 * M_PI / 180.0), axis)
            .toRotationMatrix();
    truth.translation = Vec3(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1),
                             rng.uniform(-0.1, 0.1));
    SurfacePointSet B;
    for (size_t i = 0; i < A.size(); ++i) {
      B.points.push_back(truth.apply(A.points[i]));
      B.normals.push_back(truth.rotate(A.normals[i]));
    }
    Pose rec = rigid_align(A, B);
    worst_angle = std::max(
        worst_angle,
        Eigen::AngleAxisd(rec.rotation.transpose() * truth.rotation).angle());
    worst_trans =
        std::max(worst_trans, (rec.translation - truth.translation).norm());
  }
  std::ostringstream os;
  os << "50 trials, worst angle " << worst_angle << " rad, worst translation "
     << worst_trans << " m";
  detail = os.str();
  return worst_angle < 1e-3 && worst_trans < 1e-4;
}

bool criterion_mapping_identity(std::string& detail) {
  MugFixture mug = make_mug();
  auto geom = std::make_shared<const Geometry>(mug.mesh);
  SurfacePointSet A = sample_surface_points(mug.mesh, 1000, 11);
  CorrespondenceMapping mapping(geom, geom, A, A, {});

  int identity_ok = 0;
  for (size_t a = 0; a < A.size(); ++a) {
    auto f = mapping.forward_map_point(static_cast<int>(a));
    auto b = mapping.backward_map_point(static_cast<int>(a));
    if (f && *f == static_cast<int>(a) && b && *b == static_cast<int>(a))
      ++identity_ok;
  }
  SurfacePointSet probes = sample_surface_points(mug.mesh, 500, 13);
  int consistent = 0;
  for (const auto& p : probes.points)
    if (mapping.consistency_check(p)) ++consistent;

  // Exhaustive scans on a distinct-sample mapping, 1000 random queries.
  SurfacePointSet B = sample_surface_points(mug.mesh, 1000, 17);
  CorrespondenceMapping general(geom, geom, A, B, {});
  const Pose& t = general.transform();
  double cos_delta = std::cos(general.params().delta);
  int oracle_ok = 0;
  Rng rng(20240003);
  for (int q = 0; q < 1000; ++q) {
    if (q % 2 == 0) {
      int a = static_cast<int>(rng.uniform_index(A.size()));
      Vec3 pa = t.apply(A.points[a]);
      Vec3 na = t.rotate(A.normals[a]);
      int best = -1;
      double best_d = std::numeric_limits<double>::max();
      for (size_t b = 0; b < B.size(); ++b) {
        if (B.normals[b].dot(na) <= cos_delta) continue;
        double d = (pa - B.points[b]).norm();
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(b);
        }
      }
      auto f = general.forward_map_point(a);
      if ((f ? *f : -1) == best) ++oracle_ok;
    } else {
      int b = static_cast<int>(rng.uniform_index(B.size()));
      int best = -1;
      double best_d = std::numeric_limits<double>::max();
      for (size_t a = 0; a < A.size(); ++a) {
        if (t.rotate(A.normals[a]).dot(B.normals[b]) <= cos_delta) continue;
        double d = (t.apply(A.points[a]) - B.points[b]).norm();
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(a);
        }
      }
      auto g = general.backward_map_point(b);
      if ((g ? *g : -1) == best) ++oracle_ok;
    }
  }
  std::ostringstream os;
  os << "identity maps " << identity_ok << "/" << A.size() << ", consistency "
     << consistent << "/500, oracle " << oracle_ok << "/1000";
  detail = os.str();
  return identity_ok == static_cast<int>(A.size()) && consistent == 500 &&
         oracle_ok == 1000;
}

bool criterion_toy_cspace(std::string& detail) {
  auto sampler = [](Rng& rng) {
    VecX x(2);
    x << rng.uniform(-1, 1), rng.uniform(-1, 1);
    return x;
  };
  auto oracle = [](const VecX& x) { return x.norm() > 0.4; };
  std::ostringstream os;
  bool ok = true;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    std::vector<ConfigSample> samples = label_samples(sampler, oracle, 300, rng);
    std::vector<ConfigSample> holdout = label_samples(sampler, oracle, 2000, rng);
    SvmParams svm;
    svm.gamma = 8.0;
    Classifier c = train_classifier(samples, svm);
    ActiveLearnParams params;
    params.rounds = 3;
    params.batch = 150;
    params.pool = 1500;
    params.svm = svm;
    std::vector<double> trace;
    active_learning_refine(c, samples, sampler, oracle, params, rng, holdout,
                           &trace);
    double before = trace.front(), after = trace.back();
    os << "seed " << seed << ": " << before << " -> " << after << "; ";
    if (after < 0.90 || after < before - 1e-12) ok = false;
  }
  detail = os.str();
  return ok;
}

bool criterion_pso(std::string& detail) {
  HandModel hand = make_default_hand();
  std::vector<std::pair<std::string, Geometry>> scenes;
  Vec3 sphere_center(0, 0, 0.062);
  scenes.emplace_back("sphere",
                      Geometry(make_uv_sphere(0.04, sphere_center, 48, 24)));
  Vec3 box_center(0, 0, 0.052);
  scenes.emplace_back(
      "box", Geometry(make_box_mesh(Vec3(0.03, 0.03, 0.03), box_center)));

  int runs = 0, ok_runs = 0;
  bool monotone = true;
  for (auto& [name, object] : scenes) {
    Vec3 center = name == "sphere" ? sphere_center : box_center;
    ConfigSpec spec = make_config_spec(hand, object);
    for (uint64_t seed = 1; seed <= 5; ++seed) {
      Rng rng(900 + seed);
      std::vector<HandConfiguration> seeds = collision_free_approaches(
          hand, object, center, 0.10, 0.13, 5, rng);
      PsoParams params;
      params.swarm_size = 64;
      params.iterations = 200;
      params.seed = seed;
      PsoTrace trace;
      std::vector<Grasp> grasps =
          pso_plan_grasps(hand, object, spec, seeds, params, {}, &trace);
      ++runs;
      bool found = false;
      for (const auto& g : grasps)
        if (g.quality.force_closure && g.quality.epsilon > 0.0) found = true;
      if (found && !grasps.empty()) ++ok_runs;
      for (size_t i = 1; i < trace.gbest_history.size(); ++i)
        if (trace.gbest_history[i] > trace.gbest_history[i - 1] + 1e-12)
          monotone = false;
    }
  }
  std::ostringstream os;
  os << ok_runs << "/" << runs << " runs found a force-closure grasp, gbest "
     << (monotone ? "monotone" : "NOT monotone");
  detail = os.str();
  return ok_runs >= 8 && monotone;
}

bool criterion_self_transfer(std::string& detail) {
  HandModel hand = make_default_hand();
  Vec3 center(0, 0, 0.062);
  Geometry object(make_uv_sphere(0.04, center, 48, 24));
  std::vector<Grasp> grasps = plan_example_grasps(hand, object, center, 40, 31);
  if (grasps.size() < 40) {
    detail = "only " + std::to_string(grasps.size()) + " example grasps";
    return false;
  }
  auto geom = std::make_shared<const Geometry>(object);
  SurfacePointSet A = sample_surface_points(object.mesh(), 1000, 37);
  CorrespondenceMapping mapping(geom, geom, A, A, {});

  int ok = 0;
  bool monotone = true;
  for (size_t i = 0; i < grasps.size(); ++i) {
    auto targets = mapping.map_grasp_contacts(grasps[i]);
    if (!targets) continue;
    std::vector<ContactWitness> witnesses = make_contact_witnesses(hand, grasps[i]);
    HandConfiguration initial = grasps[i].config;
    initial.palm_pose = mapping.transform().compose(initial.palm_pose);
    AnnealParams params;
    params.iterations = 100;
    params.seed = 4000 + i;
    AnnealTrace trace;
    std::optional<Grasp> result = anneal_replan(
        hand, initial, object, witnesses, *targets, {}, params, {}, &trace);
    if (result && result->quality.force_closure) ++ok;
    for (size_t k = 1; k < trace.best_objective.size(); ++k)
      if (trace.best_objective[k] > trace.best_objective[k - 1] + 1e-12)
        monotone = false;
  }
  std::ostringstream os;
  os << ok << "/40 self-transfers stable, best objective "
     << (monotone ? "monotone" : "NOT monotone");
  detail = os.str();
  return ok >= 36 && monotone;
}

// Shared by criteria 7 and 8.
struct ScaledTransferResult {
  bool ran = false;
  int attempted = 0;
  int transfer_ok = 0;
  int assembly_ok = 0;
  int baseline_transfer_ok = 0;
  int baseline_assembly_ok = 0;
  int pairs = 0;
  int above_diagonal = 0;
};
ScaledTransferResult g_scaled;

bool criterion_scaled_transfer(std::string& detail) {
  const std::string dir = "/tmp/gx_acceptance_scaled";
  fs::remove_all(dir);
  fs::create_directories(dir);
  MugFixture mug = make_mug();
  save_obj(mug.mesh, dir + "/mug.obj");
  save_segmentation(mug.labels, dir + "/mug_labels.txt");
  TriangleMesh scaled = scale_mesh(mug.mesh, 1.1);
  save_obj(scaled, dir + "/novel.obj");
  save_segmentation(mug.labels, dir + "/novel_labels.txt");

  RunConfig config;
  config.example_object = dir + "/mug.obj";
  config.example_segmentation = dir + "/mug_labels.txt";
  config.novel_object = dir + "/novel.obj";
  config.novel_segmentation = dir + "/novel_labels.txt";
  config.mapping_samples = 1200;
  config.anneal.iterations = 150;
  config.transfer_count = 40;
  config.compare_baseline = true;
  config.seed = 71;
  config.out_dir = dir + "/out";

  // 40 example grasps of the mug body, planned directly on the part.
  SegmentedObject example = load_segmented_object(
      config.example_object, "mesh", config.example_segmentation, config);
  HandModel hand = load_hand_or_default(config);
  Vec3 body_center = example.parts[0].bounds().center();
  std::vector<Grasp> body_grasps =
      plan_example_grasps(hand, example.parts[0], body_center, 40, 61);
  if (body_grasps.size() < 40) {
    detail = "only " + std::to_string(body_grasps.size()) + " example grasps";
    return false;
  }
  GraspDatabase example_db;
  example_db.header.hand_id = hand.name;
  example_db.header.object_id = config.example_object;
  example_db.header.part_id = 0;
  example_db.header.config_hash = config.hash();
  example_db.config_json = config.to_json_string();
  for (auto& g : body_grasps) g.part_id = 0;
  example_db.records = body_grasps;

  TransferOutput out = cmd_transfer(config, {example_db});
  ReportOutput report = cmd_report({example_db}, out.final_stage,
                                   out.baseline_final, config.out_dir);

  g_scaled.ran = true;
  g_scaled.attempted = out.attempted_total;
  g_scaled.transfer_ok = out.transfer_ok_total;
  g_scaled.assembly_ok = out.assembly_ok_total;
  g_scaled.baseline_transfer_ok = out.baseline_transfer_ok_total;
  g_scaled.baseline_assembly_ok = out.baseline_assembly_ok_total;
  g_scaled.pairs = report.pairs;
  g_scaled.above_diagonal = report.above_diagonal;

  std::ostringstream os;
  os << "transfer " << out.transfer_ok_total << "/40 (baseline "
     << out.baseline_transfer_ok_total << "), assembly "
     << out.assembly_ok_total << " (baseline "
     << out.baseline_assembly_ok_total << ")";
  detail = os.str();
  return out.attempted_total == 40 && out.transfer_ok_total >= 28 &&
         out.assembly_ok_total <= out.transfer_ok_total &&
         out.transfer_ok_total >= out.baseline_transfer_ok_total &&
         out.assembly_ok_total >= out.baseline_assembly_ok_total;
}

bool criterion_quality_comparison(std::string& detail) {
  if (!g_scaled.ran) {
    detail = "scaled-transfer run unavailable";
    return false;
  }
  std::ostringstream os;
  double fraction = g_scaled.pairs > 0
                        ? double(g_scaled.above_diagonal) / g_scaled.pairs
                        : 0.0;
  os << g_scaled.above_diagonal << "/" << g_scaled.pairs
     << " pairs above the diagonal (" << fraction << ")";
  detail = os.str();
  return g_scaled.pairs > 0 && fraction > 0.5;
}

bool criterion_assembly_soundness(std::string& detail) {
  HandModel hand = make_default_hand();
  MugFixture mug = make_mug();
  Geometry full(mug.mesh);
  SegmentedObject seg = make_segmented(Geometry(mug.mesh), mug.labels);
  const Geometry& handle = seg.parts[1];
  Vec3 handle_center = handle.bounds().center();

  std::vector<Grasp> grasps;
  Rng rng(91);
  int guard = 0;
  while (static_cast<int>(grasps.size()) < 12 && guard++ < 1000) {
    Vec3 dir(rng.uniform(-1.0, 0.3), rng.uniform(-1, 1), rng.uniform(-0.6, 0.6));
    if (dir.norm() < 1e-6) continue;
    HandConfiguration c =
        approach_config(hand, handle_center, dir, rng.uniform(0.1, 0.13),
                        rng.uniform(0, 2 * M_PI));
    FkResult fk = hand.forward_kinematics(c);
    if (check_collision(fk.links, handle).in_collision) continue;
    auto g = is_stable_grasp(hand, c, handle);
    if (!g) continue;
    g->part_id = 1;
    grasps.push_back(*g);
  }
  if (grasps.size() < 6) {
    detail = "could not build the handle fixture";
    return false;
  }
  AnnealParams anneal;
  anneal.iterations = 100;
  anneal.seed = 97;
  AssemblyResult result = assemble_grasps(grasps, full, hand, {}, anneal, {});

  bool partition = result.report.total() == static_cast<int>(grasps.size()) &&
                   result.report.entries.size() == grasps.size();
  bool interference = result.report.kept < static_cast<int>(grasps.size());
  bool sound = true;
  for (const auto& g : result.grasps) {
    if (!g.quality.force_closure) sound = false;
    FkResult fk = hand.forward_kinematics(g.config);
    for (const auto& link : fk.links)
      if (primitive_clearance(link, full) < -kContactTol) sound = false;
  }
  std::ostringstream os;
  os << grasps.size() << " fixture grasps: kept " << result.report.kept
     << ", replanned " << result.report.replanned_ok << ", failed "
     << result.report.replanned_failed << ", discarded "
     << result.report.discarded_palm;
  detail = os.str();
  return partition && interference && sound;
}

bool criterion_determinism(std::string& detail) {
  const std::string dir = "/tmp/gx_acceptance_det";
  fs::remove_all(dir);
  fs::create_directories(dir);
  MugFixture mug = make_mug();
  save_obj(mug.mesh, dir + "/mug.obj");
  save_segmentation(mug.labels, dir + "/labels.txt");
  TriangleMesh scaled = scale_mesh(mug.mesh, 1.1);
  save_obj(scaled, dir + "/novel.obj");
  save_segmentation(mug.labels, dir + "/novel_labels.txt");

  RunConfig config;
  config.example_object = dir + "/mug.obj";
  config.example_segmentation = dir + "/labels.txt";
  config.novel_object = dir + "/novel.obj";
  config.novel_segmentation = dir + "/novel_labels.txt";
  config.training_samples = 600;
  config.holdout_samples = 100;
  config.active_rounds = 1;
  config.active_batch = 50;
  config.active_pool = 250;
  config.max_seeds = 8;
  config.pso.swarm_size = 10;
  config.pso.iterations = 5;
  config.mapping_samples = 400;
  config.anneal.iterations = 30;
  config.transfer_count = 4;
  config.compare_baseline = true;
  config.seed = 2024;
  config.out_dir = dir + "/out";

  auto read_file = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  LearnOutput learn = cmd_learn(config);
  std::string l0 = read_file(config.out_dir + "/learn_part0.grasps");
  std::string l1 = read_file(config.out_dir + "/learn_part1.grasps");
  int learned = 0;
  for (const auto& db : learn.databases) learned += db.records.size();

  std::string t0, t1;
  if (learned > 0) {
    cmd_transfer(config, learn.databases);
    t0 = read_file(config.out_dir + "/transfer_stage.grasps");
    t1 = read_file(config.out_dir + "/final.grasps");
  }

  LearnOutput learn2 = cmd_learn(config);
  bool learn_same = read_file(config.out_dir + "/learn_part0.grasps") == l0 &&
                    read_file(config.out_dir + "/learn_part1.grasps") == l1;
  bool transfer_same = true;
  if (learned > 0) {
    cmd_transfer(config, learn2.databases);
    transfer_same =
        read_file(config.out_dir + "/transfer_stage.grasps") == t0 &&
        read_file(config.out_dir + "/final.grasps") == t1;
  }
  std::ostringstream os;
  os << "learned " << learned << " grasps; learn "
     << (learn_same ? "identical" : "DIFFERS") << ", transfer "
     << (transfer_same ? "identical" : "DIFFERS");
  detail = os.str();
  return learn_same && transfer_same && learned > 0;
}

bool criterion_objective_correctness(std::string& detail) {
  HandModel hand = make_default_hand();
  Rng rng(20240011);
  ReplanWeights w;
  std::vector<ContactWitness> witnesses;
  std::vector<TargetContact> targets;
  for (int i : {3, 7, 11}) {
    ContactWitness wit;
    wit.link = hand.points[i].link;
    wit.local_point = hand.points[i].position;
    wit.local_normal = hand.points[i].normal;
    witnesses.push_back(wit);
    targets.push_back(
        {Vec3(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
              rng.uniform(0.05, 0.12)),
         Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian()).normalized()});
  }
  double worst_rel = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    HandConfiguration config = hand.rest_configuration();
    for (int d = 0; d < hand.dof_count(); ++d) {
      const Dof& dof = hand.dofs[d];
      config.joints[d] = rng.uniform(dof.lower + 0.1 * (dof.upper - dof.lower),
                                     dof.upper - 0.1 * (dof.upper - dof.lower));
    }
    VecX u(hand.dof_count());
    for (int d = 0; d < hand.dof_count(); ++d) u[d] = rng.gaussian();
    u.normalize();
    const double h = 1e-6;
    HandConfiguration plus = config, minus = config;
    plus.joints += h * u;
    minus.joints -= h * u;
    double f_plus =
        replanning_objective_smooth(hand, plus, witnesses, targets, w);
    double f_minus =
        replanning_objective_smooth(hand, minus, witnesses, targets, w);
    double fd = (f_plus - f_minus) / (2.0 * h);

    // Analytic directional derivative through the witness chains.
    FkResult fk = hand.forward_kinematics(config);
    VecX grad = VecX::Zero(hand.dof_count());
    for (size_t i = 0; i < witnesses.size(); ++i) {
      Vec3 c = fk.link_poses[witnesses[i].link].apply(witnesses[i].local_point);
      Vec3 n = fk.link_poses[witnesses[i].link].rotate(witnesses[i].local_normal);
      for (int link = witnesses[i].link; link >= 0;
           link = hand.links[link].parent) {
        const Joint& joint = hand.links[link].joint;
        if (joint.fixed) continue;
        int dof = joint.dof >= 0 ? joint.dof : joint.master_dof;
        double ratio = joint.dof >= 0 ? 1.0 : joint.ratio;
        Vec3 axis = fk.link_poses[link].rotation * joint.axis;
        Vec3 origin = fk.link_poses[link].translation;
        grad[dof] += 2.0 * w.mu1 *
                     (c - targets[i].point).dot(ratio * axis.cross(c - origin));
        grad[dof] += w.mu2 * std::exp(w.mu2 * n.dot(targets[i].normal)) *
                     (ratio * axis.cross(n)).dot(targets[i].normal);
      }
    }
    for (int k = 0; k < hand.dof_count(); ++k) {
      const Dof& dof = hand.dofs[k];
      grad[k] += -w.mu3 * std::exp(w.mu3 * (dof.lower - config.joints[k]));
      grad[k] += w.mu3 * std::exp(w.mu3 * (config.joints[k] - dof.upper));
    }
    double analytic = grad.dot(u);
    double scale = std::max({std::abs(fd), std::abs(analytic), 1e-6});
    worst_rel = std::max(worst_rel, std::abs(fd - analytic) / scale);
  }

  // Closed-form single-point measure example.
  TriangleMesh patch = make_plane_patch(1.0);
  Geometry geom(patch);
  std::vector<Vec3> pts{Vec3(0, 0, 0.1)};
  std::vector<Vec3> nrm{Vec3(0, 0, -1)};
  GraspQuality q;
  double measure = hybrid_grasp_measure(pts, nrm, geom, q, {});
  bool exact = std::abs(measure - 122.002) < 1e-9;

  std::ostringstream os;
  os << "worst relative FD error " << worst_rel << ", measure example = "
     << measure;
  detail = os.str();
  return worst_rel < 1e-4 && exact;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria{
      {1, "epsilon-quality oracle equivalence", 60, criterion_epsilon_oracle},
      {2, "rigid-transform recovery", 30, criterion_rigid_recovery},
      {3, "mapping identity and oracle checks", 30, criterion_mapping_identity},
      {4, "toy c-space learning", 120, criterion_toy_cspace},
      {5, "pso grasp discovery", 600, criterion_pso},
      {6, "self-transfer fixed point", 600, criterion_self_transfer},
      {7, "scaled-transfer success rates", 1200, criterion_scaled_transfer},
      {8, "quality comparison vs baseline", 60, criterion_quality_comparison},
      {9, "assembly soundness", 120, criterion_assembly_soundness},
      {10, "determinism of learn/transfer", 600, criterion_determinism},
      {11, "objective correctness", 30, criterion_objective_correctness},
  };
  for (const auto& c : criteria) run_criterion(c);
  std::printf("%s\n", g_all_pass ? "ALL CRITERIA PASSED" : "CRITERIA FAILED");
  return g_all_pass ? 0 : 1;
}
