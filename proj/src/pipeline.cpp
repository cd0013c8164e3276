#include "graspxfer/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "graspxfer/cspace.hpp"
#include "graspxfer/mapping.hpp"

namespace gx {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

SegmentedObject load_segmented_object(const std::string& object_path,
                                      const std::string& kind,
                                      const std::string& segmentation_path,
                                      const RunConfig& config) {
  GeometryKind gk;
  if (kind == "mesh")
    gk = GeometryKind::Mesh;
  else if (kind == "pointcloud")
    gk = GeometryKind::PointCloud;
  else
    throw InvalidArgument("object kind must be mesh or pointcloud, got " +
                          kind);
  Geometry geom = load_object(object_path, gk);
  if (!segmentation_path.empty())
    return load_segmentation(std::move(geom), segmentation_path);
  if (gk != GeometryKind::Mesh)
    throw InvalidArgument(
        "point-cloud objects need an explicit segmentation file");
  return segment_by_sdf(geom.mesh(), config.sdf_num_parts,
                        config.sdf_params());
}

HandModel load_hand_or_default(const RunConfig& config) {
  return config.hand_file.empty() ? make_default_hand()
                                  : load_hand(config.hand_file);
}

LearnOutput cmd_learn(const RunConfig& config) {
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  SegmentedObject object =
      load_segmented_object(config.example_object, config.example_kind,
                            config.example_segmentation, config);
  HandModel hand = load_hand_or_default(config);
  std::string config_json = config.to_json_string();
  std::string config_hash = config.hash();

  LearnOutput out;
  for (int part_id = 0; part_id < object.num_parts(); ++part_id) {
    const Geometry& part = object.parts[part_id];
    PartLearnStats stats;
    stats.part_id = part_id;
    Rng part_rng = Rng(config.seed).split(1000 + part_id);

    GraspDatabase db;
    db.header.hand_id = hand.name;
    db.header.object_id = config.example_object;
    db.header.part_id = part_id;
    db.header.config_hash = config_hash;
    db.config_json = config_json;

    auto t0 = std::chrono::steady_clock::now();
    std::vector<Grasp> grasps;
    try {
      ConfigSpec spec = make_config_spec(hand, part);
      std::vector<ConfigSample> samples = sample_and_label(
          hand, part, spec, config.training_samples, part_rng.next_u64());
      stats.samples = static_cast<int>(samples.size());
      std::vector<ConfigSample> holdout;
      if (config.holdout_samples > 0 &&
          config.holdout_samples < static_cast<int>(samples.size())) {
        holdout.assign(samples.end() - config.holdout_samples, samples.end());
        samples.resize(samples.size() - config.holdout_samples);
      }
      Classifier cls = train_classifier(samples, config.svm_params());
      cls.spec = spec;
      Rng refine_rng = part_rng.split(1);
      std::vector<double> trace;
      cls = active_learning_refine(cls, samples, hand_config_sampler(spec),
                                   hand_free_oracle(hand, part, spec),
                                   config.active_params(), refine_rng, holdout,
                                   &trace);
      cls.spec = spec;
      stats.holdout_accuracy = trace.empty() ? 0.0 : trace.back();
      stats.support_vectors = static_cast<int>(cls.svm.support_vectors.size());

      // Support vectors sit near the boundary; keep only the ones that
      // actually verify collision-free before seeding the swarm.
      std::vector<HandConfiguration> seeds;
      for (const auto& cfg : free_support_vectors(cls)) {
        if (static_cast<int>(seeds.size()) >= config.max_seeds) break;
        FkResult fk = hand.forward_kinematics(cfg);
        if (!check_collision(fk.links, part).in_collision)
          seeds.push_back(cfg);
      }
      stats.seeds = static_cast<int>(seeds.size());
      stats.learn_seconds = seconds_since(t0);

      auto t1 = std::chrono::steady_clock::now();
      if (!seeds.empty()) {
        PsoParams pso = config.pso;
        pso.seed = part_rng.split(2).next_u64();
        grasps = pso_plan_grasps(hand, part, spec, seeds, pso,
                                 config.eval_params());
      } else {
        out.warnings.push_back("part " + std::to_string(part_id) +
                               ": no collision-free seeds");
      }
      stats.search_seconds = seconds_since(t1);
    } catch (const InvalidArgument& e) {
      out.warnings.push_back("part " + std::to_string(part_id) + ": " +
                             e.what());
      stats.learn_seconds = seconds_since(t0);
    }

    if (grasps.empty())
      out.warnings.push_back("part " + std::to_string(part_id) +
                             ": zero stable grasps");
    for (auto& g : grasps) {
      g.part_id = part_id;
      g.provenance = Provenance::Planned;
    }
    stats.stable_grasps = static_cast<int>(grasps.size());
    db.records = std::move(grasps);
    db.save(config.out_dir + "/learn_part" + std::to_string(part_id) +
            ".grasps");
    out.databases.push_back(std::move(db));
    out.stats.push_back(stats);
  }

  std::ofstream stats_file(config.out_dir + "/learn_stats.txt");
  for (const auto& s : out.stats)
    stats_file << "part " << s.part_id << ": samples=" << s.samples
               << " support_vectors=" << s.support_vectors
               << " seeds=" << s.seeds << " stable=" << s.stable_grasps
               << " holdout_accuracy=" << s.holdout_accuracy
               << " learn_seconds=" << s.learn_seconds
               << " search_seconds=" << s.search_seconds << "\n";
  for (const auto& w : out.warnings) stats_file << "warning: " << w << "\n";
  return out;
}

TransferOutput cmd_transfer(const RunConfig& config,
                            const std::vector<GraspDatabase>& example_dbs) {
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  SegmentedObject example =
      load_segmented_object(config.example_object, config.example_kind,
                            config.example_segmentation, config);
  SegmentedObject novel =
      load_segmented_object(config.novel_object, config.novel_kind,
                            config.novel_segmentation, config);
  if (example.num_parts() != novel.num_parts())
    throw InvalidArgument("part-count mismatch: example has " +
                          std::to_string(example.num_parts()) +
                          " parts, novel has " +
                          std::to_string(novel.num_parts()));
  HandModel hand = load_hand_or_default(config);
  std::string config_json = config.to_json_string();
  std::string config_hash = config.hash();

  auto make_db = [&](int part_id) {
    GraspDatabase db;
    db.header.hand_id = hand.name;
    db.header.object_id = config.novel_object;
    db.header.part_id = part_id;
    db.header.config_hash = config_hash;
    db.config_json = config_json;
    return db;
  };

  TransferOutput out;
  out.transfer_stage = make_db(-1);
  out.final_stage = make_db(-1);
  out.baseline_stage = make_db(-1);
  out.baseline_final = make_db(-1);

  for (const auto& db : example_dbs) {
    int part_id = db.header.part_id;
    if (part_id < 0 || part_id >= example.num_parts())
      throw InvalidArgument("example database references part " +
                            std::to_string(part_id));
    Rng part_rng = Rng(config.seed).split(5000 + part_id);
    auto source_geom =
        std::make_shared<const Geometry>(example.parts[part_id]);
    auto target_geom = std::make_shared<const Geometry>(novel.parts[part_id]);
    SurfacePointSet A =
        source_geom->sample_points(config.mapping_samples, part_rng.next_u64());
    SurfacePointSet B =
        target_geom->sample_points(config.mapping_samples, part_rng.next_u64());
    CorrespondenceMapping mapping(source_geom, target_geom, std::move(A),
                                  std::move(B), config.mapping);
    mapping.save(config.out_dir + "/mapping_part" + std::to_string(part_id) +
                 ".json");

    PartTransferStats stats;
    stats.part_id = part_id;
    int count = std::min<int>(config.transfer_count,
                              static_cast<int>(db.records.size()));
    for (int i = 0; i < count; ++i) {
      const Grasp& example_grasp = db.records[i];
      ++stats.attempted;
      AnnealParams anneal = config.anneal;
      anneal.seed = part_rng.split(100 + i).next_u64();
      TransferResultGrasp tr =
          transfer_grasp(example_grasp, mapping, hand, *target_geom,
                         config.replan_weights, anneal, config.eval_params());
      if (tr.grasp) {
        tr.grasp->part_id = part_id;
        tr.grasp->source_index = i;
        out.transfer_stage.records.push_back(*tr.grasp);
        ++stats.transfer_ok;
      }
      if (config.compare_baseline) {
        TransferResultGrasp base = open_close_baseline(
            example_grasp, mapping, hand, *target_geom, config.eval_params());
        if (base.grasp) {
          base.grasp->part_id = part_id;
          base.grasp->source_index = i;
          out.baseline_stage.records.push_back(*base.grasp);
          ++stats.baseline_transfer_ok;
        }
      }
    }
    out.per_part.push_back(stats);
    out.attempted_total += stats.attempted;
    out.transfer_ok_total += stats.transfer_ok;
    out.baseline_transfer_ok_total += stats.baseline_transfer_ok;
  }

  // Assembly against the full novel object.
  AnnealParams assembly_anneal = config.anneal;
  assembly_anneal.seed = Rng(config.seed).split(9000).next_u64();
  AssemblyResult assembled = assemble_grasps(
      out.transfer_stage.records, novel.geometry, hand, config.replan_weights,
      assembly_anneal, config.eval_params(), true);
  out.final_stage.records = std::move(assembled.grasps);
  out.assembly_report = std::move(assembled.report);
  out.assembly_ok_total = static_cast<int>(out.final_stage.records.size());

  if (config.compare_baseline) {
    AssemblyResult base_assembled = assemble_grasps(
        out.baseline_stage.records, novel.geometry, hand,
        config.replan_weights, assembly_anneal, config.eval_params(), false);
    out.baseline_final.records = std::move(base_assembled.grasps);
    out.baseline_assembly_report = std::move(base_assembled.report);
    out.baseline_assembly_ok_total =
        static_cast<int>(out.baseline_final.records.size());
  }

  out.transfer_stage.save(config.out_dir + "/transfer_stage.grasps");
  out.final_stage.save(config.out_dir + "/final.grasps");
  if (config.compare_baseline) {
    out.baseline_stage.save(config.out_dir + "/baseline_stage.grasps");
    out.baseline_final.save(config.out_dir + "/baseline_final.grasps");
  }
  out.assembly_report.save_csv(config.out_dir + "/assembly_report.csv");

  // Success table, ours/baseline per stage.
  std::ofstream table(config.out_dir + "/success_rates.txt");
  table << "part attempted transfer_stage assembly_stage\n";
  for (const auto& s : out.per_part) {
    // Assembly successes per part.
    int ours_final = 0, base_final = 0;
    for (const auto& g : out.final_stage.records)
      if (g.part_id == s.part_id) ++ours_final;
    for (const auto& g : out.baseline_final.records)
      if (g.part_id == s.part_id) ++base_final;
    table << s.part_id << " " << s.attempted << " " << s.transfer_ok << "/"
          << s.baseline_transfer_ok << " " << ours_final << "/" << base_final
          << "\n";
  }
  table << "total " << out.attempted_total << " " << out.transfer_ok_total
        << "/" << out.baseline_transfer_ok_total << " "
        << out.assembly_ok_total << "/" << out.baseline_assembly_ok_total
        << "\n";
  return out;
}

ReportOutput cmd_report(const std::vector<GraspDatabase>& example_dbs,
                        const GraspDatabase& final_db,
                        const GraspDatabase& baseline_final_db,
                        const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  for (const auto& db : example_dbs)
    if (db.header.hand_id != final_db.header.hand_id)
      throw InvalidArgument("report: hand id mismatch between databases");

  auto example_eps = [&](int part_id, int index) -> double {
    for (const auto& db : example_dbs) {
      if (db.header.part_id != part_id) continue;
      if (index >= 0 && index < static_cast<int>(db.records.size()))
        return db.records[index].quality.epsilon;
    }
    return -1.0;
  };

  ReportOutput out;
  {
    std::ofstream csv(out_dir + "/quality_ratios.csv");
    csv << "part,source_index,example_epsilon,final_epsilon,ratio\n";
    csv.precision(17);
    for (const auto& g : final_db.records) {
      double ex = example_eps(g.part_id, g.source_index);
      if (ex <= 0.0) continue;
      ++out.ratio_count;
      if (g.quality.epsilon > ex) ++out.more_stable_than_example;
      csv << g.part_id << ',' << g.source_index << ',' << ex << ','
          << g.quality.epsilon << ',' << g.quality.epsilon / ex << '\n';
    }
  }
  {
    std::ofstream csv(out_dir + "/ours_vs_baseline.csv");
    csv << "part,source_index,baseline_epsilon,ours_epsilon\n";
    csv.precision(17);
    for (const auto& g : final_db.records) {
      if (g.source_index < 0) continue;
      for (const auto& b : baseline_final_db.records) {
        if (b.part_id == g.part_id && b.source_index == g.source_index) {
          ++out.pairs;
          if (g.quality.epsilon > b.quality.epsilon) ++out.above_diagonal;
          csv << g.part_id << ',' << g.source_index << ','
              << b.quality.epsilon << ',' << g.quality.epsilon << '\n';
          break;
        }
      }
    }
  }
  out.above_diagonal_fraction =
      out.pairs > 0 ? double(out.above_diagonal) / out.pairs : 0.0;
  {
    std::ofstream txt(out_dir + "/report_summary.txt");
    txt << "paired_grasps " << out.pairs << "\n"
        << "above_diagonal " << out.above_diagonal << "\n"
        << "above_diagonal_fraction " << out.above_diagonal_fraction << "\n"
        << "ratio_count " << out.ratio_count << "\n"
        << "more_stable_than_example " << out.more_stable_than_example << "\n";
  }
  return out;
}

EvaluateOutput cmd_evaluate(const GraspDatabase& db, const Geometry& object,
                            const HandModel& hand,
                            const GraspEvalParams& eval) {
  EvaluateOutput out;
  for (size_t i = 0; i < db.records.size(); ++i) {
    const Grasp& g = db.records[i];
    std::string tag = "record " + std::to_string(i);
    try {
      validate_configuration(hand, g.config, LimitMode::Reject);
    } catch (const InvalidArgument& e) {
      out.failures.push_back(tag + ": " + e.what());
      continue;
    }
    FkResult fk = hand.forward_kinematics(g.config);
    double worst = 0.0;
    for (const auto& link : fk.links)
      worst = std::max(worst, -primitive_clearance(link, object));
    if (worst > kContactTol) {
      out.failures.push_back(tag + ": penetrates object by " +
                             std::to_string(worst));
      continue;
    }
    try {
      CloseResult closed = close_fingers(hand, g.config, object);
      GraspQuality q = epsilon_quality(
          contacts_from_events(closed.contacts, eval.friction_mu),
          object_quality_params(object, eval.cone_edges));
      if (std::abs(q.epsilon - g.quality.epsilon) > 1e-6) {
        out.failures.push_back(tag + ": stored epsilon " +
                               std::to_string(g.quality.epsilon) +
                               " vs recomputed " + std::to_string(q.epsilon));
        continue;
      }
      if (!q.force_closure)
        out.failures.push_back(tag + ": no longer force closure");
    } catch (const GxError& e) {
      out.failures.push_back(tag + ": " + e.what());
    }
  }
  out.ok = out.failures.empty();
  return out;
}

}  // namespace gx
