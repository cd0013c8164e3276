#include <filesystem>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "graspxfer/cspace.hpp"
#include "graspxfer/mapping.hpp"
#include "graspxfer/pipeline.hpp"

namespace fs = std::filesystem;
using namespace gx;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  bool seed_set = false;
  bool compare_baseline = false;
  std::vector<int> parts;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool need_config = true) {
  auto* c = cmd->add_option("--config", opts.config_path, "run config (json)");
  if (need_config) c->required();
  cmd->add_option("--out", opts.out_dir, "output directory override");
  cmd->add_option("--seed", opts.seed, "seed override")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
  cmd->add_flag("--compare-baseline", opts.compare_baseline,
                "also run the open-close comparison method");
  cmd->add_option("--parts", opts.parts, "restrict to these part ids");
}

RunConfig resolve_config(const CommonOpts& opts) {
  RunConfig config = RunConfig::load(opts.config_path);
  if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
  if (opts.seed_set) config.seed = opts.seed;
  if (opts.compare_baseline) config.compare_baseline = true;
  return config;
}

bool selected(const std::vector<int>& parts, int id) {
  return parts.empty() ||
         std::find(parts.begin(), parts.end(), id) != parts.end();
}

int run_segment(const CommonOpts& opts) {
  RunConfig config = resolve_config(opts);
  TriangleMesh mesh = load_mesh(config.example_object);
  SegmentedObject seg =
      segment_by_sdf(mesh, config.sdf_num_parts, config.sdf_params());
  fs::create_directories(config.out_dir);
  std::string path = config.out_dir + "/labels.txt";
  save_segmentation(seg.labels, path);
  std::cout << "segmented " << config.example_object << " into "
            << seg.num_parts() << " parts -> " << path << "\n";
  return 0;
}

int run_learn(const CommonOpts& opts) {
  RunConfig config = resolve_config(opts);
  LearnOutput out = cmd_learn(config);
  for (const auto& s : out.stats) {
    if (!selected(opts.parts, s.part_id)) continue;
    std::cout << "part " << s.part_id << ": " << s.stable_grasps
              << " stable grasps (seeds " << s.seeds << ", holdout acc "
              << s.holdout_accuracy << ")\n";
  }
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

int run_align(const CommonOpts& opts) {
  RunConfig config = resolve_config(opts);
  SegmentedObject example =
      load_segmented_object(config.example_object, config.example_kind,
                            config.example_segmentation, config);
  SegmentedObject novel =
      load_segmented_object(config.novel_object, config.novel_kind,
                            config.novel_segmentation, config);
  if (example.num_parts() != novel.num_parts())
    throw InvalidArgument("part-count mismatch between objects");
  fs::create_directories(config.out_dir);
  for (int p = 0; p < example.num_parts(); ++p) {
    if (!selected(opts.parts, p)) continue;
    Rng rng = Rng(config.seed).split(5000 + p);
    auto src = std::make_shared<const Geometry>(example.parts[p]);
    auto dst = std::make_shared<const Geometry>(novel.parts[p]);
    SurfacePointSet A = src->sample_points(config.mapping_samples, rng.next_u64());
    SurfacePointSet B = dst->sample_points(config.mapping_samples, rng.next_u64());
    CorrespondenceMapping mapping(src, dst, std::move(A), std::move(B),
                                  config.mapping);
    std::string path =
        config.out_dir + "/mapping_part" + std::to_string(p) + ".json";
    mapping.save(path);
    std::cout << "part " << p << ": aligned (" << mapping.align_trace().objective.size()
              << " iterations) -> " << path << "\n";
  }
  return 0;
}

std::vector<GraspDatabase> load_example_dbs(const RunConfig& config,
                                            const std::vector<int>& parts) {
  std::vector<GraspDatabase> dbs;
  for (int p = 0;; ++p) {
    std::string path =
        config.out_dir + "/learn_part" + std::to_string(p) + ".grasps";
    if (!fs::exists(path)) break;
    if (selected(parts, p)) dbs.push_back(GraspDatabase::load(path));
  }
  if (dbs.empty())
    throw InvalidArgument("no learn_part*.grasps databases under " +
                          config.out_dir + "; run learn first");
  return dbs;
}

int run_transfer(const CommonOpts& opts) {
  RunConfig config = resolve_config(opts);
  std::vector<GraspDatabase> dbs = load_example_dbs(config, opts.parts);
  TransferOutput out = cmd_transfer(config, dbs);
  std::cout << "transfer stage: " << out.transfer_ok_total << "/"
            << out.attempted_total;
  if (config.compare_baseline)
    std::cout << " (baseline " << out.baseline_transfer_ok_total << ")";
  std::cout << "\nassembly stage: " << out.assembly_ok_total;
  if (config.compare_baseline)
    std::cout << " (baseline " << out.baseline_assembly_ok_total << ")";
  std::cout << "\n";
  return 0;
}

int run_assemble(const CommonOpts& opts, const std::string& db_path) {
  RunConfig config = resolve_config(opts);
  GraspDatabase db = GraspDatabase::load(db_path);
  SegmentedObject novel =
      load_segmented_object(config.novel_object, config.novel_kind,
                            config.novel_segmentation, config);
  HandModel hand = load_hand_or_default(config);
  AnnealParams anneal = config.anneal;
  anneal.seed = Rng(config.seed).split(9000).next_u64();
  AssemblyResult result =
      assemble_grasps(db.records, novel.geometry, hand, config.replan_weights,
                      anneal, config.eval_params(), true);
  fs::create_directories(config.out_dir);
  GraspDatabase out_db = db;
  out_db.records = std::move(result.grasps);
  out_db.save(config.out_dir + "/assembled.grasps");
  result.report.save_csv(config.out_dir + "/assembly_report.csv");
  result.report.save_text(config.out_dir + "/assembly_summary.txt");
  std::cout << "kept " << result.report.kept << ", replanned "
            << result.report.replanned_ok << ", failed "
            << result.report.replanned_failed << ", discarded "
            << result.report.discarded_palm << "\n";
  return 0;
}

int run_report(const CommonOpts& opts) {
  RunConfig config = resolve_config(opts);
  std::vector<GraspDatabase> example_dbs = load_example_dbs(config, opts.parts);
  GraspDatabase final_db =
      GraspDatabase::load(config.out_dir + "/final.grasps");
  GraspDatabase baseline_db;
  std::string baseline_path = config.out_dir + "/baseline_final.grasps";
  if (fs::exists(baseline_path))
    baseline_db = GraspDatabase::load(baseline_path);
  ReportOutput out =
      cmd_report(example_dbs, final_db, baseline_db, config.out_dir);
  std::cout << "paired grasps: " << out.pairs << ", above diagonal: "
            << out.above_diagonal << " (" << out.above_diagonal_fraction
            << ")\n";
  return 0;
}

int run_evaluate(const CommonOpts& opts, const std::string& db_path,
                 const std::string& which) {
  RunConfig config = resolve_config(opts);
  GraspDatabase db = GraspDatabase::load(db_path);
  std::string object_path, kind, seg;
  if (which == "example") {
    object_path = config.example_object;
    kind = config.example_kind;
    seg = config.example_segmentation;
  } else {
    object_path = config.novel_object;
    kind = config.novel_kind;
    seg = config.novel_segmentation;
  }
  SegmentedObject object = load_segmented_object(object_path, kind, seg, config);
  HandModel hand = load_hand_or_default(config);
  // Part databases replay against their part, merged ones against the whole.
  const Geometry& geom = db.header.part_id >= 0 &&
                                 db.header.part_id < object.num_parts()
                             ? object.parts[db.header.part_id]
                             : object.geometry;
  EvaluateOutput out = cmd_evaluate(db, geom, hand, config.eval_params());
  if (out.ok) {
    std::cout << "all " << db.records.size() << " records validate\n";
    return 0;
  }
  for (const auto& f : out.failures) std::cerr << f << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"part-based grasp planning and transfer"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string db_path, which = "novel";

  auto* segment = app.add_subcommand("segment", "SDF-segment the example mesh");
  add_common(segment, opts);
  auto* learn =
      app.add_subcommand("learn", "learn stable grasps for each example part");
  add_common(learn, opts);
  auto* align =
      app.add_subcommand("align", "build part mappings example -> novel");
  add_common(align, opts);
  auto* transfer = app.add_subcommand(
      "transfer", "transfer grasps to the novel object and assemble");
  add_common(transfer, opts);
  auto* assemble =
      app.add_subcommand("assemble", "re-validate a database on the full object");
  add_common(assemble, opts);
  assemble->add_option("--db", db_path, "grasp database")->required();
  auto* report = app.add_subcommand("report", "emit quality/success reports");
  add_common(report, opts);
  auto* evaluate = app.add_subcommand("evaluate", "replay-validate a database");
  add_common(evaluate, opts);
  evaluate->add_option("--db", db_path, "grasp database")->required();
  evaluate->add_option("--object", which,
                       "validate against: example | novel (default)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (segment->parsed()) return run_segment(opts);
    if (learn->parsed()) return run_learn(opts);
    if (align->parsed()) return run_align(opts);
    if (transfer->parsed()) return run_transfer(opts);
    if (assemble->parsed()) return run_assemble(opts, db_path);
    if (report->parsed()) return run_report(opts);
    if (evaluate->parsed()) return run_evaluate(opts, db_path, which);
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
