#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "loqi/core/binary.hpp"
#include "loqi/core/errors.hpp"
#include "loqi/core/image_io.hpp"
#include "loqi/datamodel/descriptor_db.hpp"
#include "loqi/datamodel/manifest.hpp"
#include "loqi/degrade/degrade.hpp"
#include "loqi/distill/trainer.hpp"
#include "loqi/fixture/synthetic.hpp"
#include "loqi/model/checkpoint.hpp"
#include "loqi/model/registry.hpp"
#include "loqi/panorama/panorama.hpp"
#include "loqi/retrieval/plot.hpp"
#include "loqi/retrieval/report.hpp"
#include "loqi/retrieval/retrieval.hpp"
#include "loqi/simd/kernels.hpp"
#include "loqi/visualize/activation.hpp"
#include "loqi/visualize/overlay.hpp"

namespace fs = std::filesystem;
using namespace loqi;

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kValidation = 3, kEnvironment = 4 };

bool g_quiet = false;

void info(const std::string& msg) {
  if (!g_quiet) std::cerr << "loqi: " << msg << "\n";
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_digest(const fs::path& p) { return hex64(fnv1a64(read_file(p))); }

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Resolved option values of a subcommand: command line, then config
/// file, then defaults (CLI11 merges them in that order).
nlohmann::json resolved_config(CLI::App* sub, const std::vector<std::string>& skip) {
  nlohmann::json cfg = nlohmann::json::object();
  for (CLI::Option* opt : sub->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || std::find(skip.begin(), skip.end(), name) != skip.end()) continue;
    if (opt->get_type_size() == 0) {
      cfg[name] = opt->count() > 0;
      continue;
    }
    if (opt->count() > 0) {
      const auto& r = opt->results();
      if (opt->get_expected_max() > 1 || r.size() > 1) {
        cfg[name] = r;
      } else {
        cfg[name] = r.empty() ? "" : r.front();
      }
    } else {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

/// Reproducibility record: resolved configuration, tool and library
/// versions, encoder identities and input digests.
struct RunRecord {
  std::string command;
  nlohmann::json config;
  nlohmann::json encoders = nlohmann::json::object();
  nlohmann::json inputs = nlohmann::json::object();

  void input(const std::string& key, const fs::path& p) { inputs[key] = {{"path", p.string()}, {"fnv1a64", file_digest(p)}}; }

  void write(const fs::path& path) const {
    nlohmann::json j;
    j["tool"] = "loqi";
    j["version"] = LOQI_VERSION;
    j["command"] = command;
    j["config"] = config;
    j["encoders"] = encoders;
    j["inputs"] = inputs;
    j["simd"] = std::string(simd::isa_name(simd::active_kernels().isa));
    j["created_at"] = utc_now();
    write_text(path, j.dump(2) + "\n");
  }
};

void log_config(const std::string& command, const nlohmann::json& cfg) {
  for (const auto& [k, v] : cfg.items()) info(command + ": " + k + " = " + (v.is_string() ? v.get<std::string>() : v.dump()));
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError("expected a comma-separated integer list, got '" + text + "'");
    }
  }
  if (out.empty()) throw ValidationError("empty integer list");
  return out;
}

ExtractorHandle load_extractor(const std::string& checkpoint, const std::string& model) {
  if (!checkpoint.empty() && !model.empty()) throw ValidationError("give either --checkpoint or --model, not both");
  if (!checkpoint.empty()) return load_checkpoint(checkpoint);
  if (!model.empty()) return ExtractorRegistry::global().create(model);
  throw ValidationError("an extractor is required: pass --checkpoint or --model");
}

// ---------------------------------------------------------------------------

struct DegradeArgs {
  std::string manifest, spec, out, ffmpeg, fps = "30/1";
};

int cmd_degrade(CLI::App* sub, const DegradeArgs& a) {
  RunRecord rec{"degrade", resolved_config(sub, {"out"})};
  log_config(rec.command, rec.config);
  const DegradationSpec spec = DegradationSpec::parse(a.spec);
  DegradeOptions opt;
  opt.video.ffmpeg = a.ffmpeg;
  opt.fps = Rational::parse(a.fps);
  const DatasetManifest m = load_manifest(a.manifest);
  rec.input("manifest", a.manifest);
  const DatasetManifest out = degrade_manifest(m, spec, a.out, opt);
  if (const auto it = out.metadata.find("encoder"); it != out.metadata.end()) rec.encoders["degradation"] = it->second;
  rec.write(fs::path(a.out) / "run.json");
  info("degraded " + std::to_string(out.records.size()) + " records into " + (fs::path(a.out) / "manifest.tsv").string());
  return kOk;
}

struct SliceArgs {
  std::vector<std::string> inputs;
  std::string out;
  SliceSpec spec;
};

int cmd_slice(CLI::App* sub, const SliceArgs& a) {
  RunRecord rec{"slice-pano", resolved_config(sub, {"out"})};
  log_config(rec.command, rec.config);
  a.spec.validate();
  std::vector<Image> frames;
  for (const auto& p : a.inputs) {
    frames.push_back(read_image(p));
    rec.input("frame_" + std::to_string(frames.size() - 1), p);
  }
  const auto views = slice_panorama_video(frames, a.spec);
  DatasetManifest m;
  m.name = "panorama-views";
  m.split = Split::database;
  m.gt_mode = GroundTruthMode{GroundTruthMode::Kind::index, 1.0};
  for (std::size_t k = 0; k < views.size(); ++k) {
    for (std::size_t t = 0; t < views[k].size(); ++t) {
      char id[32];
      std::snprintf(id, sizeof id, "v%02zu_f%05zu", k, t);
      const fs::path path = fs::path(a.out) / "views" / (std::string(id) + ".png");
      fs::create_directories(path.parent_path());
      write_png(path, views[k][t]);
      ImageRecord r;
      r.id = id;
      r.path = path;
      r.pose = GeoPose::frame_index(static_cast<std::int64_t>(t));
      char place[16];
      std::snprintf(place, sizeof place, "v%02zu", k);
      r.place_id = place;
      m.records.push_back(std::move(r));
    }
  }
  m.metadata["yaw_step_deg"] = std::to_string(a.spec.yaw_step_deg());
  save_manifest(m, fs::path(a.out) / "manifest.tsv");
  rec.write(fs::path(a.out) / "run.json");
  info("wrote " + std::to_string(m.records.size()) + " perspective views");
  return kOk;
}

struct TrainArgs {
  std::string pairs, out, model, init, losses = "ickd,mse,triplet", lr_schedule = "exponential",
                                       positive_rule = "auto";
  TrainingConfig cfg;
  std::uint64_t stop_after = 0;
  bool no_resume = false, freeze_encoder = false, freeze_aggregator = false;
};

int cmd_train(CLI::App* sub, TrainArgs& a) {
  RunRecord rec{"train-distill", resolved_config(sub, {"out"})};
  log_config(rec.command, rec.config);
  TrainingConfig cfg = a.cfg;
  cfg.loss_mask = LossMask::parse(a.losses);
  cfg.lr_schedule = parse_lr_schedule(a.lr_schedule);
  cfg.positive_rule = parse_positive_rule(a.positive_rule);
  cfg.validate();

  ExtractorHandle base;
  if (!a.init.empty()) {
    base = load_extractor(a.init, a.model);
    rec.input("init", a.init);
  } else {
    base = ExtractorRegistry::global().create(a.model.empty() ? "toy seed=" + std::to_string(cfg.seed) : a.model);
  }
  if (a.freeze_encoder) base.set_trainable(Part::encoder, false);
  if (a.freeze_aggregator) base.set_trainable(Part::aggregator, false);
  if (!base.any_trainable()) throw ValidationError("every part of the student is frozen");

  const DatasetManifest pairs = load_manifest(a.pairs);
  rec.input("pairs", a.pairs);
  BranchPair pair = clone_as_branch_pair(base);
  rec.encoders["teacher"] = pair.teacher.identity();
  rec.encoders["student"] = pair.student.identity();
  if (const auto it = pairs.metadata.find("encoder"); it != pairs.metadata.end()) rec.encoders["degradation"] = it->second;

  const fs::path out(a.out);
  fs::create_directories(out);
  save_checkpoint(out / "teacher.ckpt", pair.teacher);

  std::ostringstream steps;
  steps << "step\tlr\tickd\tmse\ttriplet\ttotal\tgrad_norm\n";
  DistillOptions opt;
  opt.stop_after_steps = a.stop_after;
  opt.resume = !a.no_resume;
  opt.on_step = [&](const StepReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%llu\t%.9g\t%.9g\t%.9g\t%.9g\t%.9g\t%.9g\n", static_cast<unsigned long long>(r.step),
                  r.lr, r.ickd, r.mse, r.triplet, r.total, r.grad_norm);
    steps << buf;
  };
  const TrainingRun run = train_distill(pair, pairs, cfg, out, opt);
  write_text(out / (run.completed ? "steps.tsv" : "steps.partial.tsv"), steps.str());
  if (!run.completed) {
    info("stopped after " + std::to_string(run.steps) + " steps; state saved to " +
         (out / Distiller::kStateFile).string());
    rec.write(out / "run.json");
    return kOk;
  }
  const EpochReport& last = run.epochs.back();
  info("epoch " + std::to_string(last.epoch) + ": " + std::to_string(last.steps) + " steps, mean loss " +
       std::to_string(last.mean_total));
  rec.write(out / "run.json");
  return kOk;
}

struct ExtractArgs {
  std::string manifest, checkpoint, model, out;
};

int cmd_extract(CLI::App* sub, const ExtractArgs& a) {
  RunRecord rec{"extract", resolved_config(sub, {"out"})};
  log_config(rec.command, rec.config);
  const ExtractorHandle h = load_extractor(a.checkpoint, a.model);
  rec.encoders["extractor"] = h.identity();
  rec.encoders["parameters_fnv1a64"] = hex64(h.hash());
  if (!a.checkpoint.empty()) rec.input("checkpoint", a.checkpoint);
  const DatasetManifest m = load_manifest(a.manifest);
  rec.input("manifest", a.manifest);
  const DescriptorDB db = extract_descriptors(h, m);
  const fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_db(db, out);
  rec.write(fs::path(out.string() + ".run.json"));
  info("extracted " + std::to_string(db.size()) + " descriptors of dimension " + std::to_string(db.dim()));
  return kOk;
}

struct EvalArgs {
  std::string queries, database, query_manifest, db_manifest, out, at = "1,2,5,10", label, empty_gt = "error";
  double threshold = 25.0;
};

int cmd_evaluate(CLI::App* sub, const EvalArgs& a) {
  RunRecord rec{"evaluate", resolved_config(sub, {"out"})};
  log_config(rec.command, rec.config);
  const DescriptorDB q = load_db(a.queries);
  const DescriptorDB d = load_db(a.database);
  const DatasetManifest qm = load_manifest(a.query_manifest);
  const DatasetManifest dm = load_manifest(a.db_manifest);
  for (const auto& [k, p] : std::map<std::string, std::string>{
           {"queries", a.queries}, {"database", a.database}, {"query_manifest", a.query_manifest}, {"db_manifest", a.db_manifest}}) {
    rec.input(k, p);
  }
  RecallOptions opt;
  opt.ns = parse_int_list(a.at);
  opt.empty_policy = parse_empty_ground_truth(a.empty_gt);
  opt.label = a.label;
  const int nmax = *std::max_element(opt.ns.begin(), opt.ns.end());
  if (nmax < 1 || static_cast<std::size_t>(nmax) > d.size()) {
    throw ValidationError("largest N (" + std::to_string(nmax) + ") exceeds the database size " + std::to_string(d.size()));
  }
  const auto results = knn_search(q, d, static_cast<std::size_t>(nmax));
  const RecallReport rep = recall_at_n(results, qm, dm, a.threshold, opt);
  const fs::path out(a.out);
  fs::create_directories(out);
  write_recall_report(out / "recall.tsv", rep);
  write_text(out / "results.tsv", format_results(results));
  rec.write(out / "run.json");
  std::cout << format_recall_report(rep);
  return kOk;
}

struct ReportArgs {
  std::string baseline, treated, out;
  std::vector<std::string> sweep;
  int at = 1;
};

int cmd_report(CLI::App* sub, const ReportArgs& a) {
  RunRecord rec{"report", resolved_config(sub, {"out"})};
  log_config(rec.command, rec.config);
  const RecallReport b = read_recall_report(a.baseline);
  const RecallReport t = read_recall_report(a.treated);
  rec.input("baseline", a.baseline);
  rec.input("treated", a.treated);
  const DeltaTable table = delta_report(b, t);
  const fs::path out(a.out);
  fs::create_directories(out);
  const std::string text = format_delta_table(table);
  write_text(out / "delta.tsv", text);
  const RecallReport both[] = {b, t};
  write_text(out / "recall_vs_n.svg", recall_vs_n_svg(both));
  if (!a.sweep.empty()) {
    std::vector<RecallReport> sweep;
    for (std::size_t i = 0; i < a.sweep.size(); ++i) {
      sweep.push_back(read_recall_report(a.sweep[i]));
      rec.input("sweep_" + std::to_string(i), a.sweep[i]);
    }
    write_text(out / "recall_vs_bitrate.svg", recall_vs_bitrate_svg(sweep, a.at));
  }
  rec.write(out / "run.json");
  std::cout << text;
  return kOk;
}

struct VizArgs {
  std::string method = "channel-mean", image, checkpoint, model, out;
  OcclusionOptions occlusion;
  double alpha = 0.5;
};

int cmd_viz(CLI::App* sub, const VizArgs& a) {
  RunRecord rec{"viz", resolved_config(sub, {"out"})};
  log_config(rec.command, rec.config);
  const MapSource method = parse_map_source(a.method);
  const ExtractorHandle h = load_extractor(a.checkpoint, a.model);
  rec.encoders["extractor"] = h.identity();
  if (!a.checkpoint.empty()) rec.input("checkpoint", a.checkpoint);
  const Image img = read_image(a.image);
  rec.input("image", a.image);
  ActivationMap map;
  switch (method) {
    case MapSource::channel_mean:
      map = channel_mean_map(h.encode(img));
      break;
    case MapSource::cluster_weighted: {
      const LatentCode z = h.encode(img);
      map = cluster_weighted_map(z, h.model().soft_assignment(z));
      break;
    }
    case MapSource::occlusion:
      map = occlusion_map(h, img, a.occlusion);
      break;
  }
  map.image_id = fs::path(a.image).stem().string();
  const fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_png(out, render_overlay(img, map, a.alpha));
  rec.write(fs::path(out.string() + ".run.json"));
  info("wrote " + std::to_string(map.width) + "x" + std::to_string(map.height) + " " + to_string(method) + " map");
  return kOk;
}

struct FixtureArgs {
  SceneFixtureOptions opt;
  std::string out;
};

int cmd_fixture(CLI::App* sub, const FixtureArgs& a) {
  RunRecord rec{"make-fixture", resolved_config(sub, {"out"})};
  log_config(rec.command, rec.config);
  const SceneFixture f = write_scene_fixture(a.out, a.opt);
  rec.write(fs::path(a.out) / "run.json");
  info("fixture manifests: " + f.database.string() + ", " + f.queries.string() + ", " + f.train.string());
  return kOk;
}

int exit_code_for(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::validation:
    case ErrorCategory::format:
      return kValidation;
    case ErrorCategory::environment:
    case ErrorCategory::external_tool:
      return kEnvironment;
    default:
      return kFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loqi: descriptor distillation for low-quality visual place recognition", "loqi"};
  app.set_version_flag("--version", LOQI_VERSION);
  app.set_config("--config", "", "Read options from a TOML/INI file (flags override it)");
  app.option_defaults()->always_capture_default();
  app.add_flag("-q,--quiet", g_quiet, "Suppress progress and configuration logging");
  app.require_subcommand(1);

  DegradeArgs dg;
  auto* s_degrade = app.add_subcommand("degrade", "Produce a degraded copy of a manifest");
  s_degrade->add_option("--manifest", dg.manifest, "Input manifest")->required()->check(CLI::ExistingFile);
  s_degrade->add_option("--spec", dg.spec, "jpeg:Q | resize:WxH | videoqp:QP[:profile]")->required();
  s_degrade->add_option("--out", dg.out, "Output directory")->required();
  s_degrade->add_option("--ffmpeg", dg.ffmpeg, "Encoder binary (default: $LOQI_FFMPEG, then PATH)");
  s_degrade->add_option("--fps", dg.fps, "Frame rate for video degradation");

  SliceArgs sl;
  auto* s_slice = app.add_subcommand("slice-pano", "Cut equirectangular frames into perspective views");
  s_slice->add_option("--input", sl.inputs, "Panorama frames in temporal order")->required()->check(CLI::ExistingFile);
  s_slice->add_option("--out", sl.out, "Output directory")->required();
  s_slice->add_option("--views", sl.spec.num_views, "Views around the horizon");
  s_slice->add_option("--fov", sl.spec.fov_deg, "Horizontal field of view (degrees)");
  s_slice->add_option("--width", sl.spec.out_width, "View width");
  s_slice->add_option("--height", sl.spec.out_height, "View height");
  s_slice->add_option("--pitch", sl.spec.pitch_deg, "Camera pitch (degrees, positive up)");

  TrainArgs tr;
  auto* s_train = app.add_subcommand("train-distill", "Distill a student from a frozen teacher");
  s_train->add_option("--pairs", tr.pairs, "Degraded manifest with source_path links")->required()->check(CLI::ExistingFile);
  s_train->add_option("--out", tr.out, "Output directory")->required();
  s_train->add_option("--model", tr.model, "Extractor spec, e.g. \"toy channels=16 dim=32 seed=0\"");
  s_train->add_option("--init", tr.init, "Start both branches from this checkpoint");
  s_train->add_option("--losses", tr.losses, "Subset of ickd,mse,triplet");
  s_train->add_option("--alpha", tr.cfg.weights.alpha, "MSE weight");
  s_train->add_option("--beta", tr.cfg.weights.beta, "Triplet weight");
  s_train->add_option("--margin", tr.cfg.weights.margin, "Triplet margin");
  s_train->add_option("--negatives", tr.cfg.negatives_per_sample, "Negatives per sample");
  s_train->add_option("--max-positives", tr.cfg.max_positives, "Positives kept per sample");
  s_train->add_option("--radius", tr.cfg.positive_radius_m, "Positive radius (meters)");
  s_train->add_option("--positive-rule", tr.positive_rule, "auto | radius | place_id");
  s_train->add_option("--epochs", tr.cfg.epochs, "Epochs");
  s_train->add_option("--batch-size", tr.cfg.batch_size, "Samples per optimizer step");
  s_train->add_option("--seed", tr.cfg.seed, "Seed for model init and sampling");
  s_train->add_option("--lr", tr.cfg.lr_init, "Initial learning rate");
  s_train->add_option("--lr-decay", tr.cfg.lr_exp_decay, "Per-step exponential decay");
  s_train->add_option("--lr-schedule", tr.lr_schedule, "exponential | inverse_time");
  s_train->add_option("--lr-time-decay", tr.cfg.lr_time_decay, "Decay constant for inverse_time");
  s_train->add_option("--weight-decay", tr.cfg.weight_decay, "Decoupled weight decay");
  s_train->add_option("--checkpoint-every", tr.cfg.checkpoint_every, "Write resumable state every N steps");
  s_train->add_option("--stop-after-steps", tr.stop_after, "Stop early and save state (0: never)");
  s_train->add_flag("--no-resume", tr.no_resume, "Ignore an existing train state");
  s_train->add_flag("--freeze-encoder", tr.freeze_encoder, "Train the aggregator only");
  s_train->add_flag("--freeze-aggregator", tr.freeze_aggregator, "Train the encoder only");

  ExtractArgs ex;
  auto* s_extract = app.add_subcommand("extract", "Compute a descriptor database for a manifest");
  s_extract->add_option("--manifest", ex.manifest, "Input manifest")->required()->check(CLI::ExistingFile);
  s_extract->add_option("--checkpoint", ex.checkpoint, "Extractor checkpoint");
  s_extract->add_option("--model", ex.model, "Extractor spec (instead of a checkpoint)");
  s_extract->add_option("--out", ex.out, "Output database file")->required();

  EvalArgs ev;
  auto* s_eval = app.add_subcommand("evaluate", "Recall@N of queries against a database");
  s_eval->add_option("--queries", ev.queries, "Query descriptor database")->required()->check(CLI::ExistingFile);
  s_eval->add_option("--database", ev.database, "Reference descriptor database")->required()->check(CLI::ExistingFile);
  s_eval->add_option("--query-manifest", ev.query_manifest, "Query manifest")->required()->check(CLI::ExistingFile);
  s_eval->add_option("--db-manifest", ev.db_manifest, "Database manifest")->required()->check(CLI::ExistingFile);
  s_eval->add_option("--threshold", ev.threshold, "Ground-truth distance (meters or frames)");
  s_eval->add_option("--at", ev.at, "Comma-separated N values");
  s_eval->add_option("--label", ev.label, "Configuration label stored in the report");
  s_eval->add_option("--empty-gt", ev.empty_gt, "Queries without ground truth: error | miss | exclude");
  s_eval->add_option("--out", ev.out, "Output directory")->required();

  ReportArgs rp;
  auto* s_report = app.add_subcommand("report", "Delta table and plots for two recall reports");
  s_report->add_option("--baseline", rp.baseline, "Baseline recall report")->required()->check(CLI::ExistingFile);
  s_report->add_option("--treated", rp.treated, "Treated recall report")->required()->check(CLI::ExistingFile);
  s_report->add_option("--sweep", rp.sweep, "Reports with bitrates for a recall-vs-bitrate plot")->check(CLI::ExistingFile);
  s_report->add_option("--at", rp.at, "N for the bitrate plot");
  s_report->add_option("--out", rp.out, "Output directory")->required();

  VizArgs vz;
  auto* s_viz = app.add_subcommand("viz", "Render an activation map over an image");
  s_viz->add_option("--method", vz.method, "channel-mean | cluster | occlusion");
  s_viz->add_option("--image", vz.image, "Input image")->required()->check(CLI::ExistingFile);
  s_viz->add_option("--checkpoint", vz.checkpoint, "Extractor checkpoint");
  s_viz->add_option("--model", vz.model, "Extractor spec (instead of a checkpoint)");
  s_viz->add_option("--patch", vz.occlusion.patch_size, "Occlusion patch size (pixels)");
  s_viz->add_option("--stride", vz.occlusion.stride, "Occlusion stride (pixels)");
  s_viz->add_option("--alpha", vz.alpha, "Overlay opacity");
  s_viz->add_option("--out", vz.out, "Output PNG")->required();

  FixtureArgs fx;
  auto* s_fixture = app.add_subcommand("make-fixture", "Write the procedural place-recognition fixture");
  s_fixture->add_option("--out", fx.out, "Output directory")->required();
  s_fixture->add_option("--places", fx.opt.places, "Number of places");
  s_fixture->add_option("--views", fx.opt.views, "Views per place");
  s_fixture->add_option("--width", fx.opt.width, "Image width");
  s_fixture->add_option("--height", fx.opt.height, "Image height");
  s_fixture->add_option("--seed", fx.opt.seed, "Generator seed");
  s_fixture->add_option("--max-shift", fx.opt.max_shift_px, "Largest view shift (pixels)");
  s_fixture->add_option("--noise", fx.opt.noise_sigma, "Per-pixel noise sigma");
  s_fixture->add_option("--texture-scale", fx.opt.texture_scale, "Grating period multiplier");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    std::cerr << "run 'loqi --help' for the list of commands\n";
    return kUsage;
  }

  try {
    if (*s_degrade) return cmd_degrade(s_degrade, dg);
    if (*s_slice) return cmd_slice(s_slice, sl);
    if (*s_train) return cmd_train(s_train, tr);
    if (*s_extract) return cmd_extract(s_extract, ex);
    if (*s_eval) return cmd_evaluate(s_eval, ev);
    if (*s_report) return cmd_report(s_report, rp);
    if (*s_viz) return cmd_viz(s_viz, vz);
    if (*s_fixture) return cmd_fixture(s_fixture, fx);
  } catch (const Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "error: " << category_name(e.category()) << ": " << msg << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "error: internal: " << msg << "\n";
    return kFailure;
  }
  return kUsage;
}
