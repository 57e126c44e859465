#include "loqi/distill/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "loqi/core/binary.hpp"
#include "loqi/core/errors.hpp"
#include "loqi/core/image_io.hpp"
#include "loqi/losses/losses.hpp"
#include "loqi/model/checkpoint.hpp"
#include "loqi/simd/kernels.hpp"

namespace loqi {
namespace {

constexpr std::uint32_t kStateVersion = 1;
constexpr std::size_t kCacheLimit = 8192;

std::string resume_key(const TrainingConfig& cfg) {
  nlohmann::json j = cfg.to_json();
  j.erase("checkpoint_every");
  return j.dump();
}

void write_reports(const std::filesystem::path& path, const std::vector<EpochReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(r.to_json());
  const std::string text = arr.dump(2) + "\n";
  write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void scale(Descriptor& d, double s) {
  for (double& v : d.data()) v *= s;
}

}  // namespace

nlohmann::json StepReport::to_json() const {
  return {{"step", step}, {"lr", lr},     {"ickd", ickd},           {"mse", mse},
          {"triplet", triplet}, {"total", total}, {"grad_norm", grad_norm}, {"samples", samples}};
}

nlohmann::json EpochReport::to_json() const {
  std::ostringstream th, sh;
  th << std::hex << teacher_hash;
  sh << std::hex << student_hash;
  return {{"epoch", epoch},
          {"steps", steps},
          {"samples", samples},
          {"skipped", skipped},
          {"mean_ickd", mean_ickd},
          {"mean_mse", mean_mse},
          {"mean_triplet", mean_triplet},
          {"mean_total", mean_total},
          {"first_total", first_total},
          {"last_total", last_total},
          {"lr_first", lr_first},
          {"lr_last", lr_last},
          {"max_grad_norm", max_grad_norm},
          {"teacher_hash", th.str()},
          {"student_hash", sh.str()},
          {"completed", completed},
          {"resumed", resumed}};
}

EpochReport EpochReport::from_json(const nlohmann::json& j) {
  EpochReport r;
  try {
    r.epoch = j.at("epoch").get<int>();
    r.steps = j.at("steps").get<std::size_t>();
    r.samples = j.at("samples").get<std::size_t>();
    r.skipped = j.at("skipped").get<std::size_t>();
    r.mean_ickd = j.at("mean_ickd").get<double>();
    r.mean_mse = j.at("mean_mse").get<double>();
    r.mean_triplet = j.at("mean_triplet").get<double>();
    r.mean_total = j.at("mean_total").get<double>();
    r.first_total = j.at("first_total").get<double>();
    r.last_total = j.at("last_total").get<double>();
    r.lr_first = j.at("lr_first").get<double>();
    r.lr_last = j.at("lr_last").get<double>();
    r.max_grad_norm = j.at("max_grad_norm").get<double>();
    r.teacher_hash = std::stoull(j.at("teacher_hash").get<std::string>(), nullptr, 16);
    r.student_hash = std::stoull(j.at("student_hash").get<std::string>(), nullptr, 16);
    r.completed = j.at("completed").get<bool>();
    r.resumed = j.at("resumed").get<bool>();
  } catch (const std::exception& e) {
    throw FormatError(std::string("epoch report: ") + e.what());
  }
  return r;
}

void Distiller::Accum::add(const StepReport& r) {
  if (steps == 0) {
    first_total = r.total;
    lr_first = r.lr;
  }
  ++steps;
  samples += r.samples;
  sum_ickd += r.ickd;
  sum_mse += r.mse;
  sum_triplet += r.triplet;
  sum_total += r.total;
  last_total = r.total;
  lr_last = r.lr;
  max_grad_norm = std::max(max_grad_norm, r.grad_norm);
}

Distiller::Distiller(BranchPair& pair, const DatasetManifest& pairs, const TrainingConfig& cfg)
    : pair_(pair),
      pairs_(pairs),
      cfg_(cfg),
      optimizer_(pair.student.model().parameters().size(), cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon,
                 cfg.weight_decay) {
  cfg_.validate();
  if (!pair_.teacher.valid() || !pair_.student.valid()) throw ValidationError("branch pair is incomplete");
  if (pair_.teacher.any_trainable()) throw ValidationError("teacher branch must be frozen");
  if (!pair_.student.model().differentiable()) {
    throw ValidationError("student '" + pair_.student.identity() + "' does not support training");
  }
  if (pair_.teacher.model().parameters().size() != pair_.student.model().parameters().size() ||
      pair_.teacher.model().latent_channels() != pair_.student.model().latent_channels()) {
    throw ValidationError("teacher and student are not structurally identical");
  }
  mask_ = pair_.student.trainable_mask();
}

const Image& Distiller::image(const std::filesystem::path& path) {
  const std::string key = path.string();
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  if (cache_.size() >= kCacheLimit) cache_.clear();
  return cache_.emplace(key, read_image(path)).first->second;
}

StepReport Distiller::step(std::span<const TrainSample> batch) {
  if (batch.empty()) throw ValidationError("empty training batch");
  const LossMask mask = cfg_.loss_mask;
  const LossWeights& w = cfg_.weights;
  const Extractor& student = pair_.student.model();
  const Extractor& teacher = pair_.teacher.model();
  const double inv = 1.0 / static_cast<double>(batch.size());

  StepReport rep;
  rep.step = global_step_;
  rep.lr = lr_at_step(cfg_, global_step_);
  rep.samples = batch.size();
  std::vector<double> grad(student.parameters().size(), 0.0);

  for (const TrainSample& s : batch) {
    if (s.query >= pairs_.records.size()) throw ValidationError("sample index out of range");
    const ImageRecord& rq = pairs_.records[s.query];
    const auto q = student.forward(image(rq.path));

    std::unique_ptr<ForwardTrace> t;
    if (mask.has(LossTerm::ickd) || mask.has(LossTerm::mse)) t = teacher.forward(image(rq.source_path));

    std::unique_ptr<LatentCode> d_latent;
    Descriptor d_desc(q->descriptor.size());
    double l_ickd = 0.0, l_mse = 0.0, l_trip = 0.0;

    if (mask.has(LossTerm::ickd)) {
      IckdGradient g = ickd_loss_grad(q->latent, compute_icc(t->latent));
      l_ickd = g.loss;
      for (double& v : g.d_student.data()) v *= inv;
      d_latent = std::make_unique<LatentCode>(std::move(g.d_student));
    }
    if (mask.has(LossTerm::mse)) {
      const MseGradient g = mse_loss_grad(q->descriptor, t->descriptor);
      l_mse = g.loss;
      simd::axpy(w.alpha * inv, g.d_student.data(), d_desc.data());
    }

    std::vector<std::unique_ptr<ForwardTrace>> pos, neg;
    TripletGradient tg;
    if (mask.has(LossTerm::triplet)) {
      if (s.positives.empty() || s.negatives.empty()) {
        throw ValidationError("triplet term needs positives and negatives for query '" + rq.id + "'");
      }
      std::vector<Descriptor> pd, nd;
      for (std::size_t i : s.positives) {
        pos.push_back(student.forward(image(pairs_.records.at(i).path)));
        pd.push_back(pos.back()->descriptor);
      }
      for (std::size_t i : s.negatives) {
        neg.push_back(student.forward(image(pairs_.records.at(i).path)));
        nd.push_back(neg.back()->descriptor);
      }
      tg = triplet_loss_grad(q->descriptor, pd, nd, w.margin);
      l_trip = tg.loss;
      simd::axpy(w.beta * inv, tg.d_query.data(), d_desc.data());
    }

    if (!std::isfinite(l_ickd) || !std::isfinite(l_mse) || !std::isfinite(l_trip)) {
      std::ostringstream msg;
      msg << "non-finite loss at step " << global_step_ << " for query '" << rq.id << "': ickd=" << l_ickd
          << " mse=" << l_mse << " triplet=" << l_trip;
      throw NumericError(msg.str());
    }
    rep.ickd += l_ickd * inv;
    rep.mse += l_mse * inv;
    rep.triplet += l_trip * inv;

    student.backward(*q, d_latent.get(), &d_desc, grad);
    if (mask.has(LossTerm::triplet) && tg.active_negatives > 0) {
      Descriptor dp = tg.d_positives[tg.positive_index];
      scale(dp, w.beta * inv);
      student.backward(*pos[tg.positive_index], nullptr, &dp, grad);
      for (std::size_t j = 0; j < neg.size(); ++j) {
        Descriptor dn = tg.d_negatives[j];
        if (dn.norm() == 0.0) continue;
        scale(dn, w.beta * inv);
        student.backward(*neg[j], nullptr, &dn, grad);
      }
    }
  }

  rep.total = composite_loss(rep.ickd, rep.mse, rep.triplet, w);
  double gn = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (mask_[i] == 0) grad[i] = 0.0;
    gn += grad[i] * grad[i];
  }
  rep.grad_norm = std::sqrt(gn);
  if (!std::isfinite(rep.grad_norm)) {
    std::ostringstream msg;
    msg << "non-finite gradient at step " << global_step_ << ": ickd=" << rep.ickd << " mse=" << rep.mse
        << " triplet=" << rep.triplet;
    throw NumericError(msg.str());
  }
  optimizer_.step(pair_.student.model().parameters(), grad, mask_, rep.lr);
  ++global_step_;
  return rep;
}

std::uint64_t Distiller::manifest_fingerprint() const {
  std::uint64_t h = fnv1a64({});
  for (const ImageRecord& r : pairs_.records) {
    h = fnv1a64({reinterpret_cast<const std::uint8_t*>(r.id.data()), r.id.size() + 1}, h);
  }
  return h;
}

EpochReport Distiller::make_report(int epoch, const Accum& acc, std::size_t skipped, bool completed,
                                   bool resumed) const {
  EpochReport r;
  r.epoch = epoch;
  r.steps = acc.steps;
  r.samples = acc.samples;
  r.skipped = skipped;
  if (acc.steps > 0) {
    const double n = static_cast<double>(acc.steps);
    r.mean_ickd = acc.sum_ickd / n;
    r.mean_mse = acc.sum_mse / n;
    r.mean_triplet = acc.sum_triplet / n;
    r.mean_total = acc.sum_total / n;
  }
  r.first_total = acc.first_total;
  r.last_total = acc.last_total;
  r.lr_first = acc.lr_first;
  r.lr_last = acc.lr_last;
  r.max_grad_norm = acc.max_grad_norm;
  r.teacher_hash = pair_.teacher.hash();
  r.student_hash = pair_.student.hash();
  r.completed = completed;
  r.resumed = resumed;
  return r;
}

void Distiller::save_state(const std::filesystem::path& path, int epoch, std::size_t cursor, const Accum& acc,
                           const std::vector<EpochReport>& done) const {
  BinaryWriter w;
  w.put_raw("LQTS");
  w.put<std::uint32_t>(kStateVersion);
  w.put_string(resume_key(cfg_));
  w.put<std::uint64_t>(manifest_fingerprint());
  w.put_string(pair_.student.identity());
  w.put<std::uint64_t>(pair_.teacher.hash());
  w.put<std::int32_t>(epoch);
  w.put<std::uint64_t>(cursor);
  w.put<std::uint64_t>(global_step_);
  w.put<std::uint64_t>(optimizer_.steps());
  const auto p = pair_.student.model().parameters();
  w.put<std::uint64_t>(p.size());
  w.put_array(std::span<const double>(p));
  w.put_array(std::span<const double>(optimizer_.first_moment()));
  w.put_array(std::span<const double>(optimizer_.second_moment()));
  w.put<std::uint64_t>(acc.steps);
  w.put<std::uint64_t>(acc.samples);
  for (double v : {acc.sum_ickd, acc.sum_mse, acc.sum_triplet, acc.sum_total, acc.first_total, acc.last_total,
                   acc.lr_first, acc.lr_last, acc.max_grad_norm}) {
    w.put<double>(v);
  }
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : done) arr.push_back(r.to_json());
  w.put_string(arr.dump());
  w.put<std::uint64_t>(fnv1a64(w.bytes()));
  const auto tmp = path.string() + ".tmp";
  write_file(tmp, w.bytes());
  std::filesystem::rename(tmp, path);
}

bool Distiller::load_state(const std::filesystem::path& path, int& epoch, std::size_t& cursor, Accum& acc,
                           std::vector<EpochReport>& done) {
  if (!std::filesystem::exists(path)) return false;
  const auto bytes = read_file(path);
  BinaryReader r(bytes, path.string());
  if (r.get_raw(4) != "LQTS") r.fail("not a training state file");
  if (r.get<std::uint32_t>() != kStateVersion) r.fail("unsupported training state version");
  if (r.get_string() != resume_key(cfg_)) {
    throw ValidationError(path.string() + ": saved training state was produced with a different configuration");
  }
  if (r.get<std::uint64_t>() != manifest_fingerprint()) {
    throw ValidationError(path.string() + ": saved training state belongs to a different pair manifest");
  }
  if (r.get_string() != pair_.student.identity()) {
    throw ValidationError(path.string() + ": saved training state belongs to a different student model");
  }
  if (r.get<std::uint64_t>() != pair_.teacher.hash()) {
    throw ValidationError(path.string() + ": teacher parameters differ from the interrupted run");
  }
  epoch = r.get<std::int32_t>();
  cursor = r.get<std::uint64_t>();
  const auto gstep = r.get<std::uint64_t>();
  const auto adam_t = r.get<std::uint64_t>();
  auto p = pair_.student.model().parameters();
  if (r.get<std::uint64_t>() != p.size()) r.fail("parameter count mismatch");
  std::vector<double> params(p.size()), m(p.size()), v(p.size());
  r.get_array(std::span<double>(params));
  r.get_array(std::span<double>(m));
  r.get_array(std::span<double>(v));
  Accum a;
  a.steps = r.get<std::uint64_t>();
  a.samples = r.get<std::uint64_t>();
  for (double* f : {&a.sum_ickd, &a.sum_mse, &a.sum_triplet, &a.sum_total, &a.first_total, &a.last_total,
                    &a.lr_first, &a.lr_last, &a.max_grad_norm}) {
    *f = r.get<double>();
  }
  const std::string reports = r.get_string(1u << 26);
  const std::uint64_t expect = fnv1a64(r.consumed());
  if (r.get<std::uint64_t>() != expect) r.fail("checksum mismatch");
  if (r.remaining() != 0) r.fail("trailing bytes after checksum");

  std::vector<EpochReport> prior;
  try {
    for (const auto& j : nlohmann::json::parse(reports)) prior.push_back(EpochReport::from_json(j));
  } catch (const nlohmann::json::exception& e) {
    r.fail(std::string("bad epoch reports: ") + e.what());
  }
  std::copy(params.begin(), params.end(), p.begin());
  optimizer_.first_moment() = std::move(m);
  optimizer_.second_moment() = std::move(v);
  optimizer_.set_steps(adam_t);
  global_step_ = gstep;
  acc = a;
  done = std::move(prior);
  return true;
}

TrainingRun Distiller::run(const std::filesystem::path& dir, const DistillOptions& options) {
  std::filesystem::create_directories(dir);
  const auto state_path = dir / kStateFile;

  int start_epoch = 0;
  std::size_t cursor = 0;
  Accum acc;
  std::vector<EpochReport> done;
  bool resumed = options.resume && load_state(state_path, start_epoch, cursor, acc, done);

  TrainingRun run;
  for (int e = start_epoch; e < cfg_.epochs; ++e) {
    const SampleStream stream = sample_triplets(pairs_, cfg_, epoch_seed(cfg_.seed, e));
    if (stream.samples.empty()) {
      throw ValidationError("no valid training samples after filtering (" + std::to_string(stream.skipped) +
                            " queries without positives)");
    }
    if (cursor > stream.samples.size()) throw ValidationError("saved training cursor is past the end of the epoch");
    const auto bsz = static_cast<std::size_t>(cfg_.batch_size);
    while (cursor < stream.samples.size()) {
      if (options.stop_after_steps != 0 && global_step_ >= options.stop_after_steps) {
        save_state(state_path, e, cursor, acc, done);
        run.epochs = done;
        run.epochs.push_back(make_report(e, acc, stream.skipped, false, resumed));
        run.steps = global_step_;
        return run;
      }
      const std::size_t n = std::min(bsz, stream.samples.size() - cursor);
      const StepReport rep = step(std::span<const TrainSample>(stream.samples).subspan(cursor, n));
      cursor += n;
      acc.add(rep);
      if (options.on_step) options.on_step(rep);
      if (cfg_.checkpoint_every > 0 && global_step_ % static_cast<std::uint64_t>(cfg_.checkpoint_every) == 0) {
        save_state(state_path, e, cursor, acc, done);
      }
    }
    done.push_back(make_report(e, acc, stream.skipped, true, resumed));
    save_checkpoint(dir / kCheckpointFile, pair_.student);
    write_reports(dir / kReportFile, done);
    acc = Accum{};
    cursor = 0;
    resumed = false;
    if (e + 1 < cfg_.epochs) save_state(state_path, e + 1, 0, acc, done);
  }
  std::filesystem::remove(state_path);
  run.epochs = done;
  run.steps = global_step_;
  run.completed = true;
  return run;
}

TrainingRun train_distill(BranchPair& pair, const DatasetManifest& pairs, const TrainingConfig& cfg,
                          const std::filesystem::path& checkpoint_dir, const DistillOptions& options) {
  Distiller d(pair, pairs, cfg);
  return d.run(checkpoint_dir, options);
}

}  // namespace loqi
