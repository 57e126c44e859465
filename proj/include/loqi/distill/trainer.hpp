#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "loqi/core/image.hpp"
#include "loqi/datamodel/manifest.hpp"
#include "loqi/distill/config.hpp"
#include "loqi/distill/optimizer.hpp"
#include "loqi/distill/sampler.hpp"
#include "loqi/model/extractor.hpp"

namespace loqi {

/// Unweighted per-loss values averaged over the batch; terms outside the
/// loss mask are 0. `total` is the weighted composite.
struct StepReport {
  std::uint64_t step = 0;
  double lr = 0.0;
  double ickd = 0.0;
  double mse = 0.0;
  double triplet = 0.0;
  double total = 0.0;
  double grad_norm = 0.0;
  std::size_t samples = 0;

  nlohmann::json to_json() const;
};

struct EpochReport {
  int epoch = 0;
  std::size_t steps = 0;
  std::size_t samples = 0;
  std::size_t skipped = 0;
  double mean_ickd = 0.0;
  double mean_mse = 0.0;
  double mean_triplet = 0.0;
  double mean_total = 0.0;
  double first_total = 0.0;
  double last_total = 0.0;
  double lr_first = 0.0;
  double lr_last = 0.0;
  double max_grad_norm = 0.0;
  std::uint64_t teacher_hash = 0;
  std::uint64_t student_hash = 0;
  bool completed = false;
  bool resumed = false;

  nlohmann::json to_json() const;
  static EpochReport from_json(const nlohmann::json& j);
};

struct DistillOptions {
  // Stop (and write a resumable state) after this many optimizer steps in
  // total; 0 runs to completion.
  std::uint64_t stop_after_steps = 0;
  // Continue from checkpoint_dir/train_state.bin when present.
  bool resume = true;
  std::function<void(const StepReport&)> on_step;
};

struct TrainingRun {
  std::vector<EpochReport> epochs;
  std::uint64_t steps = 0;
  bool completed = false;
};

/// Single owner of a student update loop. The teacher is only ever read.
class Distiller {
 public:
  static constexpr const char* kStateFile = "train_state.bin";
  static constexpr const char* kCheckpointFile = "student.ckpt";
  static constexpr const char* kReportFile = "epoch_report.json";

  Distiller(BranchPair& pair, const DatasetManifest& pairs, const TrainingConfig& cfg);

  /// One optimizer update from a batch of samples. Throws NumericError
  /// (without touching the student) if any loss is non-finite.
  StepReport step(std::span<const TrainSample> batch);

  /// Runs cfg.epochs epochs, checkpointing into `checkpoint_dir`.
  TrainingRun run(const std::filesystem::path& checkpoint_dir, const DistillOptions& options = {});

  std::uint64_t global_step() const noexcept { return global_step_; }
  const AdamW& optimizer() const noexcept { return optimizer_; }

 private:
  struct Accum {
    std::size_t steps = 0;
    std::size_t samples = 0;
    double sum_ickd = 0.0, sum_mse = 0.0, sum_triplet = 0.0, sum_total = 0.0;
    double first_total = 0.0, last_total = 0.0;
    double lr_first = 0.0, lr_last = 0.0;
    double max_grad_norm = 0.0;

    void add(const StepReport& r);
  };

  const Image& image(const std::filesystem::path& path);
  void save_state(const std::filesystem::path& path, int epoch, std::size_t cursor, const Accum& acc,
                  const std::vector<EpochReport>& done) const;
  bool load_state(const std::filesystem::path& path, int& epoch, std::size_t& cursor, Accum& acc,
                  std::vector<EpochReport>& done);
  std::uint64_t manifest_fingerprint() const;
  EpochReport make_report(int epoch, const Accum& acc, std::size_t skipped, bool completed, bool resumed) const;

  BranchPair& pair_;
  const DatasetManifest& pairs_;
  TrainingConfig cfg_;
  AdamW optimizer_;
  std::vector<std::uint8_t> mask_;
  std::uint64_t global_step_ = 0;
  std::map<std::string, Image> cache_;
};

/// Convenience wrapper around Distiller::run.
TrainingRun train_distill(BranchPair& pair, const DatasetManifest& pairs, const TrainingConfig& cfg,
                          const std::filesystem::path& checkpoint_dir, const DistillOptions& options = {});

}  // namespace loqi
