#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "loqi/core/image.hpp"
#include "loqi/losses/tensor.hpp"

namespace loqi {

enum class Part { encoder, aggregator };

/// Contiguous slice of the flat parameter vector belonging to one part.
struct ParamGroup {
  Part part;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// Intermediate state of one forward pass, consumed by backward().
/// Concrete extractors derive from it.
struct ForwardTrace {
  virtual ~ForwardTrace() = default;
  LatentCode latent;
  Descriptor descriptor;
};

/// Encoder f (image -> latent) followed by aggregator g (latent ->
/// descriptor). Implementations keep every parameter in one flat vector
/// so optimizers and checkpoints stay architecture-agnostic. const member
/// functions are safe to call concurrently.
class Extractor {
 public:
  virtual ~Extractor() = default;

  /// "name/version key=value ..."; enough to rebuild the architecture
  /// through the registry.
  virtual std::string identity() const = 0;
  virtual std::unique_ptr<Extractor> clone() const = 0;

  virtual std::size_t descriptor_dim() const = 0;
  virtual int latent_channels() const = 0;

  virtual LatentCode encode(const Image& image) const = 0;
  virtual Descriptor aggregate(const LatentCode& latent) const = 0;
  virtual std::unique_ptr<ForwardTrace> forward(const Image& image) const = 0;

  virtual bool differentiable() const { return true; }

  /// Accumulates dL/dparams into `grad` (same length as parameters()).
  /// Either upstream gradient may be null. The latent gradient enters at
  /// the encoder output, in addition to what flows back from the
  /// descriptor gradient through the aggregator.
  virtual void backward(const ForwardTrace& trace, const LatentCode* d_latent, const Descriptor* d_descriptor,
                        std::span<double> grad) const = 0;

  virtual std::span<double> parameters() = 0;
  virtual std::span<const double> parameters() const = 0;
  virtual std::vector<ParamGroup> groups() const = 0;

  /// Per-position weights over latent channels that sum to 1, laid out
  /// like a latent code. Used for cluster-weighted activation maps.
  virtual LatentCode soft_assignment(const LatentCode& latent) const;

  virtual Descriptor describe(const Image& image) const { return aggregate(encode(image)); }
};

std::uint64_t parameter_hash(const Extractor& extractor);

/// Shared extractor plus per-part trainability.
class ExtractorHandle {
 public:
  ExtractorHandle() = default;
  explicit ExtractorHandle(std::shared_ptr<Extractor> extractor, bool encoder_trainable = true,
                           bool aggregator_trainable = true);

  bool valid() const noexcept { return extractor_ != nullptr; }
  Extractor& model();
  const Extractor& model() const;

  std::string identity() const { return model().identity(); }
  std::size_t descriptor_dim() const { return model().descriptor_dim(); }

  LatentCode encode(const Image& image) const { return model().encode(image); }
  Descriptor aggregate(const LatentCode& latent) const { return model().aggregate(latent); }
  Descriptor describe(const Image& image) const { return model().describe(image); }

  bool trainable(Part part) const noexcept { return part == Part::encoder ? encoder_trainable_ : aggregator_trainable_; }
  bool any_trainable() const noexcept { return encoder_trainable_ || aggregator_trainable_; }
  void set_trainable(Part part, bool on) noexcept {
    (part == Part::encoder ? encoder_trainable_ : aggregator_trainable_) = on;
  }

  /// 1 for parameters the optimizer may update, 0 otherwise.
  std::vector<std::uint8_t> trainable_mask() const;
  std::uint64_t hash() const { return parameter_hash(model()); }

 private:
  std::shared_ptr<Extractor> extractor_;
  bool encoder_trainable_ = true;
  bool aggregator_trainable_ = true;
};

struct BranchPair {
  ExtractorHandle teacher;  // frozen
  ExtractorHandle student;
};

/// Two independent deep copies with identical parameters. The teacher is
/// frozen; the student inherits the handle's trainability flags.
BranchPair clone_as_branch_pair(const ExtractorHandle& handle);

}  // namespace loqi
