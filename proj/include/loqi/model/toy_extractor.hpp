#pragma once

#include <cstdint>
#include <memory>

#include "loqi/model/extractor.hpp"

namespace loqi {

struct ToyOptions {
  std::uint64_t seed = 0;
  int channels = 16;
  int descriptor_dim = 32;

  void validate() const;
};

/// Three 3x3 convolutions (stride 2, 2, 1; ReLU after each) followed by
/// global mean pooling, a linear projection and L2 normalization. Pixels
/// enter as value / 255 - 0.5. Parameters are He-initialized from `seed`.
class ToyExtractor final : public Extractor {
 public:
  explicit ToyExtractor(const ToyOptions& options);

  static constexpr const char* kName = "toy";
  static constexpr int kVersion = 1;
  static constexpr int kMinInputSize = 8;

  const ToyOptions& options() const noexcept { return options_; }

  std::string identity() const override;
  std::unique_ptr<Extractor> clone() const override;
  std::size_t descriptor_dim() const override { return static_cast<std::size_t>(options_.descriptor_dim); }
  int latent_channels() const override { return options_.channels; }

  LatentCode encode(const Image& image) const override;
  Descriptor aggregate(const LatentCode& latent) const override;
  std::unique_ptr<ForwardTrace> forward(const Image& image) const override;
  void backward(const ForwardTrace& trace, const LatentCode* d_latent, const Descriptor* d_descriptor,
                std::span<double> grad) const override;

  std::span<double> parameters() override { return params_; }
  std::span<const double> parameters() const override { return params_; }
  std::vector<ParamGroup> groups() const override;

  /// Softmax over channels at every latent position.
  LatentCode soft_assignment(const LatentCode& latent) const override;

  struct Conv {
    int in = 0;
    int out = 0;
    int stride = 1;
    std::size_t weight_offset = 0;  // out x (in * 9)
    std::size_t bias_offset = 0;    // out
  };

 private:
  ToyOptions options_;
  Conv convs_[3];
  std::size_t proj_offset_ = 0;       // dim x channels
  std::size_t proj_bias_offset_ = 0;  // dim
  std::size_t encoder_size_ = 0;
  std::vector<double> params_;
};

ExtractorHandle make_toy_extractor(std::uint64_t seed, int channels, int descriptor_dim);

}  // namespace loqi
