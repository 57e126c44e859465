#pragma once

#include <filesystem>
#include <string>

#include "loqi/model/extractor.hpp"

namespace loqi {

/// Inference-only extractor backed by an executable. It is run as
/// `<command> <image path> <output path>` and must write a feature file:
///
///   "LQFX" u32 version=1 u32 channels u32 height u32 width u32 dim
///   f64[channels * height * width] latent, f64[dim] descriptor
///
/// all little-endian. The descriptor is L2-normalized on read.
class ExternalExtractor final : public Extractor {
 public:
  ExternalExtractor(std::string method, std::filesystem::path command);

  std::string identity() const override;
  std::unique_ptr<Extractor> clone() const override;
  std::size_t descriptor_dim() const override;
  int latent_channels() const override;

  LatentCode encode(const Image& image) const override;
  Descriptor aggregate(const LatentCode& latent) const override;
  Descriptor describe(const Image& image) const override;
  std::unique_ptr<ForwardTrace> forward(const Image& image) const override;

  bool differentiable() const override { return false; }
  void backward(const ForwardTrace& trace, const LatentCode* d_latent, const Descriptor* d_descriptor,
                std::span<double> grad) const override;

  std::span<double> parameters() override { return {}; }
  std::span<const double> parameters() const override { return {}; }
  std::vector<ParamGroup> groups() const override { return {}; }

 private:
  void probe() const;

  std::string method_;
  std::filesystem::path command_;
  mutable int channels_ = -1;
  mutable std::size_t dim_ = 0;
};

void write_feature_file(const std::filesystem::path& path, const LatentCode& latent, const Descriptor& descriptor);

}  // namespace loqi
