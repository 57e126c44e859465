#include "loqi/model/external_extractor.hpp"

#include <cmath>

#include "loqi/core/binary.hpp"
#include "loqi/core/errors.hpp"
#include "loqi/core/image_io.hpp"
#include "loqi/core/process.hpp"

namespace loqi {
namespace {

constexpr std::uint32_t kFeatureVersion = 1;

struct Features {
  LatentCode latent;
  Descriptor descriptor;
};

Features read_feature_file(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  BinaryReader r(bytes, path.string());
  if (r.get_raw(4) != "LQFX") r.fail("not a feature file");
  if (r.get<std::uint32_t>() != kFeatureVersion) r.fail("unsupported feature file version");
  const auto c = r.get<std::uint32_t>();
  const auto h = r.get<std::uint32_t>();
  const auto w = r.get<std::uint32_t>();
  const auto d = r.get<std::uint32_t>();
  const std::uint64_t n = static_cast<std::uint64_t>(c) * h * w;
  if (c == 0 || n == 0 || d == 0 || (n + d) * 8 != r.remaining()) r.fail("inconsistent feature file dimensions");
  std::vector<double> z(n), v(d);
  r.get_array(std::span<double>(z));
  r.get_array(std::span<double>(v));
  Features f{LatentCode(static_cast<int>(c), static_cast<int>(h), static_cast<int>(w), std::move(z)),
             Descriptor(std::move(v))};
  f.latent.validate();
  for (double x : f.descriptor.values()) {
    if (!std::isfinite(x)) r.fail("descriptor has non-finite entries");
  }
  f.descriptor = f.descriptor.normalized();
  return f;
}

}  // namespace

void write_feature_file(const std::filesystem::path& path, const LatentCode& latent, const Descriptor& descriptor) {
  BinaryWriter w;
  w.put_raw("LQFX");
  w.put<std::uint32_t>(kFeatureVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(latent.channels()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(latent.height()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(latent.width()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(descriptor.size()));
  w.put_array(latent.data());
  w.put_array(descriptor.data());
  write_file(path, w.bytes());
}

ExternalExtractor::ExternalExtractor(std::string method, std::filesystem::path command)
    : method_(std::move(method)), command_(std::move(command)) {}

std::string ExternalExtractor::identity() const {
  return "external/1 method=" + method_ + " command=" + command_.string();
}

std::unique_ptr<Extractor> ExternalExtractor::clone() const { return std::make_unique<ExternalExtractor>(*this); }

void ExternalExtractor::probe() const {
  if (channels_ >= 0) return;
  forward(Image(64, 64));
}

std::size_t ExternalExtractor::descriptor_dim() const {
  probe();
  return dim_;
}

int ExternalExtractor::latent_channels() const {
  probe();
  return channels_;
}

std::unique_ptr<ForwardTrace> ExternalExtractor::forward(const Image& image) const {
  TempDir tmp("loqi-ext");
  const auto in = tmp.path() / "input.png";
  const auto out = tmp.path() / "features.bin";
  write_png(in, image);
  const ProcessResult r = run_process({command_.string(), in.string(), out.string()});
  if (r.exit_code != 0) throw ExternalToolError("encoder '" + method_ + "' failed", r.exit_code, r.stderr_text);
  if (!std::filesystem::exists(out)) {
    throw ExternalToolError("encoder '" + method_ + "' wrote no feature file", r.exit_code, r.stderr_text);
  }
  Features f = read_feature_file(out);
  if (channels_ >= 0 && (f.latent.channels() != channels_ || f.descriptor.size() != dim_)) {
    throw ExternalToolError("encoder '" + method_ + "' changed its output dimensions between calls", 0, "");
  }
  channels_ = f.latent.channels();
  dim_ = f.descriptor.size();
  auto trace = std::make_unique<ForwardTrace>();
  trace->latent = std::move(f.latent);
  trace->descriptor = std::move(f.descriptor);
  return trace;
}

LatentCode ExternalExtractor::encode(const Image& image) const { return forward(image)->latent; }

Descriptor ExternalExtractor::describe(const Image& image) const { return forward(image)->descriptor; }

Descriptor ExternalExtractor::aggregate(const LatentCode&) const {
  throw ValidationError("external encoder '" + method_ + "' does not expose its aggregator");
}

void ExternalExtractor::backward(const ForwardTrace&, const LatentCode*, const Descriptor*, std::span<double>) const {
  throw ValidationError("external encoder '" + method_ + "' is inference-only");
}

}  // namespace loqi
