#include "loqi/model/checkpoint.hpp"

#include "loqi/core/binary.hpp"
#include "loqi/core/errors.hpp"
#include "loqi/core/image_io.hpp"

namespace loqi {
namespace {
constexpr std::uint32_t kCheckpointVersion = 1;
}

std::uint64_t Checkpoint::parameter_hash() const { return fnv1a64_of(std::span<const double>(parameters)); }

Checkpoint snapshot(const ExtractorHandle& handle) {
  Checkpoint c;
  c.identity = handle.identity();
  c.encoder_trainable = handle.trainable(Part::encoder);
  c.aggregator_trainable = handle.trainable(Part::aggregator);
  const auto p = handle.model().parameters();
  c.parameters.assign(p.begin(), p.end());
  return c;
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  BinaryWriter w;
  w.put_raw("LQCK");
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put_string(ckpt.identity);
  w.put<std::uint8_t>(ckpt.encoder_trainable ? 1 : 0);
  w.put<std::uint8_t>(ckpt.aggregator_trainable ? 1 : 0);
  w.put<std::uint64_t>(ckpt.parameters.size());
  w.put_array(std::span<const double>(ckpt.parameters));
  w.put<std::uint64_t>(fnv1a64(w.bytes()));
  return std::move(w.bytes());
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes, const std::string& source) {
  BinaryReader r(bytes, source);
  if (r.get_raw(4) != "LQCK") r.fail("not a checkpoint");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) r.fail("unsupported checkpoint version " + std::to_string(version));
  Checkpoint c;
  c.identity = r.get_string();
  c.encoder_trainable = r.get<std::uint8_t>() != 0;
  c.aggregator_trainable = r.get<std::uint8_t>() != 0;
  const auto n = r.get<std::uint64_t>();
  if (n > r.remaining() / sizeof(double)) r.fail("parameter count exceeds file size");
  c.parameters.resize(n);
  r.get_array(std::span<double>(c.parameters));
  const std::uint64_t expect = fnv1a64(r.consumed());
  if (r.get<std::uint64_t>() != expect) r.fail("checksum mismatch");
  if (r.remaining() != 0) r.fail("trailing bytes after checksum");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const ExtractorHandle& handle) {
  write_file(path, serialize_checkpoint(snapshot(handle)));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_file(path), path.string());
}

void apply_checkpoint(const Checkpoint& ckpt, ExtractorHandle& handle) {
  if (ckpt.identity != handle.identity()) {
    throw ValidationError("checkpoint is for '" + ckpt.identity + "', model is '" + handle.identity() + "'");
  }
  auto p = handle.model().parameters();
  if (p.size() != ckpt.parameters.size()) {
    throw ValidationError("checkpoint holds " + std::to_string(ckpt.parameters.size()) + " parameters, model has " +
                          std::to_string(p.size()));
  }
  std::copy(ckpt.parameters.begin(), ckpt.parameters.end(), p.begin());
  handle.set_trainable(Part::encoder, ckpt.encoder_trainable);
  handle.set_trainable(Part::aggregator, ckpt.aggregator_trainable);
}

ExtractorHandle load_checkpoint(const std::filesystem::path& path, const ExtractorRegistry& registry) {
  const Checkpoint ckpt = read_checkpoint(path);
  ExtractorHandle h = registry.create(ckpt.identity);
  apply_checkpoint(ckpt, h);
  return h;
}

}  // namespace loqi
