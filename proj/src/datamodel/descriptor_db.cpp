#include <cmath>

#include "loqi/core/binary.hpp"
#include "loqi/core/errors.hpp"
#include "loqi/core/image_io.hpp"
#include "loqi/datamodel/descriptor_db.hpp"

namespace loqi {
namespace {

constexpr char kMagic[4] = {'L', 'Q', 'D', 'B'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kFlagNormalized = 1u;

}  // namespace

DescriptorDB::DescriptorDB(std::string manifest_ref, std::size_t dim, bool normalized)
    : manifest_ref_(std::move(manifest_ref)), dim_(dim), normalized_(normalized) {
  if (dim == 0) throw ValidationError("descriptor dimension must be positive");
}

void DescriptorDB::insert(const std::string& id, std::vector<float> values) {
  if (values.size() != dim_) {
    throw ValidationError("descriptor '" + id + "' has length " + std::to_string(values.size()) +
                          ", database dim is " + std::to_string(dim_));
  }
  double sq = 0.0;
  for (float v : values) {
    if (!std::isfinite(v)) throw ValidationError("descriptor '" + id + "' has non-finite components");
    sq += static_cast<double>(v) * v;
  }
  if (normalized_ && std::abs(std::sqrt(sq) - 1.0) > kUnitNormTolerance) {
    throw ValidationError("descriptor '" + id + "' is not unit norm (|v| = " + std::to_string(std::sqrt(sq)) + ")");
  }
  if (!entries_.emplace(id, std::move(values)).second) {
    throw ValidationError("duplicate descriptor id '" + id + "'");
  }
}

const std::vector<float>& DescriptorDB::at(const std::string& id) const {
  const auto it = entries_.find(id);
  if (it == entries_.end()) throw ValidationError("no descriptor for id '" + id + "'");
  return it->second;
}

std::vector<std::uint8_t> serialize_db(const DescriptorDB& db) {
  BinaryWriter w;
  w.put_raw({kMagic, 4});
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(db.dim()));
  w.put<std::uint32_t>(db.normalized() ? kFlagNormalized : 0u);
  w.put<std::uint64_t>(db.size());
  w.put_string(db.manifest_ref());
  for (const auto& [id, v] : db.entries()) w.put_array<float>(v);
  for (const auto& [id, v] : db.entries()) w.put_string(id);
  const std::uint64_t checksum = fnv1a64(w.bytes());
  w.put<std::uint64_t>(checksum);
  return std::move(w.bytes());
}

DescriptorDB deserialize_db(std::span<const std::uint8_t> bytes, const std::string& source) {
  BinaryReader r(bytes, source);
  if (r.get_raw(4) != std::string_view(kMagic, 4)) r.fail("not a descriptor database (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) r.fail("unsupported descriptor database version " + std::to_string(version));
  const auto dim = r.get<std::uint32_t>();
  const auto flags = r.get<std::uint32_t>();
  const auto count = r.get<std::uint64_t>();
  std::string manifest_ref = r.get_string();
  if (dim == 0) r.fail("zero descriptor dimension");
  if (count > r.remaining() / (static_cast<std::uint64_t>(dim) * sizeof(float))) r.fail("truncated file (vectors)");

  std::vector<float> values(static_cast<std::size_t>(count) * dim);
  r.get_array<float>(values);
  std::vector<std::string> ids;
  ids.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) ids.push_back(r.get_string());
  const std::uint64_t expected = fnv1a64(r.consumed());
  const auto checksum = r.get<std::uint64_t>();
  if (checksum != expected) r.fail("checksum mismatch");
  if (r.remaining() != 0) r.fail("trailing bytes after checksum");

  DescriptorDB db(std::move(manifest_ref), dim, (flags & kFlagNormalized) != 0);
  for (std::uint64_t i = 0; i < count; ++i) {
    if (i > 0 && !(ids[i - 1] < ids[i])) r.fail("id index not strictly sorted");
    const auto first = values.begin() + static_cast<std::ptrdiff_t>(i * dim);
    try {
      db.insert(ids[i], std::vector<float>(first, first + dim));
    } catch (const ValidationError& e) {
      r.fail(e.what());
    }
  }
  return db;
}

void save_db(const DescriptorDB& db, const std::filesystem::path& path) { write_file(path, serialize_db(db)); }

DescriptorDB load_db(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return deserialize_db(bytes, path.string());
}

}  // namespace loqi
