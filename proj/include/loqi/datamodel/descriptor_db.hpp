#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace loqi {

/// Persistent set of global descriptors keyed by record id. Values are
/// stored as 32-bit floats; iteration is in id order.
class DescriptorDB {
 public:
  static constexpr double kUnitNormTolerance = 1e-6;

  DescriptorDB() = default;
  DescriptorDB(std::string manifest_ref, std::size_t dim, bool normalized);

  const std::string& manifest_ref() const noexcept { return manifest_ref_; }
  std::size_t dim() const noexcept { return dim_; }
  bool normalized() const noexcept { return normalized_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  /// Throws ValidationError on length mismatch, non-finite values, a
  /// duplicate id, or (when normalized) a non-unit vector.
  void insert(const std::string& id, std::vector<float> values);

  const std::vector<float>& at(const std::string& id) const;
  bool contains(const std::string& id) const { return entries_.count(id) != 0; }

  const std::map<std::string, std::vector<float>>& entries() const noexcept { return entries_; }

  friend bool operator==(const DescriptorDB&, const DescriptorDB&) = default;

 private:
  std::string manifest_ref_;
  std::size_t dim_ = 0;
  bool normalized_ = false;
  std::map<std::string, std::vector<float>> entries_;
};

/// Binary layout is documented in docs/formats.md.
void save_db(const DescriptorDB& db, const std::filesystem::path& path);
DescriptorDB load_db(const std::filesystem::path& path);

std::vector<std::uint8_t> serialize_db(const DescriptorDB& db);
DescriptorDB deserialize_db(std::span<const std::uint8_t> bytes, const std::string& source = "<db>");

}  // namespace loqi
