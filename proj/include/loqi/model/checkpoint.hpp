#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "loqi/model/extractor.hpp"
#include "loqi/model/registry.hpp"

namespace loqi {

/// Versioned binary snapshot of an extractor's parameters.
///
///   "LQCK" u32 version=1 str identity u8 encoder_trainable
///   u8 aggregator_trainable u64 count f64[count] u64 fnv1a(preceding)
struct Checkpoint {
  std::string identity;
  bool encoder_trainable = true;
  bool aggregator_trainable = true;
  std::vector<double> parameters;

  std::uint64_t parameter_hash() const;
};

Checkpoint snapshot(const ExtractorHandle& handle);
std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes, const std::string& source = "<memory>");

void save_checkpoint(const std::filesystem::path& path, const ExtractorHandle& handle);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Copies parameters into `handle`; identities and sizes must match.
void apply_checkpoint(const Checkpoint& ckpt, ExtractorHandle& handle);

/// Rebuilds the architecture from the stored identity, then loads it.
ExtractorHandle load_checkpoint(const std::filesystem::path& path,
                                const ExtractorRegistry& registry = ExtractorRegistry::global());

}  // namespace loqi
