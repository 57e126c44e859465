#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "loqi/datamodel/manifest.hpp"
#include "loqi/distill/config.hpp"

namespace loqi {

/// Indices into the pair manifest's records. Each record carries the
/// degraded image in `path` and its original in `source_path`.
struct TrainSample {
  std::size_t query = 0;
  std::vector<std::size_t> positives;  // nearest first
  std::vector<std::size_t> negatives;

  friend bool operator==(const TrainSample&, const TrainSample&) = default;
};

struct SampleStream {
  std::vector<TrainSample> samples;
  std::size_t skipped = 0;  // queries without any positive
  std::vector<std::string> skipped_ids;
};

/// Portable uniform index in [0, n) drawn from a 64-bit generator.
std::size_t uniform_index(std::uint64_t draw, std::size_t n);

/// Seeded query order plus weakly supervised positives and negatives.
/// Positives lie within positive_radius_m of the query (or share its
/// place_id), up to max_positives, nearest first. Negatives are drawn
/// uniformly among records beyond the radius, with replacement only when
/// fewer than negatives_per_sample exist. Without the triplet term no
/// geography is needed and every record becomes a sample with empty
/// positive/negative lists.
SampleStream sample_triplets(const DatasetManifest& pairs, const TrainingConfig& cfg, std::uint64_t rng_seed);

/// Seed for epoch `epoch` derived from the run seed.
std::uint64_t epoch_seed(std::uint64_t seed, int epoch);

}  // namespace loqi
