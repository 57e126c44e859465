#include "loqi/distill/sampler.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "loqi/core/errors.hpp"

namespace loqi {
namespace {

PositiveRule resolve_rule(const DatasetManifest& m, PositiveRule rule) {
  if (rule != PositiveRule::automatic) return rule;
  return m.pose_mode() ? PositiveRule::radius : PositiveRule::place_id;
}

void check_inputs(const DatasetManifest& m, const TrainingConfig& cfg, PositiveRule rule) {
  const bool needs_source = cfg.loss_mask.has(LossTerm::ickd) || cfg.loss_mask.has(LossTerm::mse);
  for (const ImageRecord& r : m.records) {
    if (needs_source && r.source_path.empty()) {
      throw ValidationError("record '" + r.id + "' has no high-quality source image to distill from");
    }
    if (!cfg.loss_mask.has(LossTerm::triplet)) continue;
    if (rule == PositiveRule::radius && !r.pose) throw ValidationError("record '" + r.id + "' has no pose");
    if (rule == PositiveRule::place_id && !r.place_id) throw ValidationError("record '" + r.id + "' has no place_id");
  }
}

}  // namespace

std::size_t uniform_index(std::uint64_t draw, std::size_t n) {
  // multiply-shift keeps the draw portable across standard libraries
  return static_cast<std::size_t>((static_cast<unsigned __int128>(draw) * n) >> 64);
}

std::uint64_t epoch_seed(std::uint64_t seed, int epoch) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(epoch + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

SampleStream sample_triplets(const DatasetManifest& pairs, const TrainingConfig& cfg, std::uint64_t rng_seed) {
  cfg.validate();
  pairs.validate();
  const PositiveRule rule = resolve_rule(pairs, cfg.positive_rule);
  check_inputs(pairs, cfg, rule);

  const std::size_t n = pairs.records.size();
  std::mt19937_64 rng(rng_seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng(), i)]);

  SampleStream out;
  if (!cfg.loss_mask.has(LossTerm::triplet)) {
    for (std::size_t q : order) out.samples.push_back({q, {}, {}});
    return out;
  }

  const auto k = static_cast<std::size_t>(cfg.negatives_per_sample);
  std::vector<std::pair<double, std::size_t>> near;
  std::vector<std::size_t> far;
  for (std::size_t q : order) {
    const ImageRecord& rq = pairs.records[q];
    near.clear();
    far.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == q) continue;
      const ImageRecord& rj = pairs.records[j];
      if (rule == PositiveRule::radius) {
        const double d = geodesic_distance(*rq.pose, *rj.pose);
        if (d <= cfg.positive_radius_m) {
          near.emplace_back(d, j);
        } else {
          far.push_back(j);
        }
      } else if (*rj.place_id == *rq.place_id) {
        near.emplace_back(0.0, j);
      } else {
        far.push_back(j);
      }
    }
    if (far.empty()) {
      throw ValidationError("no valid negatives: every record lies within the positive radius of query '" + rq.id +
                            "'");
    }
    if (near.empty()) {
      ++out.skipped;
      out.skipped_ids.push_back(rq.id);
      continue;
    }
    std::stable_sort(near.begin(), near.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    TrainSample s;
    s.query = q;
    for (std::size_t i = 0; i < near.size() && i < static_cast<std::size_t>(cfg.max_positives); ++i) {
      s.positives.push_back(near[i].second);
    }
    if (far.size() >= k) {
      for (std::size_t i = 0; i < k; ++i) {
        std::swap(far[i], far[i + uniform_index(rng(), far.size() - i)]);
        s.negatives.push_back(far[i]);
      }
    } else {
      for (std::size_t i = 0; i < k; ++i) s.negatives.push_back(far[uniform_index(rng(), far.size())]);
    }
    out.samples.push_back(std::move(s));
  }
  return out;
}

}  // namespace loqi
