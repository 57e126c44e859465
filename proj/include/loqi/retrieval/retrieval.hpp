#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "loqi/datamodel/descriptor_db.hpp"
#include "loqi/datamodel/manifest.hpp"
#include "loqi/model/extractor.hpp"

namespace loqi {

/// One L2-normalized float descriptor per record. Any unreadable image
/// aborts the whole extraction with an IoError listing every failed id.
DescriptorDB extract_descriptors(const ExtractorHandle& handle, const DatasetManifest& manifest,
                                 const std::function<void(std::size_t, std::size_t)>& progress = {});

struct RetrievalResult {
  std::string query_id;
  std::vector<std::string> ranked_db_ids;
  std::vector<double> distances;  // Euclidean, non-decreasing
};

/// Exact top-n by Euclidean distance, ties broken by database id.
std::vector<RetrievalResult> knn_search(const DescriptorDB& queries, const DescriptorDB& database, std::size_t n);

enum class EmptyGroundTruth {
  error,          // a query without any database image within d is an error
  count_as_miss,  // ... counts as a miss
  exclude,        // ... is left out of the denominator
};

std::string to_string(EmptyGroundTruth p);
EmptyGroundTruth parse_empty_ground_truth(const std::string& text);

struct RecallReport {
  std::string dataset;
  double threshold = 25.0;
  std::string unit = "m";  // "m" or "frames"
  std::string label;
  std::vector<int> ns;
  std::vector<double> recall;     // percentage per N
  std::vector<std::size_t> hits;  // queries with a true match in the top N
  std::size_t queries = 0;        // denominator
  std::size_t excluded = 0;       // queries dropped by EmptyGroundTruth::exclude
  std::optional<double> bitrate_bps;

  /// Two-decimal rendering, e.g. "71.87".
  std::string formatted(std::size_t i) const;
  double at(int n) const;
};

struct RecallOptions {
  std::vector<int> ns = {1, 2, 5, 10};
  EmptyGroundTruth empty_policy = EmptyGroundTruth::error;
  std::string label;
};

RecallReport recall_at_n(const std::vector<RetrievalResult>& results, const DatasetManifest& query_manifest,
                         const DatasetManifest& db_manifest, double threshold, const RecallOptions& options = {});

struct DeltaRow {
  int n = 0;
  std::string baseline;  // two decimals
  std::string treated;
  std::string delta;     // signed, e.g. "+4.33", "0.00", "-0.12"
  long long delta_hundredths = 0;
};

struct DeltaTable {
  std::string dataset;
  double threshold = 0.0;
  std::string baseline_label;
  std::string treated_label;
  std::vector<DeltaRow> rows;
};

/// Treated minus baseline per N, computed on the two-decimal values so the
/// table is consistent with what is printed.
DeltaTable delta_report(const RecallReport& baseline, const RecallReport& treated);

std::string format_signed_hundredths(long long hundredths);

}  // namespace loqi
