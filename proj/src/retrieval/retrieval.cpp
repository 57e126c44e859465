#include "loqi/retrieval/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "loqi/core/errors.hpp"
#include "loqi/core/image_io.hpp"
#include "loqi/simd/kernels.hpp"

namespace loqi {
namespace {

long long hundredths(double pct) { return std::llround(pct * 100.0); }

std::string two_decimals(long long h) {
  char buf[48];
  const long long a = h < 0 ? -h : h;
  std::snprintf(buf, sizeof buf, "%s%lld.%02lld", h < 0 ? "-" : "", a / 100, a % 100);
  return buf;
}

}  // namespace

DescriptorDB extract_descriptors(const ExtractorHandle& handle, const DatasetManifest& manifest,
                                 const std::function<void(std::size_t, std::size_t)>& progress) {
  manifest.validate();
  DescriptorDB db(manifest.name, handle.descriptor_dim(), true);
  std::vector<std::string> failed;
  std::string first_reason;
  const std::size_t total = manifest.records.size();
  for (std::size_t i = 0; i < total; ++i) {
    const ImageRecord& r = manifest.records[i];
    Image img;
    try {
      img = read_image(r.path);
    } catch (const Error& e) {
      failed.push_back(r.id);
      if (first_reason.empty()) first_reason = e.what();
      continue;
    }
    const Descriptor d = handle.describe(img).normalized();
    if (d.norm() == 0.0) throw NumericError("extractor produced a zero descriptor for '" + r.id + "'");
    std::vector<float> v = d.to_float();
    // renormalize in float so the stored vector passes the unit-norm check
    double n2 = 0.0;
    for (float x : v) n2 += static_cast<double>(x) * x;
    const double inv = 1.0 / std::sqrt(n2);
    for (float& x : v) x = static_cast<float>(x * inv);
    db.insert(r.id, std::move(v));
    if (progress) progress(i + 1, total);
  }
  if (!failed.empty()) {
    std::string ids;
    for (const auto& id : failed) ids += (ids.empty() ? "" : ", ") + id;
    throw IoError(std::to_string(failed.size()) + " unreadable image(s): " + ids + " (first: " + first_reason + ")");
  }
  return db;
}

std::vector<RetrievalResult> knn_search(const DescriptorDB& queries, const DescriptorDB& database, std::size_t n) {
  if (database.empty()) throw ValidationError("database is empty");
  if (!queries.empty() && queries.dim() != database.dim()) {
    throw ValidationError("descriptor dimensions differ: queries " + std::to_string(queries.dim()) + ", database " +
                          std::to_string(database.dim()));
  }
  if (n < 1 || n > database.size()) {
    throw ValidationError("N must be in [1, " + std::to_string(database.size()) + "], got " + std::to_string(n));
  }
  std::vector<const std::string*> ids;
  std::vector<const float*> vecs;
  for (const auto& [id, v] : database.entries()) {
    ids.push_back(&id);
    vecs.push_back(v.data());
  }
  const std::size_t dim = database.dim();
  const auto& k = simd::active_kernels();

  std::vector<RetrievalResult> out;
  out.reserve(queries.size());
  std::vector<std::pair<double, std::size_t>> scored(ids.size());
  for (const auto& [qid, qv] : queries.entries()) {
    for (std::size_t j = 0; j < ids.size(); ++j) scored[j] = {k.sqdist_f32(qv.data(), vecs[j], dim), j};
    // ids are sorted, so the index is the lexicographic tie-break
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end());
    RetrievalResult r;
    r.query_id = qid;
    for (std::size_t j = 0; j < n; ++j) {
      r.ranked_db_ids.push_back(*ids[scored[j].second]);
      r.distances.push_back(std::sqrt(scored[j].first));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string to_string(EmptyGroundTruth p) {
  switch (p) {
    case EmptyGroundTruth::error:
      return "error";
    case EmptyGroundTruth::count_as_miss:
      return "miss";
    case EmptyGroundTruth::exclude:
      return "exclude";
  }
  return "?";
}

EmptyGroundTruth parse_empty_ground_truth(const std::string& text) {
  if (text == "error") return EmptyGroundTruth::error;
  if (text == "miss") return EmptyGroundTruth::count_as_miss;
  if (text == "exclude") return EmptyGroundTruth::exclude;
  throw ValidationError("unknown empty-ground-truth policy '" + text + "' (expected error, miss, exclude)");
}

std::string RecallReport::formatted(std::size_t i) const { return two_decimals(hundredths(recall.at(i))); }

double RecallReport::at(int n) const {
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] == n) return recall[i];
  }
  throw ValidationError("recall report has no R@" + std::to_string(n));
}

RecallReport recall_at_n(const std::vector<RetrievalResult>& results, const DatasetManifest& query_manifest,
                         const DatasetManifest& db_manifest, double threshold, const RecallOptions& options) {
  if (!(std::isfinite(threshold) && threshold >= 0.0)) throw ValidationError("threshold must be finite and >= 0");
  std::vector<int> ns = options.ns;
  if (ns.empty()) throw ValidationError("no N values requested");
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  if (ns.front() < 1) throw ValidationError("N values must be >= 1");

  const auto qmode = query_manifest.pose_mode();
  const auto dmode = db_manifest.pose_mode();
  if (qmode && dmode && *qmode != *dmode) throw ValidationError("query and database manifests use different pose modes");
  if (query_manifest.gt_mode.kind != db_manifest.gt_mode.kind) {
    throw ValidationError("query and database manifests use different ground-truth modes");
  }

  auto pose_of = [](const DatasetManifest& m, const std::string& id, const char* role) -> const GeoPose& {
    const ImageRecord* r = m.find(id);
    if (r == nullptr) throw ValidationError(std::string(role) + " id '" + id + "' is not in its manifest");
    if (!r->pose) throw ValidationError(std::string(role) + " '" + id + "' has no pose");
    return *r->pose;
  };
  for (const ImageRecord& r : db_manifest.records) pose_of(db_manifest, r.id, "database record");

  RecallReport rep;
  rep.dataset = query_manifest.name;
  rep.threshold = threshold;
  rep.unit = query_manifest.gt_mode.kind == GroundTruthMode::Kind::index ? "frames" : "m";
  rep.label = options.label;
  rep.ns = ns;
  rep.hits.assign(ns.size(), 0);

  for (const RetrievalResult& res : results) {
    const GeoPose& qp = pose_of(query_manifest, res.query_id, "query");
    if (res.ranked_db_ids.size() < static_cast<std::size_t>(ns.back())) {
      throw ValidationError("result for '" + res.query_id + "' has fewer than " + std::to_string(ns.back()) +
                            " candidates");
    }
    bool any = false;
    for (const ImageRecord& r : db_manifest.records) {
      if (geodesic_distance(qp, *r.pose) <= threshold) {
        any = true;
        break;
      }
    }
    if (!any) {
      if (options.empty_policy == EmptyGroundTruth::error) {
        throw ValidationError("query '" + res.query_id + "' has no database image within " + two_decimals(hundredths(threshold)) +
                              " " + rep.unit + " (empty ground truth)");
      }
      if (options.empty_policy == EmptyGroundTruth::exclude) {
        ++rep.excluded;
        continue;
      }
    }
    ++rep.queries;
    std::size_t first_hit = res.ranked_db_ids.size();
    for (std::size_t k = 0; k < res.ranked_db_ids.size(); ++k) {
      if (geodesic_distance(qp, pose_of(db_manifest, res.ranked_db_ids[k], "database record")) <= threshold) {
        first_hit = k;
        break;
      }
    }
    for (std::size_t i = 0; i < ns.size(); ++i) {
      if (first_hit < static_cast<std::size_t>(ns[i])) ++rep.hits[i];
    }
  }
  for (std::size_t h : rep.hits) {
    rep.recall.push_back(rep.queries == 0 ? 0.0 : 100.0 * static_cast<double>(h) / static_cast<double>(rep.queries));
  }
  if (const auto it = query_manifest.metadata.find("bitrate_bps"); it != query_manifest.metadata.end()) {
    try {
      rep.bitrate_bps = std::stod(it->second);
    } catch (const std::exception&) {
      throw FormatError("query manifest has a malformed bitrate_bps entry: " + it->second);
    }
  }
  return rep;
}

std::string format_signed_hundredths(long long h) { return (h > 0 ? "+" : "") + two_decimals(h); }

DeltaTable delta_report(const RecallReport& baseline, const RecallReport& treated) {
  if (baseline.dataset != treated.dataset) {
    throw ValidationError("reports are for different datasets: '" + baseline.dataset + "' vs '" + treated.dataset + "'");
  }
  if (baseline.threshold != treated.threshold || baseline.unit != treated.unit) {
    throw ValidationError("reports use different thresholds");
  }
  if (baseline.ns != treated.ns) throw ValidationError("reports use different N values");
  DeltaTable t;
  t.dataset = baseline.dataset;
  t.threshold = baseline.threshold;
  t.baseline_label = baseline.label;
  t.treated_label = treated.label;
  for (std::size_t i = 0; i < baseline.ns.size(); ++i) {
    DeltaRow row;
    row.n = baseline.ns[i];
    const long long b = hundredths(baseline.recall[i]);
    const long long tr = hundredths(treated.recall[i]);
    row.baseline = two_decimals(b);
    row.treated = two_decimals(tr);
    row.delta_hundredths = tr - b;
    row.delta = format_signed_hundredths(row.delta_hundredths);
    t.rows.push_back(row);
  }
  return t;
}

}  // namespace loqi
