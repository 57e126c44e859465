#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "loqi/retrieval/retrieval.hpp"

namespace loqi {

/// Tab-separated recall report:
///
///   # loqi-recall 1
///   # dataset: <name>
///   # threshold: 25
///   # unit: m
///   # label: <label>
///   # queries: <n>
///   # excluded: <n>
///   # bitrate_bps: <x>        (optional)
///   N	recall	hits
///   1	71.87	46
std::string format_recall_report(const RecallReport& report);
RecallReport parse_recall_report(std::string_view text, const std::string& source = "<report>");
void write_recall_report(const std::filesystem::path& path, const RecallReport& report);
RecallReport read_recall_report(const std::filesystem::path& path);

/// N	baseline	treated	delta
std::string format_delta_table(const DeltaTable& table);

/// Ranked results, one line per (query, rank): query	rank	db_id	distance
std::string format_results(const std::vector<RetrievalResult>& results);

}  // namespace loqi
