#include "loqi/retrieval/report.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "loqi/core/errors.hpp"
#include "loqi/core/image_io.hpp"

namespace loqi {
namespace {

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.emplace_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& s, const std::string& source, std::size_t line, const char* what) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw FormatError(source, line, std::string("bad ") + what + " '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_recall_report(const RecallReport& r) {
  std::ostringstream out;
  out << "# loqi-recall 1\n";
  out << "# dataset: " << r.dataset << "\n";
  out << "# threshold: " << shortest(r.threshold) << "\n";
  out << "# unit: " << r.unit << "\n";
  out << "# label: " << r.label << "\n";
  out << "# queries: " << r.queries << "\n";
  out << "# excluded: " << r.excluded << "\n";
  if (r.bitrate_bps) out << "# bitrate_bps: " << shortest(*r.bitrate_bps) << "\n";
  out << "N\trecall\thits\n";
  for (std::size_t i = 0; i < r.ns.size(); ++i) out << r.ns[i] << "\t" << r.formatted(i) << "\t" << r.hits[i] << "\n";
  return out.str();
}

RecallReport parse_recall_report(std::string_view text, const std::string& source) {
  RecallReport r;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  bool magic = false, header = false;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!magic) {
      if (line != "# loqi-recall 1") throw FormatError(source, lineno, "not a recall report");
      magic = true;
      continue;
    }
    if (line.starts_with("# ")) {
      const auto colon = line.find(": ");
      const std::string key(line.substr(2, colon == std::string_view::npos ? std::string_view::npos : colon - 2));
      const std::string val = colon == std::string_view::npos ? "" : std::string(line.substr(colon + 2));
      if (key == "dataset") {
        r.dataset = val;
      } else if (key == "threshold") {
        r.threshold = parse_number<double>(val, source, lineno, "threshold");
      } else if (key == "unit") {
        r.unit = val;
      } else if (key == "label") {
        r.label = val;
      } else if (key == "queries") {
        r.queries = parse_number<std::size_t>(val, source, lineno, "query count");
      } else if (key == "excluded") {
        r.excluded = parse_number<std::size_t>(val, source, lineno, "excluded count");
      } else if (key == "bitrate_bps") {
        r.bitrate_bps = parse_number<double>(val, source, lineno, "bitrate");
      }
      continue;
    }
    if (!header) {
      if (line != "N\trecall\thits") throw FormatError(source, lineno, "expected header 'N<TAB>recall<TAB>hits'");
      header = true;
      continue;
    }
    const auto cols = split_tabs(line);
    if (cols.size() != 3) throw FormatError(source, lineno, "expected 3 columns");
    r.ns.push_back(parse_number<int>(cols[0], source, lineno, "N"));
    const double pct = parse_number<double>(cols[1], source, lineno, "recall");
    if (!(pct >= 0.0 && pct <= 100.0)) throw FormatError(source, lineno, "recall outside [0, 100]");
    r.recall.push_back(pct);
    r.hits.push_back(parse_number<std::size_t>(cols[2], source, lineno, "hit count"));
  }
  if (!magic || !header) throw FormatError(source + ": incomplete recall report");
  return r;
}

void write_recall_report(const std::filesystem::path& path, const RecallReport& report) {
  const std::string s = format_recall_report(report);
  write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

RecallReport read_recall_report(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_recall_report(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                             path.string());
}

std::string format_delta_table(const DeltaTable& t) {
  std::ostringstream out;
  out << "# dataset: " << t.dataset << "\n";
  out << "# threshold: " << shortest(t.threshold) << "\n";
  out << "# baseline: " << t.baseline_label << "\n";
  out << "# treated: " << t.treated_label << "\n";
  out << "N\tbaseline\ttreated\tdelta\n";
  for (const auto& r : t.rows) out << r.n << "\t" << r.baseline << "\t" << r.treated << "\t" << r.delta << "\n";
  return out.str();
}

std::string format_results(const std::vector<RetrievalResult>& results) {
  std::ostringstream out;
  out << "query\trank\tdb_id\tdistance\n";
  for (const auto& r : results) {
    for (std::size_t k = 0; k < r.ranked_db_ids.size(); ++k) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", r.distances[k]);
      out << r.query_id << "\t" << (k + 1) << "\t" << r.ranked_db_ids[k] << "\t" << buf << "\n";
    }
  }
  return out.str();
}

}  // namespace loqi
