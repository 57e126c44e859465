#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "loqi/core/errors.hpp"
#include "loqi/datamodel/manifest.hpp"

namespace loqi {
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kMagic = "# loqi-manifest 1";
const std::vector<std::string> kColumns = {"id",       "path",        "pose_mode",        "lat_easting",
                                           "lon_northing", "frame",   "place_id",         "quality_tag",
                                           "degradation_spec", "source_path"};

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

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(std::string_view s, const std::string& src, std::size_t line, std::string_view column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw FormatError(src, line, "column " + std::string(column) + ": not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::int64_t parse_int64(std::string_view s, const std::string& src, std::size_t line, std::string_view column) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw FormatError(src, line, "column " + std::string(column) + ": not an integer: '" + std::string(s) + "'");
  }
  return v;
}

void check_field(const std::string& value, std::string_view what) {
  if (value.find_first_of("\t\n\r") != std::string::npos) {
    throw ValidationError(std::string(what) + " must not contain tabs or newlines: '" + value + "'");
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string to_string(Split split) {
  switch (split) {
    case Split::database:
      return "database";
    case Split::query:
      return "query";
    case Split::train:
      return "train";
  }
  return "unknown";
}

Split parse_split(std::string_view text) {
  if (text == "database") return Split::database;
  if (text == "query") return Split::query;
  if (text == "train") return Split::train;
  throw ValidationError("unknown split '" + std::string(text) + "'");
}

std::string GroundTruthMode::to_string() const {
  return std::string(kind == Kind::metric ? "metric " : "index ") + format_double(threshold);
}

GroundTruthMode GroundTruthMode::parse(std::string_view text) {
  const auto space = text.find(' ');
  if (space == std::string_view::npos) throw ValidationError("gt_mode must be 'metric D' or 'index D'");
  GroundTruthMode mode;
  const auto kind = text.substr(0, space);
  if (kind == "metric") {
    mode.kind = Kind::metric;
  } else if (kind == "index") {
    mode.kind = Kind::index;
  } else {
    throw ValidationError("unknown gt_mode kind '" + std::string(kind) + "'");
  }
  const auto num = text.substr(space + 1);
  const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), mode.threshold);
  if (ec != std::errc{} || ptr != num.data() + num.size() || !(mode.threshold >= 0.0)) {
    throw ValidationError("invalid gt_mode threshold '" + std::string(num) + "'");
  }
  return mode;
}

std::optional<PoseMode> DatasetManifest::pose_mode() const {
  for (const auto& r : records) {
    if (r.pose) return r.pose->mode;
  }
  return std::nullopt;
}

void DatasetManifest::validate() const {
  check_field(name, "manifest name");
  std::set<std::string_view> ids;
  bool any_pose = false;
  bool any_no_pose = false;
  std::optional<PoseMode> mode;
  for (const auto& r : records) {
    if (r.id.empty()) throw ValidationError("record with empty id");
    check_field(r.id, "record id");
    check_field(r.path.string(), "record path");
    if (!ids.insert(r.id).second) throw ValidationError("duplicate record id '" + r.id + "'");
    if (r.pose) {
      r.pose->validate();
      any_pose = true;
      if (mode && *mode != r.pose->mode) {
        throw ValidationError("mixed pose modes in manifest '" + name + "' (record '" + r.id + "')");
      }
      mode = r.pose->mode;
    } else {
      any_no_pose = true;
    }
    if (r.degradation) r.degradation->validate();
  }
  if (any_pose && any_no_pose) {
    throw ValidationError("mixed pose modes in manifest '" + name + "': some records have no pose");
  }
  if (mode) {
    const bool index_mode = *mode == PoseMode::frame_index;
    if (index_mode != (gt_mode.kind == GroundTruthMode::Kind::index)) {
      throw ValidationError("gt_mode '" + gt_mode.to_string() + "' inconsistent with pose mode " + to_string(*mode));
    }
  }
}

const ImageRecord* DatasetManifest::find(std::string_view id) const {
  for (const auto& r : records) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

DatasetManifest parse_manifest(std::string_view text, const fs::path& base_dir, const std::string& src) {
  DatasetManifest m;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  bool seen_magic = false;
  bool seen_header = false;
  bool has_source_column = false;

  auto resolve = [&](const std::string& p) -> fs::path {
    if (p.empty()) return {};
    fs::path path(p);
    if (path.is_relative()) path = base_dir / path;
    return path.lexically_normal();
  };

  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty()) continue;
    if (!seen_header && raw.rfind('#', 0) == 0) {
      if (raw == kMagic) {
        seen_magic = true;
        continue;
      }
      const std::string_view body = trim(std::string_view(raw).substr(1));
      const auto colon = body.find(':');
      if (colon == std::string_view::npos) continue;  // plain comment
      const std::string key(trim(body.substr(0, colon)));
      const std::string value(trim(body.substr(colon + 1)));
      try {
        if (key == "name") {
          m.name = value;
        } else if (key == "split") {
          m.split = parse_split(value);
        } else if (key == "gt_mode") {
          m.gt_mode = GroundTruthMode::parse(value);
        } else if (key.rfind("meta.", 0) == 0) {
          m.metadata[key.substr(5)] = value;
        }
      } catch (const ValidationError& e) {
        throw FormatError(src, line_no, e.what());
      }
      continue;
    }
    if (!seen_magic) throw FormatError(src, line_no, "missing '" + std::string(kMagic) + "' signature line");
    const auto fields = split_tabs(raw);
    if (!seen_header) {
      const bool full = fields == kColumns;
      const bool short_form = fields.size() == kColumns.size() - 1 &&
                              std::equal(fields.begin(), fields.end(), kColumns.begin());
      if (!full && !short_form) throw FormatError(src, line_no, "unexpected column header");
      has_source_column = full;
      seen_header = true;
      continue;
    }
    const std::size_t expected = has_source_column ? kColumns.size() : kColumns.size() - 1;
    if (fields.size() != expected) {
      throw FormatError(src, line_no,
                        "expected " + std::to_string(expected) + " columns, got " + std::to_string(fields.size()));
    }
    ImageRecord r;
    r.id = fields[0];
    if (r.id.empty()) throw FormatError(src, line_no, "empty id");
    if (fields[1].empty()) throw FormatError(src, line_no, "empty path");
    r.path = resolve(fields[1]);

    const std::string& pose_mode = fields[2];
    auto require_empty = [&](std::size_t col) {
      if (!fields[col].empty()) {
        throw FormatError(src, line_no, "column " + kColumns[col] + " must be empty for pose_mode '" + pose_mode + "'");
      }
    };
    try {
      if (pose_mode.empty()) {
        require_empty(3);
        require_empty(4);
        require_empty(5);
      } else if (pose_mode == "latlon") {
        require_empty(5);
        r.pose = GeoPose::latlon(parse_double(fields[3], src, line_no, kColumns[3]),
                                 parse_double(fields[4], src, line_no, kColumns[4]));
      } else if (pose_mode == "utm" || pose_mode.rfind("utm:", 0) == 0) {
        require_empty(5);
        r.pose = GeoPose::utm(parse_double(fields[3], src, line_no, kColumns[3]),
                              parse_double(fields[4], src, line_no, kColumns[4]),
                              pose_mode.size() > 4 ? pose_mode.substr(4) : std::string{});
      } else if (pose_mode == "frame") {
        require_empty(3);
        require_empty(4);
        r.pose = GeoPose::frame_index(parse_int64(fields[5], src, line_no, kColumns[5]));
      } else {
        throw FormatError(src, line_no, "unknown pose_mode '" + pose_mode + "'");
      }
    } catch (const ValidationError& e) {
      throw FormatError(src, line_no, e.what());
    }
    if (!fields[6].empty()) r.place_id = fields[6];

    const std::string& tag = fields[7];
    if (tag == "high") {
      if (!fields[8].empty()) throw FormatError(src, line_no, "high-quality record with a degradation_spec");
    } else if (tag == "degraded") {
      try {
        r.degradation = DegradationSpec::parse(fields[8]);
      } catch (const ValidationError& e) {
        throw FormatError(src, line_no, e.what());
      }
    } else {
      throw FormatError(src, line_no, "quality_tag must be 'high' or 'degraded', got '" + tag + "'");
    }
    if (has_source_column) r.source_path = resolve(fields[9]);
    m.records.push_back(std::move(r));
  }
  if (!seen_magic) throw FormatError(src, line_no, "missing '" + std::string(kMagic) + "' signature line");
  if (!seen_header) throw FormatError(src, line_no, "missing column header");
  m.validate();
  return m;
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const fs::path base = fs::absolute(path).parent_path();
  return parse_manifest(ss.str(), base, path.string());
}

std::string format_manifest(const DatasetManifest& m, const fs::path& base_dir) {
  m.validate();
  auto rel = [&](const fs::path& p) -> std::string {
    if (p.empty()) return {};
    if (!base_dir.empty()) {
      const fs::path r = fs::absolute(p).lexically_normal().lexically_relative(base_dir);
      // Siblings use "../"; paths that only share the filesystem root stay absolute.
      std::size_t ups = 0, depth = 0;
      for (const auto& part : r) ups += part == ".." ? 1 : 0;
      for (const auto& part : base_dir.relative_path()) depth += part.empty() ? 0 : 1;
      if (!r.empty() && ups < depth) return r.generic_string();
    }
    return p.generic_string();
  };
  std::ostringstream out;
  out << kMagic << '\n';
  out << "# name: " << m.name << '\n';
  out << "# split: " << to_string(m.split) << '\n';
  out << "# gt_mode: " << m.gt_mode.to_string() << '\n';
  for (const auto& [k, v] : m.metadata) {
    check_field(v, "metadata value");
    out << "# meta." << k << ": " << v << '\n';
  }
  for (std::size_t i = 0; i < kColumns.size(); ++i) out << (i ? "\t" : "") << kColumns[i];
  out << '\n';
  for (const auto& r : m.records) {
    out << r.id << '\t' << rel(r.path) << '\t';
    if (!r.pose) {
      out << "\t\t\t";
    } else {
      switch (r.pose->mode) {
        case PoseMode::latlon:
          out << "latlon\t" << format_double(r.pose->first) << '\t' << format_double(r.pose->second) << "\t";
          break;
        case PoseMode::utm:
          out << (r.pose->zone.empty() ? "utm" : "utm:" + r.pose->zone) << '\t' << format_double(r.pose->first)
              << '\t' << format_double(r.pose->second) << "\t";
          break;
        case PoseMode::frame_index:
          out << "frame\t\t\t" << r.pose->frame;
          break;
      }
    }
    out << '\t' << r.place_id.value_or("") << '\t';
    if (r.degradation) {
      out << "degraded\t" << r.degradation->to_string();
    } else {
      out << "high\t";
    }
    out << '\t' << rel(r.source_path) << '\n';
  }
  return out.str();
}

void save_manifest(const DatasetManifest& m, const fs::path& path) {
  const fs::path base = fs::absolute(path).lexically_normal().parent_path();
  const std::string text = format_manifest(m, base);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << text;
  if (!out) throw IoError("short write to manifest " + path.string());
}

}  // namespace loqi
