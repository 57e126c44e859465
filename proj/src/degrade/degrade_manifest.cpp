#include <cctype>
#include <fstream>
#include <set>

#include "loqi/core/errors.hpp"
#include "loqi/core/image_io.hpp"
#include "loqi/degrade/degrade.hpp"

namespace loqi {
namespace fs = std::filesystem;

namespace {

std::string safe_stem(const std::string& id, std::set<std::string>& used) {
  std::string stem;
  for (char ch : id) {
    const auto u = static_cast<unsigned char>(ch);
    stem += (std::isalnum(u) || ch == '-' || ch == '_' || ch == '.') ? ch : '_';
  }
  if (stem.empty() || stem == "." || stem == "..") stem = "img";
  std::string candidate = stem;
  for (int n = 1; !used.insert(candidate).second; ++n) candidate = stem + "_" + std::to_string(n);
  return candidate;
}

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ", ";
    if (i == 20) {
      out += "... (" + std::to_string(ids.size()) + " total)";
      break;
    }
    out += ids[i];
  }
  return out;
}

}  // namespace

DatasetManifest degrade_manifest(const DatasetManifest& manifest, const DegradationSpec& spec, const fs::path& out_dir,
                                 const DegradeOptions& options) {
  spec.validate();
  manifest.validate();
  fs::create_directories(out_dir);
  const fs::path manifest_path = out_dir / "manifest.tsv";

  DatasetManifest out;
  out.name = manifest.name + "@" + spec.to_string();
  out.split = manifest.split;
  out.gt_mode = manifest.gt_mode;
  out.metadata = manifest.metadata;
  out.metadata["degradation"] = spec.to_string();

  std::set<std::string> used;
  std::vector<std::string> stems;
  stems.reserve(manifest.records.size());
  for (const auto& r : manifest.records) stems.push_back(safe_stem(r.id, used));

  auto make_record = [&](const ImageRecord& src, const fs::path& path) {
    ImageRecord r = src;
    r.path = fs::absolute(path).lexically_normal();
    r.degradation = spec;
    r.source_path = src.source_path.empty() ? src.path : src.source_path;
    return r;
  };

  std::vector<std::string> failed;
  std::string first_error;
  auto note_failure = [&](const std::string& id, const std::exception& e) {
    failed.push_back(id);
    if (first_error.empty()) first_error = e.what();
  };

  if (const auto* video = std::get_if<VideoQpSpec>(&spec.variant)) {
    std::vector<Image> frames;
    frames.reserve(manifest.records.size());
    for (const auto& r : manifest.records) {
      try {
        frames.push_back(read_image(r.path));
      } catch (const std::exception& e) {
        note_failure(r.id, e);
      }
    }
    if (!failed.empty()) {
      throw IoError("cannot read " + std::to_string(failed.size()) + " source image(s): " + join_ids(failed) +
                    " (first error: " + first_error + ")");
    }
    if (!frames.empty()) {
      const VideoRoundTrip rt = video_quantize_roundtrip(frames, *video, options.fps, options.video);
      for (std::size_t i = 0; i < frames.size(); ++i) {
        const fs::path p = out_dir / (stems[i] + ".png");
        write_png(p, rt.frames[i]);
        out.records.push_back(make_record(manifest.records[i], p));
      }
      std::ofstream(out_dir / "bitrate.json") << to_json(rt.bitrate) << '\n';
      out.metadata["encoder"] = rt.bitrate.encoder;
      out.metadata["bitrate_bps"] = std::to_string(rt.bitrate.bitrate_bps);
    } else {
      out.metadata["encoder"] = video_encoder_identity(options.video, *video);
    }
  } else {
    std::string encoder;
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
      const ImageRecord& r = manifest.records[i];
      try {
        const Image src = read_image(r.path);
        fs::path p;
        if (const auto* jpeg = std::get_if<JpegSpec>(&spec.variant)) {
          JpegDegradeResult jr = jpeg_degrade(src, jpeg->quality);
          p = out_dir / (stems[i] + ".jpg");
          write_file(p, jr.encoded);
          encoder = jr.encoder;
        } else {
          const auto& rs = std::get<ResizeSpec>(spec.variant);
          p = out_dir / (stems[i] + ".png");
          write_png(p, resize_degrade(src, rs.width, rs.height));
          encoder = "bilinear half-pixel " + std::to_string(rs.width) + "x" + std::to_string(rs.height);
        }
        out.records.push_back(make_record(r, p));
      } catch (const std::exception& e) {
        note_failure(r.id, e);
      }
    }
    if (!failed.empty()) {
      throw IoError("degradation failed for " + std::to_string(failed.size()) + " record(s): " + join_ids(failed) +
                    " (first error: " + first_error + ")");
    }
    if (encoder.empty()) {
      if (const auto* jpeg = std::get_if<JpegSpec>(&spec.variant)) {
        encoder = jpeg_encoder_identity() + " quality=" + std::to_string(jpeg->quality);
      } else {
        encoder = "bilinear half-pixel";
      }
    }
    out.metadata["encoder"] = encoder;
  }

  save_manifest(out, manifest_path);
  return out;
}

}  // namespace loqi
