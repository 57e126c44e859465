#include <cstdlib>
#include <fstream>
#include <map>

#include <json.hpp>

#include "loqi/core/errors.hpp"
#include "loqi/core/image_io.hpp"
#include "loqi/core/process.hpp"
#include "loqi/degrade/video.hpp"

namespace loqi {
namespace fs = std::filesystem;

const char* const VideoCodecConfig::kDefaultEncodeTemplate =
    "{ffmpeg} -hide_banner -loglevel error -nostdin -y -f rawvideo -pix_fmt rgb24 -s {width}x{height} -r {fps} "
    "-i {input} -vf pad=ceil(iw/2)*2:ceil(ih/2)*2 -c:v libx264 -preset medium -profile:v {profile} -qp {qp} "
    "-pix_fmt yuv420p -threads 1 -an -fflags +bitexact {output}";

const char* const VideoCodecConfig::kDefaultDecodeTemplate =
    "{ffmpeg} -hide_banner -loglevel error -nostdin -y -threads 1 -i {input} -vf format=rgb24,crop={width}:{height}:0:0 "
    "-f rawvideo -pix_fmt rgb24 {output}";

Rational Rational::parse(const std::string& text) {
  Rational r;
  try {
    const auto slash = text.find('/');
    std::size_t used = 0;
    if (slash == std::string::npos) {
      r.num = std::stoi(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing");
      r.den = 1;
    } else {
      r.num = std::stoi(text.substr(0, slash));
      r.den = std::stoi(text.substr(slash + 1));
    }
  } catch (const std::exception&) {
    throw ValidationError("invalid frame rate '" + text + "'");
  }
  if (r.num <= 0 || r.den <= 0) throw ValidationError("frame rate must be positive");
  return r;
}

std::string to_json(const BitrateRecord& record) {
  nlohmann::ordered_json j;
  j["spec"] = record.spec.to_string();
  j["total_bytes"] = record.total_bytes;
  j["duration_s"] = record.duration_s;
  j["bitrate_bps"] = record.bitrate_bps;
  j["fps"] = record.fps.to_string();
  j["frame_count"] = record.frame_count;
  j["encoder"] = record.encoder;
  return j.dump(2);
}

BitrateRecord bitrate_record_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    BitrateRecord r;
    r.spec = DegradationSpec::parse(j.at("spec").get<std::string>());
    r.total_bytes = j.at("total_bytes").get<std::uint64_t>();
    r.duration_s = j.at("duration_s").get<double>();
    r.bitrate_bps = j.at("bitrate_bps").get<double>();
    r.fps = Rational::parse(j.at("fps").get<std::string>());
    r.frame_count = j.at("frame_count").get<std::size_t>();
    r.encoder = j.value("encoder", "");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bitrate record: ") + e.what());
  }
}

fs::path resolve_ffmpeg(const VideoCodecConfig& config) {
  std::string candidate = config.ffmpeg;
  if (candidate.empty()) {
    if (const char* env = std::getenv("LOQI_FFMPEG"); env && *env) candidate = env;
  }
  if (candidate.empty()) candidate = "ffmpeg";
  if (auto found = find_executable(candidate)) return fs::absolute(*found);
  throw EnvironmentError("video encoder '" + candidate +
                         "' not found; install an ffmpeg build with libx264 (for example `pip install "
                         "imageio-ffmpeg`) and point LOQI_FFMPEG at the binary");
}

std::string video_encoder_identity(const VideoCodecConfig& config, const VideoQpSpec& spec) {
  const fs::path exe = resolve_ffmpeg(config);
  const ProcessResult r = run_process({exe.string(), "-hide_banner", "-version"});
  std::string first = r.stdout_text.substr(0, r.stdout_text.find('\n'));
  if (r.exit_code != 0 || first.empty()) first = exe.filename().string() + " (version unknown)";
  return first + "; libx264 constant-qp qp=" + std::to_string(spec.qp) + " profile=" + spec.codec_profile +
         " preset=medium yuv420p threads=1";
}

VideoRoundTrip video_quantize_roundtrip(std::span<const Image> frames, const VideoQpSpec& spec, Rational fps,
                                        const VideoCodecConfig& config) {
  DegradationSpec{spec}.validate();
  if (spec.qp == 0 && spec.codec_profile != "high444") {
    throw ValidationError("QP 0 is lossless in H.264 and needs codec_profile high444, got '" + spec.codec_profile + "'");
  }
  if (frames.empty()) throw ValidationError("video round-trip needs at least one frame");
  if (fps.num <= 0 || fps.den <= 0) throw ValidationError("frame rate must be positive");
  const int w = frames.front().width();
  const int h = frames.front().height();
  if (w < 2 || h < 2) throw ValidationError("video frames must be at least 2x2");
  for (const auto& f : frames) {
    if (f.width() != w || f.height() != h) throw ValidationError("video frames must share one size");
  }

  const fs::path exe = resolve_ffmpeg(config);
  TempDir dir("loqi-video");
  const fs::path raw_in = dir.path() / "input.rgb";
  const fs::path encoded = dir.path() / ("encoded." + config.container_extension);
  const fs::path raw_out = dir.path() / "decoded.rgb";
  {
    std::ofstream out(raw_in, std::ios::binary);
    for (const auto& f : frames) {
      out.write(reinterpret_cast<const char*>(f.data().data()), static_cast<std::streamsize>(f.data().size()));
    }
    if (!out) throw IoError("cannot write raw frames to " + raw_in.string());
  }

  std::map<std::string, std::string> values{{"ffmpeg", exe.string()},
                                            {"width", std::to_string(w)},
                                            {"height", std::to_string(h)},
                                            {"fps", fps.to_string()},
                                            {"qp", std::to_string(spec.qp)},
                                            {"profile", spec.codec_profile},
                                            {"input", raw_in.string()},
                                            {"output", encoded.string()}};
  const ProcessResult enc = run_process(expand_command(config.encode_template, values));
  if (enc.exit_code != 0) throw ExternalToolError("video encode failed", enc.exit_code, enc.stderr_text);
  if (!fs::exists(encoded)) throw ExternalToolError("video encoder produced no output", enc.exit_code, enc.stderr_text);

  values["input"] = encoded.string();
  values["output"] = raw_out.string();
  const ProcessResult dec = run_process(expand_command(config.decode_template, values));
  if (dec.exit_code != 0) throw ExternalToolError("video decode failed", dec.exit_code, dec.stderr_text);

  const auto raw = read_file(raw_out);
  const std::size_t frame_bytes = static_cast<std::size_t>(w) * h * 3;
  if (raw.size() != frame_bytes * frames.size()) {
    throw ExternalToolError("decoded stream has " + std::to_string(raw.size() / frame_bytes) + " frames, expected " +
                                std::to_string(frames.size()),
                            dec.exit_code, dec.stderr_text);
  }

  VideoRoundTrip result;
  result.frames.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto first = raw.begin() + static_cast<std::ptrdiff_t>(i * frame_bytes);
    result.frames.emplace_back(w, h, std::vector<std::uint8_t>(first, first + static_cast<std::ptrdiff_t>(frame_bytes)));
  }
  BitrateRecord& br = result.bitrate;
  br.spec = DegradationSpec{spec};
  br.total_bytes = fs::file_size(encoded);
  br.fps = fps;
  br.frame_count = frames.size();
  br.duration_s = static_cast<double>(frames.size()) * fps.den / fps.num;
  br.bitrate_bps = static_cast<double>(br.total_bytes) * 8.0 / br.duration_s;
  br.encoder = video_encoder_identity(config, spec);
  return result;
}

}  // namespace loqi
