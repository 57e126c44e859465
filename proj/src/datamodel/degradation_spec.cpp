#include <charconv>

#include "loqi/core/errors.hpp"
#include "loqi/datamodel/degradation_spec.hpp"

namespace loqi {
namespace {

int parse_int(std::string_view s, std::string_view what) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ValidationError("invalid " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

DegradationSpec DegradationSpec::jpeg(int quality) {
  DegradationSpec s{JpegSpec{quality}};
  s.validate();
  return s;
}

DegradationSpec DegradationSpec::resize(int width, int height) {
  DegradationSpec s{ResizeSpec{width, height}};
  s.validate();
  return s;
}

DegradationSpec DegradationSpec::video_qp(int qp, std::string codec_profile) {
  DegradationSpec s{VideoQpSpec{qp, std::move(codec_profile)}};
  s.validate();
  return s;
}

void DegradationSpec::validate() const {
  if (const auto* j = std::get_if<JpegSpec>(&variant)) {
    if (j->quality < 1 || j->quality > 100) throw ValidationError("JPEG quality must be in [1, 100]");
  } else if (const auto* r = std::get_if<ResizeSpec>(&variant)) {
    if (r->width < 8 || r->height < 8) throw ValidationError("resize target must be at least 8x8");
  } else if (const auto* v = std::get_if<VideoQpSpec>(&variant)) {
    if (v->qp < 0 || v->qp > 51) throw ValidationError("QP must be in [0, 51]");
    if (v->codec_profile.empty()) throw ValidationError("codec profile must not be empty");
  }
}

std::string DegradationSpec::to_string() const {
  if (const auto* j = std::get_if<JpegSpec>(&variant)) return "jpeg:" + std::to_string(j->quality);
  if (const auto* r = std::get_if<ResizeSpec>(&variant)) {
    return "resize:" + std::to_string(r->width) + "x" + std::to_string(r->height);
  }
  const auto& v = std::get<VideoQpSpec>(variant);
  std::string out = "videoqp:" + std::to_string(v.qp);
  if (v.codec_profile != "high") out += ":" + v.codec_profile;
  return out;
}

DegradationSpec DegradationSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ValidationError("degradation spec must look like jpeg:Q, resize:WxH or videoqp:QP; got '" +
                          std::string(text) + "'");
  }
  const std::string_view kind = text.substr(0, colon);
  const std::string_view arg = text.substr(colon + 1);
  if (kind == "jpeg") return jpeg(parse_int(arg, "JPEG quality"));
  if (kind == "resize") {
    const auto x = arg.find('x');
    if (x == std::string_view::npos) throw ValidationError("resize spec must be WxH");
    return resize(parse_int(arg.substr(0, x), "width"), parse_int(arg.substr(x + 1), "height"));
  }
  if (kind == "videoqp") {
    const auto c2 = arg.find(':');
    if (c2 == std::string_view::npos) return video_qp(parse_int(arg, "QP"));
    return video_qp(parse_int(arg.substr(0, c2), "QP"), std::string(arg.substr(c2 + 1)));
  }
  throw ValidationError("unknown degradation kind '" + std::string(kind) + "'");
}

}  // namespace loqi
