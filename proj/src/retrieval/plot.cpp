#include "loqi/retrieval/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "loqi/core/errors.hpp"

namespace loqi {
namespace {

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"};

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  const double a = std::abs(v);
  if (a >= 1e6) {
    std::snprintf(buf, sizeof buf, "%gM", v / 1e6);
  } else if (a >= 1e3) {
    std::snprintf(buf, sizeof buf, "%gk", v / 1e3);
  } else {
    std::snprintf(buf, sizeof buf, "%g", v);
  }
  return buf;
}

}  // namespace

std::string render_line_plot_svg(const PlotSpec& spec, std::span<const PlotSeries> series) {
  double xmin = INFINITY, xmax = -INFINITY;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) throw ValidationError("plot points must be finite");
      if (spec.log_x && x <= 0.0) throw ValidationError("log-scale x values must be positive");
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
    }
  }
  if (!(xmin <= xmax)) {
    xmin = 0.0;
    xmax = 1.0;
  }
  auto tx = [&](double x) { return spec.log_x ? std::log10(x) : x; };
  double lo = tx(xmin), hi = tx(xmax);
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double ml = 64, mr = 150, mt = 36, mb = 52;
  const double pw = spec.width - ml - mr;
  const double ph = spec.height - mt - mb;
  auto px = [&](double x) { return ml + (tx(x) - lo) / (hi - lo) * pw; };
  auto py = [&](double y) {
    const double t = (std::clamp(y, spec.y_min, spec.y_max) - spec.y_min) / (spec.y_max - spec.y_min);
    return mt + (1.0 - t) * ph;
  };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
    << "\" viewBox=\"0 0 " << spec.width << " " << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << spec.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << esc(spec.title)
    << "</text>\n";

  for (int i = 0; i <= 5; ++i) {
    const double y = spec.y_min + (spec.y_max - spec.y_min) * i / 5.0;
    o << "<line x1=\"" << num(ml) << "\" y1=\"" << num(py(y)) << "\" x2=\"" << num(ml + pw) << "\" y2=\""
      << num(py(y)) << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << num(ml - 6) << "\" y=\"" << num(py(y) + 4) << "\" text-anchor=\"end\">" << tick_label(y)
      << "</text>\n";
  }
  std::vector<double> xt;
  if (spec.log_x) {
    for (double e = std::floor(lo); e <= std::ceil(hi); e += 1.0) {
      if (e >= lo - 1e-9 && e <= hi + 1e-9) xt.push_back(std::pow(10.0, e));
    }
    if (xt.size() < 2) xt = {xmin, xmax};
  } else {
    std::map<double, int> uniq;
    for (const auto& s : series) {
      for (const auto& p : s.points) uniq[p.first] = 1;
    }
    if (uniq.size() <= 12) {
      for (const auto& [x, _] : uniq) xt.push_back(x);
    } else {
      for (int i = 0; i <= 6; ++i) xt.push_back(lo + (hi - lo) * i / 6.0);
    }
  }
  for (double x : xt) {
    o << "<line x1=\"" << num(px(x)) << "\" y1=\"" << num(mt + ph) << "\" x2=\"" << num(px(x)) << "\" y2=\""
      << num(mt + ph + 5) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << num(px(x)) << "\" y=\"" << num(mt + ph + 18) << "\" text-anchor=\"middle\">"
      << tick_label(x) << "</text>\n";
  }
  o << "<rect x=\"" << num(ml) << "\" y=\"" << num(mt) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << num(ml + pw / 2) << "\" y=\"" << spec.height - 12 << "\" text-anchor=\"middle\">"
    << esc(spec.x_label) << "</text>\n";
  o << "<text transform=\"translate(16 " << num(mt + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << esc(spec.y_label) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    const auto& s = series[i];
    if (!s.points.empty()) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (const auto& [x, y] : s.points) o << num(px(x)) << "," << num(py(y)) << " ";
      o << "\"/>\n";
      for (const auto& [x, y] : s.points) {
        o << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      }
    }
    const double ly = mt + 12 + 18.0 * static_cast<double>(i);
    o << "<line x1=\"" << num(ml + pw + 12) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(ml + pw + 32) << "\" y2=\""
      << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << num(ml + pw + 38) << "\" y=\"" << num(ly + 4) << "\">" << esc(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string recall_vs_n_svg(std::span<const RecallReport> reports) {
  std::vector<PlotSeries> series;
  for (const auto& r : reports) {
    PlotSeries s;
    s.label = r.label.empty() ? r.dataset : r.label;
    for (std::size_t i = 0; i < r.ns.size(); ++i) s.points.emplace_back(r.ns[i], r.recall[i]);
    series.push_back(std::move(s));
  }
  PlotSpec spec;
  spec.title = reports.empty() ? "Recall@N" : "Recall@N (" + reports.front().dataset + ")";
  spec.x_label = "N";
  spec.y_label = "Recall (%)";
  return render_line_plot_svg(spec, series);
}

std::string recall_vs_bitrate_svg(std::span<const RecallReport> reports, int n) {
  std::map<std::string, PlotSeries> by_label;
  for (const auto& r : reports) {
    if (!r.bitrate_bps) continue;
    auto& s = by_label[r.label];
    s.label = r.label.empty() ? "R@" + std::to_string(n) : r.label;
    s.points.emplace_back(*r.bitrate_bps, r.at(n));
  }
  std::vector<PlotSeries> series;
  for (auto& [_, s] : by_label) {
    std::sort(s.points.begin(), s.points.end());
    series.push_back(std::move(s));
  }
  if (series.empty()) throw ValidationError("no report carries a bitrate");
  PlotSpec spec;
  spec.title = "R@" + std::to_string(n) + " vs. bitrate";
  spec.x_label = "Bitrate (bit/s)";
  spec.y_label = "R@" + std::to_string(n) + " (%)";
  spec.log_x = true;
  return render_line_plot_svg(spec, series);
}

}  // namespace loqi
