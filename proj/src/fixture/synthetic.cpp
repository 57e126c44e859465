#include "loqi/fixture/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "loqi/core/errors.hpp"
#include "loqi/core/image_io.hpp"

namespace loqi {
namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double gauss(std::mt19937_64& rng) {
  const double u1 = std::max(unit(rng), 1e-300);
  const double u2 = unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

struct Grating {
  std::array<double, 3> a, b;
  double period, angle, phase;

  std::array<double, 3> at(double x, double y) const {
    const double u = x * std::cos(angle) + y * std::sin(angle);
    const double t = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * u / period + phase);
    return {a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t};
  }
};

struct Shape {
  bool ellipse;
  double cx, cy, rx, ry, angle;
  Grating fill;
};

struct Scene {
  Grating background;
  std::vector<Shape> shapes;
};

Grating random_grating(std::mt19937_64& rng, double min_period, double max_period) {
  Grating g;
  for (int c = 0; c < 3; ++c) {
    g.a[c] = 255.0 * unit(rng);
    g.b[c] = 255.0 * unit(rng);
  }
  g.period = min_period + (max_period - min_period) * unit(rng);
  g.angle = unit(rng) * std::numbers::pi;
  g.phase = unit(rng) * 2.0 * std::numbers::pi;
  return g;
}

// Scenes are defined on a canvas larger than the view so shifted crops
// stay inside it. Fine gratings carry most of the identity, which is what
// heavy compression destroys.
Scene make_scene(const SceneFixtureOptions& o, int place) {
  std::mt19937_64 rng(mix(o.seed, static_cast<std::uint64_t>(place) + 1));
  Scene s;
  s.background = random_grating(rng, 2.5 * o.texture_scale, 8.0 * o.texture_scale);
  const int n = 3 + static_cast<int>(rng() % 4);
  const double cw = o.width + 2.0 * o.max_shift_px;
  const double ch = o.height + 2.0 * o.max_shift_px;
  for (int i = 0; i < n; ++i) {
    Shape sh;
    sh.ellipse = (rng() & 1u) != 0;
    sh.cx = unit(rng) * cw;
    sh.cy = unit(rng) * ch;
    sh.rx = (0.1 + 0.25 * unit(rng)) * cw;
    sh.ry = (0.1 + 0.25 * unit(rng)) * ch;
    sh.angle = unit(rng) * std::numbers::pi;
    sh.fill = random_grating(rng, 2.5 * o.texture_scale, 6.0 * o.texture_scale);
    s.shapes.push_back(sh);
  }
  return s;
}

std::array<double, 3> shade(const Scene& s, double x, double y) {
  std::array<double, 3> v = s.background.at(x, y);
  for (const Shape& sh : s.shapes) {
    const double dx = x - sh.cx, dy = y - sh.cy;
    const double ca = std::cos(sh.angle), sa = std::sin(sh.angle);
    const double u = (dx * ca + dy * sa) / sh.rx;
    const double w = (-dx * sa + dy * ca) / sh.ry;
    const bool inside = sh.ellipse ? u * u + w * w <= 1.0 : std::abs(u) <= 1.0 && std::abs(w) <= 1.0;
    if (inside) v = sh.fill.at(x, y);
  }
  return v;
}

std::uint8_t to_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace

void SceneFixtureOptions::validate() const {
  if (places < 2) throw ValidationError("fixture needs at least 2 places");
  if (views < 2) throw ValidationError("fixture needs at least 2 views per place");
  if (width < 8 || height < 8) throw ValidationError("fixture images must be at least 8x8");
  if (!(spacing_m > 0.0) || !(jitter_m >= 0.0)) throw ValidationError("bad fixture spacing or jitter");
  if (max_shift_px < 0 || !(noise_sigma >= 0.0)) throw ValidationError("bad fixture shift or noise");
  if (!(texture_scale > 0.0)) throw ValidationError("fixture texture_scale must be positive");
}

Image render_place_view(const SceneFixtureOptions& o, int place, int view) {
  o.validate();
  const Scene scene = make_scene(o, place);
  std::mt19937_64 rng(mix(mix(o.seed, static_cast<std::uint64_t>(place) + 1), static_cast<std::uint64_t>(view) + 101));
  const int span = 2 * o.max_shift_px + 1;
  const int ox = static_cast<int>(rng() % static_cast<std::uint64_t>(span));
  const int oy = static_cast<int>(rng() % static_cast<std::uint64_t>(span));
  const double gain = 0.9 + 0.2 * unit(rng);
  const double bias = -8.0 + 16.0 * unit(rng);
  Image img(o.width, o.height);
  for (int y = 0; y < o.height; ++y) {
    for (int x = 0; x < o.width; ++x) {
      const auto v = shade(scene, x + ox + 0.5, y + oy + 0.5);
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = to_u8(v[c] * gain + bias + o.noise_sigma * gauss(rng));
    }
  }
  return img;
}

GeoPose place_view_pose(const SceneFixtureOptions& o, int place, int view) {
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(o.places))));
  std::mt19937_64 rng(mix(mix(o.seed, static_cast<std::uint64_t>(place) + 7777), static_cast<std::uint64_t>(view)));
  const double e = 500000.0 + (place % cols) * o.spacing_m + (2.0 * unit(rng) - 1.0) * o.jitter_m;
  const double n = 4500000.0 + (place / cols) * o.spacing_m + (2.0 * unit(rng) - 1.0) * o.jitter_m;
  return GeoPose::utm(e, n, "18T");
}

SceneFixture write_scene_fixture(const std::filesystem::path& dir, const SceneFixtureOptions& o) {
  o.validate();
  std::filesystem::create_directories(dir / "images");
  DatasetManifest db, q, train;
  db.name = "synthetic-db";
  db.split = Split::database;
  q.name = "synthetic-queries";
  q.split = Split::query;
  train.name = "synthetic-train";
  train.split = Split::train;
  for (int p = 0; p < o.places; ++p) {
    char place_id[16];
    std::snprintf(place_id, sizeof place_id, "p%03d", p);
    for (int v = 0; v < o.views; ++v) {
      char name[32];
      std::snprintf(name, sizeof name, "p%03d_v%d", p, v);
      const auto path = dir / "images" / (std::string(name) + ".png");
      write_png(path, render_place_view(o, p, v));
      ImageRecord r;
      r.id = name;
      r.path = path;
      r.pose = place_view_pose(o, p, v);
      r.place_id = place_id;
      (v == 0 ? db : v == 1 ? q : train).records.push_back(std::move(r));
    }
  }
  for (auto* m : {&db, &q, &train}) m->metadata["generator"] = "scene-fixture seed=" + std::to_string(o.seed);
  SceneFixture f{dir / "database.tsv", dir / "queries.tsv", dir / "train.tsv"};
  save_manifest(db, f.database);
  save_manifest(q, f.queries);
  if (!train.records.empty()) save_manifest(train, f.train);
  return f;
}

std::vector<Image> make_textured_clip(int width, int height, int frames, std::uint64_t seed) {
  if (width < 8 || height < 8 || frames < 1) throw ValidationError("clip needs >= 8x8 pixels and >= 1 frame");
  std::mt19937_64 rng(seed);
  const int tw = width * 2, th = height * 2;
  std::vector<double> tex(static_cast<std::size_t>(tw) * th * 3);
  // value noise at three octaves plus a couple of plane waves
  for (int c = 0; c < 3; ++c) {
    for (int octave = 0; octave < 3; ++octave) {
      const int cell = 16 >> octave;
      const int gw = tw / cell + 2, gh = th / cell + 2;
      std::vector<double> grid(static_cast<std::size_t>(gw) * gh);
      for (double& g : grid) g = unit(rng);
      for (int y = 0; y < th; ++y) {
        for (int x = 0; x < tw; ++x) {
          const double fx = static_cast<double>(x) / cell, fy = static_cast<double>(y) / cell;
          const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
          const double ax = fx - x0, ay = fy - y0;
          const double v = grid[y0 * gw + x0] * (1 - ax) * (1 - ay) + grid[y0 * gw + x0 + 1] * ax * (1 - ay) +
                           grid[(y0 + 1) * gw + x0] * (1 - ax) * ay + grid[(y0 + 1) * gw + x0 + 1] * ax * ay;
          tex[(static_cast<std::size_t>(y) * tw + x) * 3 + c] += v * (120.0 / (1 << octave));
        }
      }
    }
  }
  std::vector<Image> clip;
  for (int t = 0; t < frames; ++t) {
    Image f(width, height);
    const double sx = 1.5 * t, sy = 0.7 * t;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const int u = static_cast<int>(x + sx) % tw, v = static_cast<int>(y + sy) % th;
        const double wave = 20.0 * std::sin(0.21 * x + 0.13 * y + 0.3 * t);
        for (int c = 0; c < 3; ++c) {
          f.at(x, y, c) = to_u8(tex[(static_cast<std::size_t>(v) * tw + u) * 3 + c] - 20.0 + wave);
        }
      }
    }
    clip.push_back(std::move(f));
  }
  return clip;
}

std::array<std::uint8_t, 3> hsv_to_rgb(double h, double s, double v) {
  h = std::fmod(h, 360.0);
  if (h < 0) h += 360.0;
  const double c = v * s;
  const double hp = h / 60.0;
  const double x = c * (1 - std::abs(std::fmod(hp, 2.0) - 1));
  double r = 0, g = 0, b = 0;
  if (hp < 1) {
    r = c, g = x;
  } else if (hp < 2) {
    r = x, g = c;
  } else if (hp < 3) {
    g = c, b = x;
  } else if (hp < 4) {
    g = x, b = c;
  } else if (hp < 5) {
    r = x, b = c;
  } else {
    r = c, b = x;
  }
  const double m = v - c;
  return {to_u8((r + m) * 255.0), to_u8((g + m) * 255.0), to_u8((b + m) * 255.0)};
}

double rgb_hue(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  const double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const double d = mx - mn;
  if (d == 0.0) return 0.0;
  double h;
  if (mx == r) {
    h = 60.0 * std::fmod((g - b) / d, 6.0);
  } else if (mx == g) {
    h = 60.0 * ((b - r) / d + 2.0);
  } else {
    h = 60.0 * ((r - g) / d + 4.0);
  }
  return h < 0 ? h + 360.0 : h;
}

Image make_hue_panorama(int width, int height, double hue_offset_deg) {
  if (height < 1 || width != 2 * height) throw ValidationError("panorama must have width == 2 * height");
  Image pano(width, height);
  for (int x = 0; x < width; ++x) {
    const double lon = (x + 0.5) * 360.0 / width - 180.0;
    const auto rgb = hsv_to_rgb(lon + hue_offset_deg, 1.0, 1.0);
    for (int y = 0; y < height; ++y) {
      for (int c = 0; c < 3; ++c) pano.at(x, y, c) = rgb[c];
    }
  }
  return pano;
}

}  // namespace loqi
