#include <cmath>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "loqi/core/errors.hpp"
#include "loqi/core/process.hpp"
#include "loqi/fixture/synthetic.hpp"

using namespace loqi;
namespace fs = std::filesystem;

TEST_CASE("scene views are deterministic and distinct") {
  SceneFixtureOptions o;
  o.width = o.height = 24;
  CHECK(render_place_view(o, 3, 1) == render_place_view(o, 3, 1));
  CHECK_FALSE(render_place_view(o, 3, 1) == render_place_view(o, 3, 2));
  CHECK_FALSE(render_place_view(o, 3, 1) == render_place_view(o, 4, 1));
}

TEST_CASE("views of one place are closer than views of different places") {
  SceneFixtureOptions o;
  o.width = o.height = 32;
  o.places = 12;
  int wins = 0;
  for (int p = 0; p < o.places; ++p) {
    const double same = mean_absolute_error(render_place_view(o, p, 0), render_place_view(o, p, 1));
    const double other = mean_absolute_error(render_place_view(o, p, 0), render_place_view(o, (p + 1) % o.places, 1));
    wins += same < other ? 1 : 0;
  }
  CHECK(wins >= 10);
}

TEST_CASE("poses of one place stay within the jitter") {
  SceneFixtureOptions o;
  for (int p : {0, 7, 63}) {
    const GeoPose a = place_view_pose(o, p, 0), b = place_view_pose(o, p, 3);
    CHECK(geodesic_distance(a, b) <= 2.0 * std::sqrt(2.0) * o.jitter_m);
    CHECK(geodesic_distance(a, place_view_pose(o, (p + 1) % 64, 0)) > 25.0);
  }
}

TEST_CASE("written fixtures have three splits") {
  TempDir tmp;
  SceneFixtureOptions o;
  o.places = 5;
  o.views = 4;
  o.width = o.height = 12;
  const auto f = write_scene_fixture(tmp.path(), o);
  const auto db = load_manifest(f.database), q = load_manifest(f.queries), tr = load_manifest(f.train);
  CHECK(db.records.size() == 5);
  CHECK(q.records.size() == 5);
  CHECK(tr.records.size() == 10);
  CHECK(db.split == Split::database);
  CHECK(q.split == Split::query);
  CHECK(tr.split == Split::train);
  for (const auto& r : tr.records) CHECK(fs::exists(r.path));
  CHECK_THROWS_AS(write_scene_fixture(tmp.path() / "x", SceneFixtureOptions{.places = 1}), ValidationError);
}

TEST_CASE("hue panorama puts longitude zero at the centre column") {
  const Image p = make_hue_panorama(360, 180, 0.0);
  const double h = rgb_hue(p.at(180, 90, 0), p.at(180, 90, 1), p.at(180, 90, 2));
  CHECK((h < 1.5 || h > 358.5));
}

TEST_CASE("textured clips pan between frames") {
  const auto clip = make_textured_clip(32, 16, 3, 2);
  REQUIRE(clip.size() == 3);
  CHECK_FALSE(clip[0] == clip[1]);
  CHECK(clip == make_textured_clip(32, 16, 3, 2));
}
