#include <cmath>

#include "doctest.h"
#include "loqi/core/errors.hpp"
#include "loqi/fixture/synthetic.hpp"
#include "loqi/panorama/panorama.hpp"

using namespace loqi;

TEST_CASE("slice spec defaults cover the horizon") {
  SliceSpec s;
  CHECK(s.num_views == 18);
  CHECK(s.yaw_step_deg() == 20.0);
  CHECK(s.covers_full_circle());
  s.fov_deg = 10.0;
  CHECK_FALSE(s.covers_full_circle());
  s.fov_deg = 180.0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("the optical axis lands on the yawed panorama column") {
  const int W = 720, H = 360;
  for (double yaw : {0.0, 20.0, 90.0, 200.0, 340.0}) {
    const auto c = perspective_to_equirect(W, H, yaw, 0.0, 90.0, 161, 91, 80.0, 45.0);
    double want = (W - 1) / 2.0 + yaw / 360.0 * W;
    want = std::fmod(want, W);
    double du = std::fmod(std::abs(c.u - want), W);
    du = std::min(du, W - du);
    CHECK(du <= 1e-9);
    CHECK(c.v == doctest::Approx((H - 1) / 2.0));
  }
}

TEST_CASE("positive pitch looks up") {
  const auto c = perspective_to_equirect(720, 360, 0.0, 30.0, 90.0, 101, 101, 50.0, 50.0);
  CHECK(c.v < 179.5);
  CHECK(c.v == doctest::Approx(179.5 - 30.0 / 180.0 * 360.0).epsilon(1e-9));
}

TEST_CASE("left output columns sample smaller longitudes") {
  const auto l = perspective_to_equirect(720, 360, 0.0, 0.0, 90.0, 101, 51, 0.0, 25.0);
  const auto r = perspective_to_equirect(720, 360, 0.0, 0.0, 90.0, 101, 51, 100.0, 25.0);
  CHECK(l.u < r.u);
  CHECK(r.u - l.u == doctest::Approx(180.0).epsilon(0.02));  // 90 degrees of a 720 px ring
}

TEST_CASE("a constant panorama slices into constant views") {
  Image pano(64, 32);
  for (auto& b : pano.data()) b = 200;
  const Image v = equirect_to_perspective(pano, 33.0, 10.0, 75.0, 20, 12);
  for (auto b : v.data()) CHECK(b == 200);
  CHECK_THROWS_AS(equirect_to_perspective(Image(60, 32), 0, 0, 90, 8, 8), ValidationError);
}

TEST_CASE("slicing a clip yields views by frame") {
  const std::vector<Image> frames = {make_hue_panorama(128, 64), make_hue_panorama(128, 64, 40.0)};
  SliceSpec s;
  s.num_views = 4;
  s.out_width = 16;
  s.out_height = 9;
  const auto views = slice_panorama_video(frames, s);
  REQUIRE(views.size() == 4);
  for (const auto& v : views) {
    REQUIRE(v.size() == 2);
    CHECK(v[0].width() == 16);
    CHECK(v[0].height() == 9);
  }
  CHECK_FALSE(views[0][0] == views[0][1]);
}

TEST_CASE("hue helpers invert each other") {
  for (double h = 0; h < 360; h += 7.5) {
    const auto rgb = hsv_to_rgb(h, 1.0, 1.0);
    double got = rgb_hue(rgb[0], rgb[1], rgb[2]);
    double diff = std::abs(got - h);
    diff = std::min(diff, 360 - diff);
    CHECK(diff < 1.0);
  }
  CHECK(rgb_hue(100, 100, 100) == 0.0);
}
