#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "loqi/core/errors.hpp"
#include "loqi/model/toy_extractor.hpp"
#include "loqi/visualize/activation.hpp"
#include "loqi/visualize/overlay.hpp"
#include "support/generators.hpp"

using namespace loqi;
using namespace loqi::testing;

TEST_CASE("min-max normalization") {
  std::vector<double> v = {2.0, 4.0, 3.0};
  normalize_min_max(v);
  CHECK(v == std::vector<double>{0.0, 1.0, 0.5});
  std::vector<double> flat = {7.0, 7.0};
  normalize_min_max(flat);
  CHECK(flat == std::vector<double>{0.0, 0.0});
  std::vector<double> bad = {1.0, NAN};
  CHECK_THROWS_AS(normalize_min_max(bad), NumericError);
}

TEST_CASE("channel-mean map of a latent") {
  LatentCode z(2, 1, 3, {0.0, 1.0, 2.0, 2.0, 1.0, 6.0});
  const auto m = channel_mean_map(z);
  CHECK(m.width == 3);
  CHECK(m.height == 1);
  // means 1, 1, 4
  CHECK(m.at(0, 0) == 0.0);
  CHECK(m.at(1, 0) == 0.0);
  CHECK(m.at(2, 0) == 1.0);
}

TEST_CASE("cluster-weighted maps need weights that sum to one") {
  Rng rng(101);
  const LatentCode z = gen_latent(rng, 3, 2, 2);
  LatentCode w(3, 2, 2);
  for (double& v : w.data()) v = 1.0 / 3.0;
  const auto m = cluster_weighted_map(z, w);
  for (double v : m.data) CHECK((v >= 0.0 && v <= 1.0));
  w.at(0, 0, 0) += 0.1;
  CHECK_THROWS_AS(cluster_weighted_map(z, w), ValidationError);
}

TEST_CASE("maps are normalized into the unit interval") {
  Rng rng(102);
  const auto h = make_toy_extractor(3, 6, 8);
  const Image img = gen_smooth_image(rng, 40, 40);
  const LatentCode z = h.encode(img);
  for (const auto& m : {channel_mean_map(z),
                        cluster_weighted_map(z, [&](const LatentCode& l) { return h.model().soft_assignment(l); })}) {
    CHECK(*std::min_element(m.data.begin(), m.data.end()) >= 0.0);
    CHECK(*std::max_element(m.data.begin(), m.data.end()) <= 1.0);
  }
}

TEST_CASE("occlusion map grid follows patch and stride") {
  Rng rng(103);
  const auto h = make_toy_extractor(3, 4, 8);
  const Image img = gen_smooth_image(rng, 40, 24);
  const auto m = occlusion_map(h, img, {8, 8});
  CHECK(m.width == 5);
  CHECK(m.height == 3);
  CHECK(m.patch_size == 8);
  CHECK(m.source == MapSource::occlusion);
  const auto dense = occlusion_map(h, img, {16, 4});
  CHECK(dense.width == (40 - 16) / 4 + 1);
  CHECK_THROWS_AS(occlusion_map(h, img, {32, 8}), ValidationError);
}

TEST_CASE("occluding a uniform image changes nothing") {
  Image flat(32, 32);
  for (auto& b : flat.data()) b = 90;
  const auto m = occlusion_map(make_toy_extractor(1, 4, 8), flat, {8, 8});
  for (double v : m.data) CHECK(v == 0.0);
}

TEST_CASE("viridis endpoints and clamping") {
  CHECK(viridis(0.0) == std::array<std::uint8_t, 3>{68, 1, 84});
  CHECK(viridis(1.0) == std::array<std::uint8_t, 3>{253, 231, 37});
  CHECK(viridis(-1.0) == viridis(0.0));
  CHECK(viridis(2.0) == viridis(1.0));
}

TEST_CASE("overlay blending") {
  Image base(4, 4);
  for (auto& b : base.data()) b = 10;
  ActivationMap m;
  m.width = m.height = 2;
  m.data = {0, 0, 0, 0};
  CHECK(render_overlay(base, m, 0.0) == base);
  const Image full = render_overlay(base, m, 1.0);
  CHECK(full.at(0, 0, 0) == 68);
  CHECK_THROWS_AS(render_overlay(base, m, 1.5), ValidationError);
  const auto up = resample_map(m, 8, 3);
  CHECK(up.size() == 24);
}
