#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "loqi/core/errors.hpp"
#include "loqi/core/process.hpp"
#include "loqi/datamodel/descriptor_db.hpp"
#include "loqi/datamodel/manifest.hpp"
#include "support/generators.hpp"

using namespace loqi;
using namespace loqi::testing;
namespace fs = std::filesystem;

TEST_CASE("haversine distance matches known values") {
  // One degree of latitude on the reference sphere.
  const double deg = kEarthRadiusMeters * M_PI / 180.0;
  CHECK(geodesic_distance(GeoPose::latlon(0, 0), GeoPose::latlon(1, 0)) == doctest::Approx(deg).epsilon(1e-12));
  CHECK(geodesic_distance(GeoPose::latlon(0, 179.5), GeoPose::latlon(0, -179.5)) ==
        doctest::Approx(deg).epsilon(1e-9));
  CHECK(geodesic_distance(GeoPose::latlon(45, 10), GeoPose::latlon(45, 10)) == 0.0);
}

TEST_CASE("planar utm and frame distances") {
  CHECK(geodesic_distance(GeoPose::utm(0, 0, "18T"), GeoPose::utm(3, 4, "18T")) == doctest::Approx(5.0));
  CHECK(geodesic_distance(GeoPose::frame_index(7), GeoPose::frame_index(2)) == 5.0);
  CHECK_THROWS_AS(geodesic_distance(GeoPose::utm(0, 0, "18T"), GeoPose::utm(0, 0, "19T")), ValidationError);
  CHECK_THROWS_AS(geodesic_distance(GeoPose::utm(0, 0), GeoPose::latlon(0, 0)), ValidationError);
}

TEST_CASE("geodesic distance is symmetric and satisfies the triangle inequality") {
  Rng rng(51);
  for (int trial = 0; trial < 200; ++trial) {
    auto p = [&] { return GeoPose::latlon(uniform(rng, -80, 80), uniform(rng, -180, 180)); };
    const GeoPose a = p(), b = p(), c = p();
    const double ab = geodesic_distance(a, b);
    CHECK(ab == doctest::Approx(geodesic_distance(b, a)).epsilon(1e-12));
    CHECK(geodesic_distance(a, c) <= ab + geodesic_distance(b, c) + 1e-6);
  }
}

TEST_CASE("out-of-range poses are rejected") {
  CHECK_THROWS_AS(GeoPose::latlon(91, 0).validate(), ValidationError);
  CHECK_THROWS_AS(GeoPose::latlon(0, 181).validate(), ValidationError);
  CHECK_THROWS_AS(GeoPose::frame_index(-1).validate(), ValidationError);
}

TEST_CASE("degradation spec text round trip") {
  for (const auto& s : {DegradationSpec::jpeg(10), DegradationSpec::resize(320, 240), DegradationSpec::video_qp(36),
                        DegradationSpec::video_qp(42, "baseline")})
    CHECK(DegradationSpec::parse(s.to_string()) == s);
  CHECK(DegradationSpec::parse("jpeg:10").to_string() == "jpeg:10");
  CHECK_THROWS_AS(DegradationSpec::parse("jpeg:0"), ValidationError);
  CHECK_THROWS_AS(DegradationSpec::parse("videoqp:52"), ValidationError);
  CHECK_THROWS_AS(DegradationSpec::parse("resize:4x4"), ValidationError);
  CHECK_THROWS((void)DegradationSpec::parse("blur:3"));
}

namespace {

DatasetManifest gen_manifest(Rng& rng, const fs::path& dir) {
  DatasetManifest m;
  m.name = "gen" + std::to_string(rng() % 1000);
  m.split = static_cast<Split>(rng() % 3);
  const int mode = static_cast<int>(rng() % 3);
  m.gt_mode = mode == 2 ? GroundTruthMode{GroundTruthMode::Kind::index, 3}
                        : GroundTruthMode{GroundTruthMode::Kind::metric, uniform(rng, 1, 50)};
  const int n = uniform_int(rng, 0, 20);
  for (int i = 0; i < n; ++i) {
    ImageRecord r;
    r.id = id_of("r", static_cast<std::size_t>(i));
    r.path = dir / "img" / (r.id + ".png");
    if (mode == 0) r.pose = GeoPose::latlon(uniform(rng, -89, 89), uniform(rng, -179, 179));
    if (mode == 1) r.pose = GeoPose::utm(uniform(rng, 1e5, 9e5), uniform(rng, 0, 9e6), "33U");
    if (mode == 2) r.pose = GeoPose::frame_index(i * 2);
    if (rng() & 1) r.place_id = "place " + std::to_string(i / 3);
    if (rng() & 1) {
      r.degradation = DegradationSpec::jpeg(uniform_int(rng, 1, 100));
      r.source_path = dir / "hq" / (r.id + ".png");
    }
    m.records.push_back(r);
  }
  if (rng() & 1) m.metadata["encoder"] = "libjpeg q=10";
  return m;
}

}  // namespace

TEST_CASE("manifests survive a save and load round trip") {
  TempDir tmp;
  Rng rng(52);
  for (int trial = 0; trial < 30; ++trial) {
    const DatasetManifest m = gen_manifest(rng, tmp.path());
    const fs::path p = tmp.path() / "m.tsv";
    save_manifest(m, p);
    const DatasetManifest back = load_manifest(p);
    CHECK(back.name == m.name);
    CHECK(back.split == m.split);
    CHECK(back.gt_mode == m.gt_mode);
    CHECK(back.metadata == m.metadata);
    REQUIRE(back.records.size() == m.records.size());
    for (std::size_t i = 0; i < m.records.size(); ++i) {
      const auto &a = m.records[i], &b = back.records[i];
      CHECK(a.id == b.id);
      CHECK(a.path == b.path);
      CHECK(a.place_id == b.place_id);
      CHECK(a.degradation == b.degradation);
      CHECK(a.source_path == b.source_path);
      REQUIRE(a.pose.has_value() == b.pose.has_value());
      if (a.pose) {
        CHECK(a.pose->mode == b.pose->mode);
        CHECK(a.pose->first == b.pose->first);
        CHECK(a.pose->second == b.pose->second);
        CHECK(a.pose->zone == b.pose->zone);
        CHECK(a.pose->frame == b.pose->frame);
      }
    }
  }
}

TEST_CASE("manifest validation catches duplicates and mixed pose modes") {
  DatasetManifest m;
  m.name = "x";
  ImageRecord a{"a", "a.png", GeoPose::latlon(0, 0), {}, {}, {}};
  m.records = {a, a};
  CHECK_THROWS_AS(m.validate(), ValidationError);
  ImageRecord b{"b", "b.png", GeoPose::utm(0, 0), {}, {}, {}};
  m.records = {a, b};
  CHECK_THROWS_AS(m.validate(), ValidationError);
  ImageRecord c{"c", "c.png", GeoPose::frame_index(1), {}, {}, {}};
  m.records = {c};
  CHECK_THROWS_AS(m.validate(), ValidationError);  // metric gt with frame poses
  m.gt_mode = {GroundTruthMode::Kind::index, 2};
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("malformed manifest text reports the line") {
  const std::string text = "# loqi-manifest 1\n# name: t\nid\tpath\timage\textra\n";
  try {
    (void)parse_manifest(text, ".", "t.tsv");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("t.tsv") != std::string::npos);
  }
}

TEST_CASE("descriptor databases survive a binary round trip") {
  TempDir tmp;
  Rng rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dim = static_cast<std::size_t>(uniform_int(rng, 1, 40));
    DescriptorDB db("ref" + std::to_string(trial), dim, true);
    const int n = uniform_int(rng, 0, 30);
    for (int i = 0; i < n; ++i) db.insert(id_of("d", static_cast<std::size_t>(i)), gen_unit_floats(rng, dim));
    CHECK(deserialize_db(serialize_db(db)) == db);
    save_db(db, tmp.path() / "x.db");
    CHECK(load_db(tmp.path() / "x.db") == db);
  }
}

TEST_CASE("descriptor database rejects bad inserts") {
  DescriptorDB db("r", 3, true);
  CHECK_THROWS_AS(db.insert("a", {1.0f, 0.0f}), ValidationError);
  CHECK_THROWS_AS(db.insert("a", {1.0f, 1.0f, 0.0f}), ValidationError);
  CHECK_THROWS_AS(db.insert("a", {NAN, 0.0f, 0.0f}), ValidationError);
  db.insert("a", {1.0f, 0.0f, 0.0f});
  CHECK_THROWS_AS(db.insert("a", {0.0f, 1.0f, 0.0f}), ValidationError);
  DescriptorDB raw("r", 2, false);
  CHECK_NOTHROW(raw.insert("b", {3.0f, 4.0f}));
}

TEST_CASE("corrupted descriptor database bytes are a format error") {
  Rng rng(54);
  DescriptorDB db("r", 4, true);
  for (int i = 0; i < 5; ++i) db.insert(id_of("d", static_cast<std::size_t>(i)), gen_unit_floats(rng, 4));
  auto bytes = serialize_db(db);
  const auto truncated = std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + bytes.size() / 2);
  CHECK_THROWS_AS(deserialize_db(truncated), FormatError);
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x40;
  CHECK_THROWS_AS(deserialize_db(flipped), FormatError);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_db(magic), FormatError);
}
