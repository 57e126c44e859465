#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "doctest.h"
#include "loqi/core/errors.hpp"
#include "loqi/core/image_io.hpp"
#include "loqi/core/process.hpp"
#include "loqi/model/checkpoint.hpp"
#include "loqi/model/external_extractor.hpp"
#include "loqi/model/registry.hpp"
#include "loqi/model/toy_extractor.hpp"
#include "support/generators.hpp"

using namespace loqi;
using namespace loqi::testing;

TEST_CASE("toy extractor output shapes and unit descriptors") {
  Rng rng(61);
  const auto h = make_toy_extractor(1, 8, 16);
  for (auto [w, hh] : {std::pair{8, 8}, std::pair{33, 17}, std::pair{64, 64}}) {
    const Image img = gen_image(rng, w, hh);
    const LatentCode z = h.encode(img);
    CHECK(z.channels() == 8);
    CHECK(z.height() == (((hh - 1) / 2 + 1 - 1) / 2 + 1));
    const Descriptor d = h.describe(img);
    CHECK(d.size() == 16);
    CHECK(d.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(h.encode(Image(7, 32)), ValidationError);
}

TEST_CASE("toy extractor is a pure function of its seed") {
  Rng rng(62);
  const Image img = gen_smooth_image(rng, 24, 24);
  const auto a = make_toy_extractor(9, 6, 8), b = make_toy_extractor(9, 6, 8), c = make_toy_extractor(10, 6, 8);
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a.describe(img) == b.describe(img));
  CHECK(a.identity() == "toy/1 channels=6 dim=8 seed=9");
}

TEST_CASE("forward trace agrees with encode and aggregate") {
  Rng rng(63);
  const auto h = make_toy_extractor(2, 5, 7);
  const Image img = gen_smooth_image(rng, 20, 16);
  const auto tr = h.model().forward(img);
  CHECK(tr->latent == h.encode(img));
  CHECK(tr->descriptor == h.aggregate(tr->latent));
}

TEST_CASE("parameter groups tile the parameter vector") {
  const auto h = make_toy_extractor(0, 4, 6);
  std::size_t next = 0;
  for (const auto& g : h.model().groups()) {
    CHECK(g.offset == next);
    next += g.size;
  }
  CHECK(next == h.model().parameters().size());
}

TEST_CASE("branch pair copies are independent and the teacher is frozen") {
  auto base = make_toy_extractor(4, 4, 6);
  base.set_trainable(Part::encoder, false);
  BranchPair pair = clone_as_branch_pair(base);
  CHECK(pair.teacher.hash() == pair.student.hash());
  CHECK_FALSE(pair.teacher.any_trainable());
  CHECK_FALSE(pair.student.trainable(Part::encoder));
  CHECK(pair.student.trainable(Part::aggregator));
  pair.student.model().parameters()[0] += 1.0;
  CHECK(pair.teacher.hash() != pair.student.hash());
  CHECK(base.hash() == pair.teacher.hash());
  const auto mask = pair.student.trainable_mask();
  const auto groups = pair.student.model().groups();
  for (const auto& g : groups)
    for (std::size_t i = g.offset; i < g.offset + g.size; ++i) CHECK(mask[i] == (g.part == Part::aggregator ? 1 : 0));
}

TEST_CASE("soft assignment sums to one over channels") {
  Rng rng(64);
  const auto h = make_toy_extractor(1, 6, 8);
  const LatentCode z = h.encode(gen_smooth_image(rng, 32, 32));
  const LatentCode a = h.model().soft_assignment(z);
  for (std::size_t k = 0; k < z.spatial(); ++k) {
    double s = 0;
    for (int c = 0; c < z.channels(); ++c) s += a.channel(c)[k];
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("extractor specs parse names, versions and options") {
  const auto s = ExtractorSpec::parse("toy/1 channels=8 dim=16 seed=3");
  CHECK(s.name == "toy");
  CHECK(s.version == 1);
  CHECK(s.get_int("channels", 0) == 8);
  CHECK(s.get("missing", "x") == "x");
  CHECK_THROWS_AS(ExtractorSpec::parse(""), ValidationError);
  CHECK_THROWS_AS(ExtractorSpec::parse("toy channels"), ValidationError);
  CHECK_THROWS_AS(ExtractorSpec::parse("toy channels=x").get_int("channels", 0), ValidationError);
}

TEST_CASE("registry builds toy models and reports missing encoders") {
  auto& reg = ExtractorRegistry::global();
  const auto h = reg.create("toy channels=6 dim=10 seed=2");
  CHECK(h.identity() == "toy/1 channels=6 dim=10 seed=2");
  CHECK(reg.create(h.identity()).hash() == h.hash());
  CHECK_THROWS_AS(reg.create("toy bogus=1"), ValidationError);
  CHECK_THROWS_AS(reg.create("nonexistent"), ValidationError);
  ::unsetenv("LOQI_ENCODER_NETVLAD");
  CHECK_THROWS_AS(reg.create("netvlad"), EnvironmentError);
  for (const auto& name : known_external_methods()) CHECK(reg.contains(name));
}

TEST_CASE("checkpoint round trip restores parameters and flags") {
  TempDir tmp;
  auto h = make_toy_extractor(7, 4, 6);
  h.model().parameters()[3] = 0.125;
  h.set_trainable(Part::aggregator, false);
  save_checkpoint(tmp.path() / "a.ckpt", h);
  const auto back = load_checkpoint(tmp.path() / "a.ckpt");
  CHECK(back.hash() == h.hash());
  CHECK(back.identity() == h.identity());
  CHECK_FALSE(back.trainable(Part::aggregator));
  CHECK(back.trainable(Part::encoder));

  auto other = make_toy_extractor(7, 5, 6);
  CHECK_THROWS_AS(apply_checkpoint(read_checkpoint(tmp.path() / "a.ckpt"), other), ValidationError);
}

TEST_CASE("corrupted checkpoints are format errors") {
  const auto h = make_toy_extractor(1, 4, 6);
  auto bytes = serialize_checkpoint(snapshot(h));
  CHECK(deserialize_checkpoint(bytes).parameter_hash() == snapshot(h).parameter_hash());
  auto bad = bytes;
  bad[bad.size() / 2] ^= 1;
  CHECK_THROWS_AS(deserialize_checkpoint(bad), FormatError);
  bytes.resize(bytes.size() - 3);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes), FormatError);
}

TEST_CASE("external extractor speaks the feature-file protocol") {
  Rng rng(65);
  ::unsetenv("FAKE_ENCODER_FAIL");
  ExternalExtractor ext("fake", LOQI_FAKE_ENCODER);
  const Image img = gen_smooth_image(rng, 20, 20);
  const auto ref = make_toy_extractor(5, 4, 8);
  CHECK(ext.descriptor_dim() == 8);
  CHECK(ext.latent_channels() == 4);
  const Descriptor d = ext.describe(img);
  const Descriptor want = ref.describe(img);
  for (std::size_t i = 0; i < 8; ++i) CHECK(d[i] == doctest::Approx(want[i]).epsilon(1e-12));
  CHECK_FALSE(ext.differentiable());
  CHECK_THROWS_AS(ext.aggregate(ref.encode(img)), ValidationError);

  ::setenv("FAKE_ENCODER_FAIL", "1", 1);
  try {
    (void)ext.describe(img);
    FAIL("expected the encoder to fail");
  } catch (const ExternalToolError& e) {
    CHECK(e.exit_code() == 3);
    CHECK(e.stderr_text().find("simulated failure") != std::string::npos);
  }
  ::unsetenv("FAKE_ENCODER_FAIL");
}

TEST_CASE("named methods bind to an executable through the environment") {
  ::setenv("LOQI_ENCODER_MIXVPR", LOQI_FAKE_ENCODER, 1);
  const auto h = ExtractorRegistry::global().create("mixvpr");
  CHECK(h.descriptor_dim() == 8);
  ::unsetenv("LOQI_ENCODER_MIXVPR");
}
