#include <cmath>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "loqi/core/errors.hpp"
#include "loqi/core/process.hpp"
#include "loqi/degrade/degrade.hpp"
#include "loqi/distill/optimizer.hpp"
#include "loqi/distill/trainer.hpp"
#include "loqi/fixture/synthetic.hpp"
#include "loqi/model/checkpoint.hpp"
#include "loqi/model/toy_extractor.hpp"
#include "support/generators.hpp"

using namespace loqi;
using namespace loqi::testing;
namespace fs = std::filesystem;

TEST_CASE("loss masks parse, print and enumerate") {
  CHECK(LossMask::parse("ickd,MSE").to_string() == "ickd,mse");
  CHECK(LossMask::parse("triplet").has(LossTerm::triplet));
  CHECK_THROWS_AS(LossMask::parse(""), ValidationError);
  CHECK_THROWS_AS(LossMask::parse("mse,l1"), ValidationError);
  const auto all = LossMask::combinations();
  CHECK(all.size() == 7);
  std::set<std::uint8_t> bits;
  for (auto m : all) bits.insert(m.bits());
  CHECK(bits.size() == 7);
  CHECK(bits.count(0) == 0);
}

TEST_CASE("training config defaults and json round trip") {
  TrainingConfig c;
  CHECK(c.lr_init == 1e-5);
  CHECK(c.lr_exp_decay == 0.99999);
  CHECK(c.weight_decay == 2e-11);
  CHECK(c.negatives_per_sample == 5);
  CHECK(c.epochs == 1);
  CHECK(c.positive_radius_m == 25.0);
  CHECK(c.weights.alpha == 1e5);
  CHECK(c.weights.beta == 1e4);
  CHECK(c.weights.margin == 0.1);
  c.loss_mask = LossMask::parse("mse,triplet");
  c.seed = 77;
  c.lr_schedule = LrSchedule::inverse_time;
  const auto back = TrainingConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("exponential and inverse-time learning-rate schedules") {
  TrainingConfig c;
  c.lr_init = 2e-3;
  for (std::uint64_t t : {0ull, 1ull, 250ull, 100000ull})
    CHECK(lr_at_step(c, t) == doctest::Approx(2e-3 * std::pow(0.99999, static_cast<double>(t))).epsilon(1e-12));
  c.lr_schedule = LrSchedule::inverse_time;
  c.lr_time_decay = 0.5;
  CHECK(lr_at_step(c, 4) == doctest::Approx(2e-3 / 3.0));
  CHECK(lr_at_step(c, 0) == 2e-3);
}

TEST_CASE("uniform_index stays in range and covers every value") {
  Rng rng(81);
  for (std::size_t n : {1u, 2u, 3u, 7u, 1000u}) {
    std::set<std::size_t> seen;
    for (int i = 0; i < 20000; ++i) {
      const auto k = uniform_index(rng(), n);
      REQUIRE(k < n);
      seen.insert(k);
    }
    if (n <= 7) CHECK(seen.size() == n);
  }
  CHECK(uniform_index(~0ull, 10) == 9);
  CHECK(uniform_index(0, 10) == 0);
}

namespace {

DatasetManifest line_manifest(int n, double spacing) {
  DatasetManifest m;
  m.name = "line";
  m.split = Split::train;
  for (int i = 0; i < n; ++i) {
    ImageRecord r;
    r.id = id_of("r", static_cast<std::size_t>(i));
    r.path = r.id + ".jpg";
    r.source_path = r.id + ".png";
    r.degradation = DegradationSpec::jpeg(10);
    r.pose = GeoPose::utm(i * spacing, 0.0);
    r.place_id = "p" + std::to_string(i / 2);
    m.records.push_back(r);
  }
  return m;
}

}  // namespace

TEST_CASE("sampled positives and negatives respect the radius") {
  const auto m = line_manifest(40, 10.0);
  TrainingConfig c;
  c.max_positives = 3;
  c.negatives_per_sample = 5;
  const auto s = sample_triplets(m, c, 5);
  CHECK(s.samples.size() == 40);
  std::set<std::size_t> queries;
  for (const auto& t : s.samples) {
    queries.insert(t.query);
    // Records at the ends of the line only have two neighbours within 25 m.
    const bool end = t.query == 0 || t.query == 39;
    CHECK(t.positives.size() == (end ? 2u : 3u));
    double last = -1;
    for (auto p : t.positives) {
      CHECK(p != t.query);
      const double d = geodesic_distance(*m.records[p].pose, *m.records[t.query].pose);
      CHECK(d <= 25.0);
      CHECK(d >= last);
      last = d;
    }
    std::set<std::size_t> negs(t.negatives.begin(), t.negatives.end());
    CHECK(negs.size() == 5);  // without replacement when enough exist
    for (auto n : t.negatives) CHECK(geodesic_distance(*m.records[n].pose, *m.records[t.query].pose) > 25.0);
  }
  CHECK(queries.size() == 40);
}

TEST_CASE("sampling is a pure function of the seed") {
  const auto m = line_manifest(30, 7.0);
  TrainingConfig c;
  const auto a = sample_triplets(m, c, 9), b = sample_triplets(m, c, 9), d = sample_triplets(m, c, 10);
  CHECK(a.samples == b.samples);
  CHECK_FALSE(a.samples == d.samples);
  CHECK(epoch_seed(1, 0) != epoch_seed(1, 1));
  CHECK(epoch_seed(1, 3) == epoch_seed(1, 3));
}

TEST_CASE("isolated queries are skipped and crowded ones are an error") {
  auto m = line_manifest(6, 10.0);
  m.records[5].pose = GeoPose::utm(1000.0, 0.0);
  TrainingConfig c;
  const auto s = sample_triplets(m, c, 1);
  CHECK(s.skipped == 1);
  CHECK(s.skipped_ids == std::vector<std::string>{"r0005"});
  const auto tight = line_manifest(4, 1.0);
  CHECK_THROWS_AS(sample_triplets(tight, c, 1), ValidationError);
}

TEST_CASE("place ids can define positives") {
  auto m = line_manifest(10, 100.0);
  TrainingConfig c;
  c.positive_rule = PositiveRule::place_id;
  for (const auto& t : sample_triplets(m, c, 2).samples) {
    REQUIRE(t.positives.size() == 1);
    CHECK(m.records[t.positives[0]].place_id == m.records[t.query].place_id);
    for (auto n : t.negatives) CHECK(m.records[n].place_id != m.records[t.query].place_id);
  }
}

TEST_CASE("without a triplet term no geography is needed") {
  auto m = line_manifest(5, 1.0);
  for (auto& r : m.records) r.pose.reset();
  TrainingConfig c;
  c.loss_mask = LossMask::parse("mse");
  const auto s = sample_triplets(m, c, 3);
  CHECK(s.samples.size() == 5);
  for (const auto& t : s.samples) CHECK(t.positives.empty());
  m.records[2].source_path.clear();
  CHECK_THROWS_AS(sample_triplets(m, c, 3), ValidationError);
}

TEST_CASE("adamw first step moves each parameter by about lr against the gradient") {
  AdamW opt(3, 0.9, 0.999, 1e-8, 0.0);
  std::vector<double> p = {1.0, 1.0, 1.0};
  const std::vector<double> g = {2.0, -0.5, 0.0};
  opt.step(p, g, {}, 0.01);
  CHECK(p[0] == doctest::Approx(0.99).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(1.01).epsilon(1e-6));
  CHECK(p[2] == 1.0);
  const std::vector<std::uint8_t> mask = {0, 1, 1};
  std::vector<double> q = {1.0, 1.0, 1.0};
  AdamW masked(3, 0.9, 0.999, 1e-8, 0.0);
  masked.step(q, g, mask, 0.01);
  CHECK(q[0] == 1.0);
}

TEST_CASE("adamw weight decay is decoupled from the gradient") {
  AdamW opt(1, 0.9, 0.999, 1e-8, 0.5);
  std::vector<double> p = {2.0};
  opt.step(p, std::vector<double>{0.0}, {}, 0.1);
  CHECK(p[0] == doctest::Approx(2.0 - 0.1 * 0.5 * 2.0));
}

namespace {

struct SmallFixture {
  TempDir dir{"loqi-distill"};
  DatasetManifest pairs;
  SmallFixture() {
    SceneFixtureOptions o;
    o.places = 9;
    o.views = 4;
    o.width = o.height = 16;
    o.seed = 3;
    const auto f = write_scene_fixture(dir.path() / "fx", o);
    pairs = degrade_manifest(load_manifest(f.train), DegradationSpec::jpeg(10), dir.path() / "lq");
  }
};

}  // namespace

TEST_CASE("one distillation step lowers the loss it was computed on") {
  SmallFixture fx;
  auto base = make_toy_extractor(1, 4, 8);
  BranchPair pair = clone_as_branch_pair(base);
  TrainingConfig c;
  c.loss_mask = LossMask::parse("mse");
  c.lr_init = 1e-3;
  Distiller d(pair, fx.pairs, c);
  const std::vector<TrainSample> batch = {{0, {}, {}}};
  const auto teacher_before = pair.teacher.hash();
  const auto first = d.step(batch);
  const auto second = d.step(batch);
  CHECK(second.mse < first.mse);
  CHECK(pair.teacher.hash() == teacher_before);
  CHECK(d.global_step() == 2);
}

TEST_CASE("a non-finite loss stops training before the update") {
  SmallFixture fx;
  auto base = make_toy_extractor(1, 4, 8);
  BranchPair pair = clone_as_branch_pair(base);
  const auto groups = pair.student.model().groups();
  pair.student.model().parameters()[groups.back().offset] = std::nan("");
  TrainingConfig c;
  c.loss_mask = LossMask::parse("mse");
  Distiller d(pair, fx.pairs, c);
  const auto before = pair.student.hash();
  CHECK_THROWS_AS(d.step(std::vector<TrainSample>{{0, {}, {}}}), NumericError);
  CHECK(pair.student.hash() == before);
  CHECK(d.global_step() == 0);
}

TEST_CASE("training is deterministic and an interrupted run resumes to the same student") {
  SmallFixture fx;
  TrainingConfig c;
  c.loss_mask = LossMask::all();
  c.lr_init = 1e-3;
  c.positive_rule = PositiveRule::place_id;
  c.negatives_per_sample = 3;
  c.epochs = 2;
  c.seed = 4;
  auto full = [&](const fs::path& out) {
    BranchPair pair = clone_as_branch_pair(make_toy_extractor(2, 4, 8));
    const auto run = train_distill(pair, fx.pairs, c, out);
    CHECK(run.completed);
    return pair.student.hash();
  };
  const auto h1 = full(fx.dir.path() / "a");
  const auto h2 = full(fx.dir.path() / "b");
  CHECK(h1 == h2);
  CHECK(fs::exists(fx.dir.path() / "a" / Distiller::kCheckpointFile));
  CHECK_FALSE(fs::exists(fx.dir.path() / "a" / Distiller::kStateFile));

  const fs::path out = fx.dir.path() / "c";
  {
    BranchPair pair = clone_as_branch_pair(make_toy_extractor(2, 4, 8));
    DistillOptions opt;
    opt.stop_after_steps = 11;
    const auto run = train_distill(pair, fx.pairs, c, out, opt);
    CHECK_FALSE(run.completed);
    CHECK(run.steps == 11);
    CHECK(fs::exists(out / Distiller::kStateFile));
  }
  BranchPair pair = clone_as_branch_pair(make_toy_extractor(2, 4, 8));
  const auto run = train_distill(pair, fx.pairs, c, out);
  CHECK(run.completed);
  CHECK(pair.student.hash() == h1);
  REQUIRE(run.epochs.size() == 2);
  CHECK(run.epochs[0].teacher_hash == run.epochs[1].teacher_hash);
  CHECK(load_checkpoint(out / Distiller::kCheckpointFile).hash() == h1);
}

TEST_CASE("a frozen encoder keeps its parameters through training") {
  SmallFixture fx;
  auto base = make_toy_extractor(2, 4, 8);
  base.set_trainable(Part::encoder, false);
  BranchPair pair = clone_as_branch_pair(base);
  TrainingConfig c;
  c.loss_mask = LossMask::parse("ickd,mse");
  c.lr_init = 1e-2;
  const auto before = std::vector<double>(pair.student.model().parameters().begin(),
                                          pair.student.model().parameters().end());
  train_distill(pair, fx.pairs, c, fx.dir.path() / "frozen");
  const auto after = pair.student.model().parameters();
  bool agg_moved = false;
  for (const auto& g : pair.student.model().groups())
    for (std::size_t i = g.offset; i < g.offset + g.size; ++i) {
      if (g.part == Part::encoder) CHECK(after[i] == before[i]);
      else agg_moved = agg_moved || after[i] != before[i];
    }
  CHECK(agg_moved);
}
