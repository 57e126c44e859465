#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "loqi/core/errors.hpp"
#include "loqi/retrieval/report.hpp"
#include "loqi/retrieval/retrieval.hpp"
#include "support/oracles.hpp"
#include "support/retrieval_fixture.hpp"

using namespace loqi;
using namespace loqi::testing;

TEST_CASE("knn search equals an exhaustive sort, ties included") {
  Rng rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rc = gen_retrieval_case(rng, uniform_int(rng, 1, 100), uniform_int(rng, 10, 500), uniform_int(rng, 2, 24));
    const std::size_t n = std::min<std::size_t>(10, rc.database.size());
    const auto results = knn_search(rc.queries, rc.database, n);
    REQUIRE(results.size() == rc.queries.size());
    for (const auto& res : results) {
      const auto want = oracle_rank(rc.queries.at(res.query_id), rc.db_list);
      REQUIRE(res.ranked_db_ids.size() == n);
      for (std::size_t k = 0; k < n; ++k) {
        CHECK(res.ranked_db_ids[k] == want[k].first);
        CHECK(res.distances[k] == doctest::Approx(std::sqrt(want[k].second)).epsilon(1e-9));
      }
      CHECK(std::is_sorted(res.distances.begin(), res.distances.end()));
    }
  }
}

TEST_CASE("a single-entry database is rank one for everyone") {
  Rng rng(72);
  DescriptorDB db("d", 4, true), q("q", 4, true);
  db.insert("only", gen_unit_floats(rng, 4));
  for (int i = 0; i < 5; ++i) q.insert(id_of("q", i), gen_unit_floats(rng, 4));
  for (const auto& r : knn_search(q, db, 1)) CHECK(r.ranked_db_ids[0] == "only");
}

TEST_CASE("a query equal to a database vector finds it at distance zero") {
  Rng rng(73);
  DescriptorDB db("d", 8, true), q("q", 8, true);
  for (int i = 0; i < 20; ++i) db.insert(id_of("d", i), gen_unit_floats(rng, 8));
  q.insert("q", db.at("d0007"));
  const auto r = knn_search(q, db, 3);
  CHECK(r[0].ranked_db_ids[0] == "d0007");
  CHECK(r[0].distances[0] == 0.0);
}

TEST_CASE("knn search validates its inputs") {
  DescriptorDB db("d", 2, true), q("q", 3, true);
  CHECK_THROWS_AS(knn_search(q, db, 1), ValidationError);
  db.insert("a", {1.0f, 0.0f});
  DescriptorDB q2("q", 2, true);
  q2.insert("x", {0.0f, 1.0f});
  CHECK_THROWS_AS(knn_search(q2, db, 2), ValidationError);
  CHECK_THROWS_AS(knn_search(q2, db, 0), ValidationError);
}

namespace {

struct OracleRecall {
  std::vector<std::size_t> hits;
  std::size_t queries = 0;
};

OracleRecall oracle_recall(const RetrievalCase& rc, const std::vector<int>& ns, double d, EmptyGroundTruth policy) {
  OracleRecall out{std::vector<std::size_t>(ns.size(), 0), 0};
  for (const auto& qr : rc.query_manifest.records) {
    bool any = false;
    for (const auto& dr : rc.db_manifest.records) any = any || utm_distance(qr, dr) <= d;
    if (!any && policy == EmptyGroundTruth::exclude) continue;
    ++out.queries;
    const auto ranked = oracle_rank(rc.queries.at(qr.id), rc.db_list);
    for (std::size_t i = 0; i < ns.size(); ++i) {
      bool hit = false;
      for (int k = 0; k < ns[i]; ++k) hit = hit || utm_distance(qr, *rc.db_manifest.find(ranked[k].first)) <= d;
      out.hits[i] += hit ? 1 : 0;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("recall at n equals a brute-force count and is monotone in n and d") {
  Rng rng(74);
  const std::vector<int> ns = {1, 2, 5, 10};
  for (int trial = 0; trial < 20; ++trial) {
    const auto rc = gen_retrieval_case(rng, uniform_int(rng, 5, 100), uniform_int(rng, 20, 500), uniform_int(rng, 2, 16));
    const auto results = knn_search(rc.queries, rc.database, 10);
    std::vector<double> prev(ns.size(), -1.0);
    for (double d : {0.5, 2.0, 10.0, 25.0, 80.0}) {
      RecallOptions opt;
      opt.empty_policy = EmptyGroundTruth::count_as_miss;
      const auto rep = recall_at_n(results, rc.query_manifest, rc.db_manifest, d, opt);
      const auto want = oracle_recall(rc, ns, d, opt.empty_policy);
      CHECK(rep.queries == want.queries);
      for (std::size_t i = 0; i < ns.size(); ++i) {
        CHECK(rep.hits[i] == want.hits[i]);
        CHECK(rep.recall[i] == doctest::Approx(100.0 * want.hits[i] / want.queries));
        if (i > 0) CHECK(rep.recall[i] >= rep.recall[i - 1]);
        CHECK(rep.recall[i] >= prev[i]);
        prev[i] = rep.recall[i];
      }
    }
  }
}

TEST_CASE("queries without ground truth follow the chosen policy") {
  Rng rng(75);
  auto rc = gen_retrieval_case(rng, 10, 30, 4, 100.0);
  // Move one query far away from every database pose.
  rc.query_manifest.records[0].pose = GeoPose::utm(1e6, 0.0);
  const auto results = knn_search(rc.queries, rc.database, 5);
  RecallOptions opt;
  opt.ns = {1, 5};
  CHECK_THROWS_AS(recall_at_n(results, rc.query_manifest, rc.db_manifest, 25, opt), ValidationError);
  opt.empty_policy = EmptyGroundTruth::exclude;
  const auto ex = recall_at_n(results, rc.query_manifest, rc.db_manifest, 25, opt);
  CHECK(ex.queries == 9);
  CHECK(ex.excluded == 1);
  opt.empty_policy = EmptyGroundTruth::count_as_miss;
  const auto miss = recall_at_n(results, rc.query_manifest, rc.db_manifest, 25, opt);
  CHECK(miss.queries == 10);
  CHECK(miss.hits[1] == ex.hits[1]);
}

TEST_CASE("no database image within d gives zero recall when counted as misses") {
  Rng rng(76);
  auto rc = gen_retrieval_case(rng, 8, 20, 4);
  for (auto& r : rc.query_manifest.records) r.pose = GeoPose::utm(5e6, 5e6);
  RecallOptions opt;
  opt.empty_policy = EmptyGroundTruth::count_as_miss;
  const auto rep = recall_at_n(knn_search(rc.queries, rc.database, 10), rc.query_manifest, rc.db_manifest, 25, opt);
  for (double r : rep.recall) CHECK(r == 0.0);
}

TEST_CASE("frame-index ground truth counts frames") {
  DatasetManifest qm, dm;
  qm.name = dm.name = "seq";
  qm.gt_mode = dm.gt_mode = {GroundTruthMode::Kind::index, 2};
  DescriptorDB q("q", 2, true), db("d", 2, true);
  for (int i = 0; i < 10; ++i) {
    const std::string id = id_of("f", i);
    dm.records.push_back({id, id + ".png", GeoPose::frame_index(i), {}, {}, {}});
    const float a = static_cast<float>(i) * 0.15f;
    db.insert(id, {std::cos(a), std::sin(a)});
  }
  qm.records.push_back({"q", "q.png", GeoPose::frame_index(4), {}, {}, {}});
  q.insert("q", {std::cos(0.15f * 6.4f), std::sin(0.15f * 6.4f)});  // nearest is frame 6
  RecallOptions opt;
  opt.ns = {1};
  const auto rep = recall_at_n(knn_search(q, db, 1), qm, dm, 2, opt);
  CHECK(rep.unit == "frames");
  CHECK(rep.recall[0] == 100.0);
  CHECK(recall_at_n(knn_search(q, db, 1), qm, dm, 1, opt).recall[0] == 0.0);
}

TEST_CASE("recall reports round trip through text") {
  RecallReport r;
  r.dataset = "pitts";
  r.threshold = 25;
  r.label = "MSE";
  r.ns = {1, 2, 5, 10};
  r.hits = {46, 50, 55, 60};
  r.queries = 64;
  for (auto h : r.hits) r.recall.push_back(100.0 * h / 64);
  r.bitrate_bps = 123456.5;
  const auto text = format_recall_report(r);
  CHECK(text.rfind("# loqi-recall 1\n", 0) == 0);
  CHECK(text.find("1\t71.88\t46") != std::string::npos);
  const auto back = parse_recall_report(text);
  CHECK(back.dataset == r.dataset);
  CHECK(back.ns == r.ns);
  CHECK(back.hits == r.hits);
  CHECK(back.bitrate_bps.has_value());
  for (std::size_t i = 0; i < r.ns.size(); ++i) CHECK(back.formatted(i) == r.formatted(i));
  CHECK_THROWS_AS(parse_recall_report("N\trecall\thits\n1\tx\t3\n"), FormatError);
}

TEST_CASE("delta table subtracts printed values") {
  RecallReport a, b;
  a.dataset = b.dataset = "d";
  a.ns = b.ns = {1, 5};
  a.recall = {53.2151, 70.0};
  b.recall = {57.68, 69.994};
  a.hits = b.hits = {0, 0};
  const auto t = delta_report(a, b);
  CHECK(t.rows[0].delta == "+4.46");
  CHECK(t.rows[1].delta == "-0.01");
  CHECK(format_signed_hundredths(0) == "0.00");
  CHECK(format_signed_hundredths(-5) == "-0.05");
  b.ns = {1, 2};
  CHECK_THROWS_AS(delta_report(a, b), ValidationError);
}
