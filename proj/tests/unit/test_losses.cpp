#include <cmath>
#include <vector>

#include "doctest.h"
#include "loqi/core/errors.hpp"
#include "loqi/losses/losses.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace loqi;
using namespace loqi::testing;

TEST_CASE("icc of a random latent matches the brute-force definition") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const LatentCode z = gen_latent(rng);
    const IccMatrix c = compute_icc(z);
    const Matrix want = oracle_icc(z);
    for (int i = 0; i < z.channels(); ++i)
      for (int j = 0; j < z.channels(); ++j) CHECK(std::abs(c.at(i, j) - static_cast<double>(want[i][j])) <= 1e-12);
  }
}

TEST_CASE("identical latents have zero ickd") {
  Rng rng(3);
  const LatentCode z = gen_latent(rng, 8, 4, 4);
  CHECK(ickd_loss(z, z) <= 1e-15);
}

TEST_CASE("ickd compares latents of different spatial size") {
  Rng rng(4);
  const LatentCode a = gen_latent(rng, 6, 3, 5), b = gen_latent(rng, 6, 7, 2);
  CHECK(relative_error(ickd_loss(a, b), oracle_ickd(a, b)) <= 1e-10);
}

TEST_CASE("ickd rejects a channel mismatch and an all-zero latent") {
  Rng rng(5);
  CHECK_THROWS_AS(ickd_loss(gen_latent(rng, 4, 2, 2), gen_latent(rng, 5, 2, 2)), ValidationError);
  CHECK_THROWS_AS(compute_icc(LatentCode(3, 2, 2)), ValidationError);
}

TEST_CASE("ickd is bounded by 2 and symmetric in its arguments") {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const int c = uniform_int(rng, 2, 10);
    const LatentCode a = gen_latent(rng, c, 3, 3, 0.3), b = gen_latent(rng, c, 2, 4, 0.3);
    const double l = ickd_loss(a, b);
    CHECK(l >= 0.0);
    CHECK(l <= 2.0 + 1e-12);
    CHECK(std::abs(l - ickd_loss(b, a)) <= 1e-12);
  }
}

TEST_CASE("mse is the plain sum of squared differences") {
  const Descriptor s(std::vector<double>{1.0, 2.0, 3.0});
  const Descriptor t(std::vector<double>{1.0, 0.0, 6.0});
  CHECK(mse_loss(s, t) == doctest::Approx(13.0));
  CHECK_THROWS_AS(mse_loss(s, Descriptor(2)), ValidationError);
}

TEST_CASE("mse and triplet agree with brute force on random fixtures") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = static_cast<std::size_t>(uniform_int(rng, 1, 64));
    const Descriptor s = gen_descriptor(rng, d), t = gen_descriptor(rng, d);
    CHECK(relative_error(mse_loss(s, t), oracle_mse(s, t)) <= 1e-12);
    const auto pos = gen_descriptors(rng, uniform_int(rng, 1, 6), d, true);
    const auto neg = gen_descriptors(rng, uniform_int(rng, 1, 8), d, true);
    const Descriptor q = gen_descriptor(rng, d, true);
    const double margin = uniform(rng, 0.0, 1.0);
    const long double want = oracle_triplet(q, pos, neg, margin);
    const double got = triplet_loss(q, pos, neg, margin);
    if (want == 0.0L)
      CHECK(got == 0.0);
    else
      CHECK(relative_error(got, want) <= 1e-12);
  }
}

TEST_CASE("hardest positive ties resolve to the lowest index") {
  const Descriptor q(std::vector<double>{0.0, 0.0});
  const std::vector<Descriptor> pos = {Descriptor(std::vector<double>{2.0, 0.0}),
                                       Descriptor(std::vector<double>{0.0, 1.0}),
                                       Descriptor(std::vector<double>{1.0, 0.0})};
  const auto h = select_hardest_positive(q, pos);
  CHECK(h.index == 1);
  CHECK(h.squared_distance == 1.0);
}

TEST_CASE("triplet loss is zero once every negative clears the margin") {
  const Descriptor q(std::vector<double>{0.0, 0.0});
  const std::vector<Descriptor> pos = {Descriptor(std::vector<double>{0.1, 0.0})};
  const std::vector<Descriptor> neg = {Descriptor(std::vector<double>{1.0, 0.0}),
                                       Descriptor(std::vector<double>{0.0, -2.0})};
  CHECK(triplet_loss(q, pos, neg, 0.1) == 0.0);
  const auto g = triplet_loss_grad(q, pos, neg, 0.1);
  CHECK(g.active_negatives == 0);
  for (double v : g.d_query.data()) CHECK(v == 0.0);
}

TEST_CASE("triplet loss needs at least one positive and one negative") {
  const Descriptor q(2);
  const std::vector<Descriptor> one = {Descriptor(2)};
  CHECK_THROWS_AS(triplet_loss(q, {}, one, 0.1), ValidationError);
  CHECK_THROWS_AS(triplet_loss(q, one, {}, 0.1), ValidationError);
}

TEST_CASE("composite loss weights the three terms") {
  LossWeights w;
  CHECK(composite_loss(0.5, 2e-5, 1e-4, w) == doctest::Approx(0.5 + 2.0 + 1.0));
  w.alpha = -1.0;
  CHECK_THROWS_AS(w.validate(), ValidationError);
}
