#include <cmath>
#include <vector>

#include "doctest.h"
#include "loqi/simd/kernels.hpp"
#include "support/generators.hpp"

using namespace loqi;
using namespace loqi::testing;

namespace {

// Lengths straddling every tail case of 4- and 8-lane loops.
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 64, 100, 257, 1000};

double tolerance(double magnitude, std::size_t n) { return 1e-14 * (magnitude + 1.0) * static_cast<double>(n + 1); }

}  // namespace

TEST_CASE("scalar kernel table is always available and listed first") {
  const auto all = simd::available_kernels();
  REQUIRE(!all.empty());
  CHECK(all.front()->isa == simd::Isa::scalar);
  CHECK(simd::kernels_for(simd::Isa::scalar) == &simd::scalar_kernels());
}

TEST_CASE("every kernel variant matches the scalar reference") {
  Rng rng(41);
  const auto& ref = simd::scalar_kernels();
  for (const simd::KernelTable* k : simd::available_kernels()) {
    CAPTURE(simd::isa_name(k->isa));
    for (std::size_t n : kLengths) {
      CAPTURE(n);
      std::vector<double> a(n), b(n), y(n);
      std::vector<float> fa(n), fb(n);
      double mag = 0;
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = normal(rng) * 10;
        b[i] = normal(rng) * 10;
        y[i] = normal(rng);
        fa[i] = static_cast<float>(a[i]);
        fb[i] = static_cast<float>(b[i]);
        mag += std::abs(a[i] * b[i]) + (a[i] - b[i]) * (a[i] - b[i]);
      }
      CHECK(std::abs(k->dot_f64(a.data(), b.data(), n) - ref.dot_f64(a.data(), b.data(), n)) <= tolerance(mag, n));
      CHECK(std::abs(k->sqdist_f64(a.data(), b.data(), n) - ref.sqdist_f64(a.data(), b.data(), n)) <=
            tolerance(mag, n));
      CHECK(std::abs(k->dot_f32(fa.data(), fb.data(), n) - ref.dot_f32(fa.data(), fb.data(), n)) <=
            tolerance(mag, n));
      CHECK(std::abs(k->sqdist_f32(fa.data(), fb.data(), n) - ref.sqdist_f32(fa.data(), fb.data(), n)) <=
            tolerance(mag, n));
      std::vector<double> y1 = y, y2 = y;
      k->axpy_f64(0.37, a.data(), y1.data(), n);
      ref.axpy_f64(0.37, a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-12 * (std::abs(y2[i]) + 1));
    }
  }
}

TEST_CASE("kernels work on unaligned pointers") {
  Rng rng(42);
  std::vector<double> buf(70);
  for (double& v : buf) v = normal(rng);
  const auto& ref = simd::scalar_kernels();
  for (const simd::KernelTable* k : simd::available_kernels())
    for (std::size_t off = 0; off < 4; ++off)
      CHECK(k->dot_f64(buf.data() + off, buf.data() + 3, 61) ==
            doctest::Approx(ref.dot_f64(buf.data() + off, buf.data() + 3, 61)).epsilon(1e-13));
}

TEST_CASE("squared distance of a vector with itself is exactly zero in every variant") {
  Rng rng(43);
  std::vector<float> v(123);
  for (float& x : v) x = static_cast<float>(normal(rng));
  for (const simd::KernelTable* k : simd::available_kernels()) CHECK(k->sqdist_f32(v.data(), v.data(), v.size()) == 0.0);
}

TEST_CASE("forcing the scalar table changes the active selection") {
  const simd::Isa before = simd::active_kernels().isa;
  simd::force_isa(simd::Isa::scalar);
  CHECK(simd::active_kernels().isa == simd::Isa::scalar);
  simd::force_isa(before);
  CHECK(simd::active_kernels().isa == before);
}
