#include <atomic>
#include <cstdlib>
#include <string>

#include "kernel_variants.hpp"

namespace loqi::simd {
namespace {

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(LOQI_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(LOQI_HAVE_NEON)
      return true;  // mandatory on aarch64
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* compiled_table(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &scalar::table;
    case Isa::avx2:
#if defined(LOQI_HAVE_AVX2)
      return &avx2::table;
#else
      return nullptr;
#endif
    case Isa::neon:
#if defined(LOQI_HAVE_NEON)
      return &neon::table;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable* best_table() {
  if (const char* env = std::getenv("LOQI_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return &scalar::table;
    if (want == "avx2" && kernels_for(Isa::avx2)) return kernels_for(Isa::avx2);
    if (want == "neon" && kernels_for(Isa::neon)) return kernels_for(Isa::neon);
  }
  for (Isa isa : {Isa::avx2, Isa::neon}) {
    if (const KernelTable* t = kernels_for(isa)) return t;
  }
  return &scalar::table;
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{best_table()};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

const KernelTable& scalar_kernels() { return scalar::table; }

const KernelTable* kernels_for(Isa isa) {
  return cpu_has(isa) ? compiled_table(isa) : nullptr;
}

std::vector<const KernelTable*> available_kernels() {
  std::vector<const KernelTable*> out;
  for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
    if (const KernelTable* t = kernels_for(isa)) out.push_back(t);
  }
  return out;
}

const KernelTable& active_kernels() { return *active_slot().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  const KernelTable* t = kernels_for(isa);
  active_slot().store(t ? t : &scalar::table, std::memory_order_relaxed);
}

}  // namespace loqi::simd
