#pragma once

#include "loqi/simd/kernels.hpp"

namespace loqi::simd {

namespace scalar {
extern const KernelTable table;
}

#if defined(LOQI_HAVE_AVX2)
namespace avx2 {
extern const KernelTable table;
}
#endif

#if defined(LOQI_HAVE_NEON)
namespace neon {
extern const KernelTable table;
}
#endif

}  // namespace loqi::simd
