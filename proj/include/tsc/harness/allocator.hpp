#pragma once

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace tsc::harness {

/// Minibatch matrices are a few hundred KB and freed every update; by default
/// glibc maps and unmaps each one, which costs more than the arithmetic.
inline void keep_large_blocks_on_heap() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 128 << 20);
#endif
}

}  // namespace tsc::harness
