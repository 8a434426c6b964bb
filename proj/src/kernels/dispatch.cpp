#include <atomic>
#include <cstdlib>
#include <string_view>

#include "nirs/kernels.hpp"

namespace nirs::simd {

#ifdef NIRS_HAVE_AVX2
const KernelTable& avx2_table();
#endif

const KernelTable* avx2_kernels() {
#ifdef NIRS_HAVE_AVX2
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* pick_default() {
  const char* env = std::getenv("NIRS_SIMD");
  if (env != nullptr && std::string_view(env) == "scalar") return &scalar_kernels();
  if (const KernelTable* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{pick_default()};
  return slot;
}

}  // namespace

const KernelTable& active_kernels() { return *active_slot().load(std::memory_order_acquire); }

void set_active_kernels(const KernelTable& table) {
  active_slot().store(&table, std::memory_order_release);
}

}  // namespace nirs::simd
