#include <cstdlib>
#include <cstring>

#include "gazeload/kernels.hpp"
#include "gazeload/log.hpp"

namespace gazeload {

#if GAZELOAD_BUILD_AVX2
const Kernels& avx2_kernels();
#endif
#if GAZELOAD_BUILD_NEON
const Kernels& neon_kernels();
#endif

const std::vector<const Kernels*>& compiled_kernels() {
  static const std::vector<const Kernels*> all = [] {
    std::vector<const Kernels*> v{&scalar_kernels()};
#if GAZELOAD_BUILD_AVX2
    v.push_back(&avx2_kernels());
#endif
#if GAZELOAD_BUILD_NEON
    v.push_back(&neon_kernels());
#endif
    return v;
  }();
  return all;
}

namespace {

bool cpu_can_run(const Kernels& k) {
  if (std::strcmp(k.name, "scalar") == 0) return true;
#if GAZELOAD_BUILD_AVX2
  if (std::strcmp(k.name, "avx2") == 0)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#endif
#if GAZELOAD_BUILD_NEON
  if (std::strcmp(k.name, "neon") == 0) return true;  // baseline on aarch64
#endif
  return false;
}

const Kernels* select() {
  const char* want = std::getenv("GAZELOAD_SIMD");
  if (want && std::strcmp(want, "auto") != 0) {
    for (const Kernels* k : compiled_kernels())
      if (std::strcmp(k->name, want) == 0 && cpu_can_run(*k)) return k;
    log::warn("GAZELOAD_SIMD=%s not available, falling back to scalar", want);
    return &scalar_kernels();
  }
  const Kernels* best = &scalar_kernels();
  for (const Kernels* k : compiled_kernels())
    if (cpu_can_run(*k)) best = k;  // later entries are wider
  return best;
}

}  // namespace

std::vector<const Kernels*> runnable_kernels() {
  std::vector<const Kernels*> v;
  for (const Kernels* k : compiled_kernels())
    if (cpu_can_run(*k)) v.push_back(k);
  return v;
}

const Kernels& active_kernels() {
  static const Kernels* chosen = [] {
    const Kernels* k = select();
    log::debug("simd kernels: %s", k->name);
    return k;
  }();
  return *chosen;
}

std::string active_kernel_name() { return active_kernels().name; }

}  // namespace gazeload
