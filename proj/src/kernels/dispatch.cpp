#include <cstdlib>
#include <string_view>

#include "topicnav/kernels.hpp"

#if defined(TOPICNAV_HAVE_AVX2)
#include "kernels/avx2.hpp"
#endif

namespace topicnav::kernels {

const KernelTable* avx2() {
#if defined(TOPICNAV_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable* chosen = [] {
    const char* env = std::getenv("TOPICNAV_SIMD");
    const std::string_view request = env ? env : "";
    if (request == "scalar") return &scalar();
    if (const auto* table = avx2()) return table;
    return &scalar();
  }();
  return *chosen;
}

std::vector<const KernelTable*> available() {
  std::vector<const KernelTable*> tables{&scalar()};
  if (const auto* table = avx2()) tables.push_back(table);
  return tables;
}

}  // namespace topicnav::kernels
