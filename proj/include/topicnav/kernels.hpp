#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

// Data-parallel inner loops with a scalar reference implementation and SIMD
// variants selected at runtime. Elementwise kernels are bit-identical across
// variants; reductions agree to rounding.
namespace topicnav::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  std::string_view name;

  /// out[k] = (doc_topic[k] + alpha) * (word_topic[k] + beta) / (topic_total[k] + vbeta)
  void (*gibbs_topic_weights)(const std::int32_t* doc_topic, const std::int32_t* word_topic,
                              const std::int32_t* topic_total, std::size_t n_topics, double alpha,
                              double beta, double vbeta, double* out);

  /// sum_i weights[i] * dense[positions[i]]
  double (*sparse_dense_dot)(const std::uint32_t* positions, const double* weights, std::size_t n,
                             const double* dense);

  /// sum_i values[i]^2
  double (*sum_squares)(const double* values, std::size_t n);

  /// acc[i] += (counts[i * stride] + beta) / denominator, for i < n
  void (*accumulate_smoothed)(const std::int32_t* counts, std::size_t stride, std::size_t n,
                              double beta, double denominator, double* acc);
};

const KernelTable& scalar();
/// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2();

/// Best available table. `TOPICNAV_SIMD=scalar|avx2` in the environment
/// overrides the choice (an unavailable request falls back to scalar).
const KernelTable& active();

/// Every table usable on this machine, scalar first.
std::vector<const KernelTable*> available();

}  // namespace topicnav::kernels
