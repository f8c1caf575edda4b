#include <immintrin.h>

#include "kernels/avx2.hpp"

namespace topicnav::kernels {

namespace {

inline __m256d load_i32_as_pd(const std::int32_t* p) {
  return _mm256_cvtepi32_pd(_mm_loadu_si128(reinterpret_cast<const __m128i*>(p)));
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

void gibbs_topic_weights(const std::int32_t* doc_topic, const std::int32_t* word_topic,
                         const std::int32_t* topic_total, std::size_t n_topics, double alpha,
                         double beta, double vbeta, double* out) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  const __m256d vv = _mm256_set1_pd(vbeta);
  std::size_t k = 0;
  for (; k + 4 <= n_topics; k += 4) {
    __m256d d = _mm256_add_pd(load_i32_as_pd(doc_topic + k), va);
    __m256d w = _mm256_add_pd(load_i32_as_pd(word_topic + k), vb);
    __m256d t = _mm256_add_pd(load_i32_as_pd(topic_total + k), vv);
    _mm256_storeu_pd(out + k, _mm256_div_pd(_mm256_mul_pd(d, w), t));
  }
  for (; k < n_topics; ++k) {
    out[k] = (static_cast<double>(doc_topic[k]) + alpha) * (static_cast<double>(word_topic[k]) + beta) /
             (static_cast<double>(topic_total[k]) + vbeta);
  }
}

double sparse_dense_dot(const std::uint32_t* positions, const double* weights, std::size_t n,
                        const double* dense) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(positions + i));
    __m256d gathered = _mm256_i32gather_pd(dense, idx, 8);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(weights + i), gathered));
  }
  double sum = hsum(acc);
  for (; i < n; ++i) sum += weights[i] * dense[positions[i]];
  return sum;
}

double sum_squares(const double* values, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(values + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
  }
  double sum = hsum(acc);
  for (; i < n; ++i) sum += values[i] * values[i];
  return sum;
}

void accumulate_smoothed(const std::int32_t* counts, std::size_t stride, std::size_t n, double beta,
                         double denominator, double* acc) {
  const __m256d vb = _mm256_set1_pd(beta);
  const __m256d vd = _mm256_set1_pd(denominator);
  std::size_t i = 0;
  if (stride == 1) {
    for (; i + 4 <= n; i += 4) {
      __m256d c = _mm256_add_pd(load_i32_as_pd(counts + i), vb);
      _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_div_pd(c, vd)));
    }
  } else {
    const __m128i offsets = _mm_setr_epi32(0, static_cast<int>(stride), static_cast<int>(2 * stride),
                                           static_cast<int>(3 * stride));
    for (; i + 4 <= n; i += 4) {
      __m128i gathered = _mm_i32gather_epi32(counts + i * stride, offsets, 4);
      __m256d c = _mm256_add_pd(_mm256_cvtepi32_pd(gathered), vb);
      _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_div_pd(c, vd)));
    }
  }
  for (; i < n; ++i) acc[i] += (static_cast<double>(counts[i * stride]) + beta) / denominator;
}

constexpr KernelTable kAvx2{Isa::Avx2, "avx2", gibbs_topic_weights, sparse_dense_dot, sum_squares,
                            accumulate_smoothed};

}  // namespace

const KernelTable& avx2_table() { return kAvx2; }

}  // namespace topicnav::kernels
