#include "topicnav/kernels.hpp"

namespace topicnav::kernels {

namespace {

void gibbs_topic_weights(const std::int32_t* doc_topic, const std::int32_t* word_topic,
                         const std::int32_t* topic_total, std::size_t n_topics, double alpha,
                         double beta, double vbeta, double* out) {
  for (std::size_t k = 0; k < n_topics; ++k) {
    out[k] = (static_cast<double>(doc_topic[k]) + alpha) * (static_cast<double>(word_topic[k]) + beta) /
             (static_cast<double>(topic_total[k]) + vbeta);
  }
}

double sparse_dense_dot(const std::uint32_t* positions, const double* weights, std::size_t n,
                        const double* dense) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += weights[i] * dense[positions[i]];
  return sum;
}

double sum_squares(const double* values, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += values[i] * values[i];
  return sum;
}

void accumulate_smoothed(const std::int32_t* counts, std::size_t stride, std::size_t n, double beta,
                         double denominator, double* acc) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += (static_cast<double>(counts[i * stride]) + beta) / denominator;
}

constexpr KernelTable kScalar{Isa::Scalar, "scalar", gibbs_topic_weights, sparse_dense_dot, sum_squares,
                              accumulate_smoothed};

}  // namespace

const KernelTable& scalar() { return kScalar; }

}  // namespace topicnav::kernels
