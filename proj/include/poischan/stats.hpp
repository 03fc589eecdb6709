#pragma once

#include <span>
#include <vector>

namespace poischan {

// Fixed-order pairwise summation: deterministic for a given input order and
// much better conditioned than a running sum on long Monte-Carlo vectors.
double pairwise_sum(std::span<const double> v);

struct MeanStderr {
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(n); 0 when n < 2
};

MeanStderr mean_stderr(std::span<const double> v);

// log(sum_i exp(a[i])) with max shift; ties resolved toward the lowest index.
double log_sum_exp(std::span<const double> a);

// exp(a[i] - max) / sum, i.e. weights proportional to exp(a[i]).
std::vector<double> softmax_weights(std::span<const double> a);

// 1 / sum(p_i^2) for normalized weights.
double effective_sample_size(std::span<const double> p);

// Categorical draw: first index whose cumulative weight exceeds u. Weights
// must be normalized; u in (0,1).
int draw_index(std::span<const double> weights, double u);

}  // namespace poischan
