#include "poischan/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace poischan {

double pairwise_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n <= 32) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

MeanStderr mean_stderr(std::span<const double> v) {
  MeanStderr out;
  const std::size_t n = v.size();
  if (n == 0) return out;
  out.mean = pairwise_sum(v) / static_cast<double>(n);
  if (n < 2) return out;
  std::vector<double> dev2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = v[i] - out.mean;
    dev2[i] = d * d;
  }
  const double var = pairwise_sum(dev2) / static_cast<double>(n - 1);
  out.se = std::sqrt(var / static_cast<double>(n));
  return out;
}

double log_sum_exp(std::span<const double> a) {
  if (a.empty()) throw std::invalid_argument("log_sum_exp: empty input");
  double m = a[0];
  for (double x : a)
    if (x > m) m = x;
  double s = 0.0;
  for (double x : a) s += std::exp(x - m);
  return m + std::log(s);
}

std::vector<double> softmax_weights(std::span<const double> a) {
  if (a.empty()) throw std::invalid_argument("softmax_weights: empty input");
  double m = a[0];
  for (double x : a)
    if (x > m) m = x;
  std::vector<double> w(a.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    w[i] = std::exp(a[i] - m);
    s += w[i];
  }
  for (auto& x : w) x /= s;
  return w;
}

double effective_sample_size(std::span<const double> p) {
  double s2 = 0.0;
  for (double x : p) s2 += x * x;
  if (s2 <= 0.0) return 0.0;
  return 1.0 / s2;
}

int draw_index(std::span<const double> weights, double u) {
  if (weights.empty()) throw std::invalid_argument("draw_index: empty weights");
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    cum += weights[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size()) - 1;
}

}  // namespace poischan
