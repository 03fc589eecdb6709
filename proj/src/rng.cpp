#include "poischan/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace poischan {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RngStream::RngStream(std::uint64_t key) : key_(key) {
  // Expand the key into xoshiro256++ state with the splitmix64 sequence.
  std::uint64_t s = key;
  for (auto& w : state_) {
    s += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    w = z ^ (z >> 31);
  }
}

RngStream RngStream::substream(std::uint64_t index) const {
  return RngStream(mix64(key_ ^ mix64(index + 0x9E3779B97F4A7C15ULL)));
}

std::uint64_t RngStream::next_u64() {
  auto& s = state_;
  const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
  const std::uint64_t t = s[1] << 17;
  s[2] ^= s[0];
  s[3] ^= s[1];
  s[1] ^= s[2];
  s[0] ^= s[3];
  s[2] ^= t;
  s[3] = rotl(s[3], 45);
  return result;
}

double RngStream::uniform() {
  // 53-bit mantissa, shifted off both endpoints.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

long RngStream::poisson(double mean) {
  if (!(mean >= 0.0)) throw std::domain_error("poisson: mean must be >= 0");
  long total = 0;
  // Poisson(a+b) = Poisson(a) + Poisson(b) for independent summands; chunk
  // so exp(-mean) stays comfortably inside normal double range.
  while (mean > 100.0) {
    mean -= 100.0;
    const double u = uniform();
    double p = std::exp(-100.0);
    double cdf = p;
    long k = 0;
    while (u > cdf && k < 1000) {
      ++k;
      p *= 100.0 / static_cast<double>(k);
      cdf += p;
    }
    total += k;
  }
  if (mean == 0.0) return total;
  const double u = uniform();
  double p = std::exp(-mean);
  double cdf = p;
  long k = 0;
  const long cap = static_cast<long>(mean + 12.0 * std::sqrt(mean + 1.0)) + 40;
  while (u > cdf && k < cap) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return total + k;
}

}  // namespace poischan
