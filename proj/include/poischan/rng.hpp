#pragma once

#include <array>
#include <cstdint>

namespace poischan {

// Splittable deterministic RNG. A stream is identified by a 64-bit key;
// substream(i) derives a new stream from (key, i) without touching the
// parent state, so replicates and grid cells can be sampled independently
// and reproducibly regardless of evaluation order.
//
// Sampling is hand-rolled (xoshiro256++ core, Box-Muller normals, inversion
// Poisson) so that identical seeds give identical draws on every platform;
// the standard library distributions do not guarantee that.
class RngStream {
public:
  explicit RngStream(std::uint64_t key);

  RngStream substream(std::uint64_t index) const;
  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64();
  double uniform();             // open interval (0,1)
  double normal();              // N(0,1), consumes exactly two uniforms
  long poisson(double mean);    // mean >= 0; inversion, chunked for large means

private:
  std::uint64_t key_;
  std::array<std::uint64_t, 4> state_;
};

// splitmix64 finalizer, used for key derivation.
std::uint64_t mix64(std::uint64_t z);

}  // namespace poischan
