#pragma once

#include <cstdint>
#include <cmath>

namespace zrp {

// Stream tags keep the draws used for initial-condition sampling separate
// from the draws that drive the event clocks, so the realized event sequence
// of a replica does not depend on how many samples the initial condition
// consumed.
enum class StreamTag : std::uint64_t {
  init_condition = 1,
  events = 2,
  scratch = 3,
};

inline constexpr const char* kPrngId = "xoshiro256** / splitmix64 substreams, v1";

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// Counter-free generator with cheap substream derivation: the (seed, replica,
// tag) triple is hashed into the four state words. Output sequence is fixed
// by the algorithm, independent of platform and standard library.
class Rng {
 public:
  Rng() : Rng(0, 0, StreamTag::scratch) {}

  Rng(std::uint64_t seed, std::uint64_t replica, StreamTag tag) {
    std::uint64_t h = seed;
    h ^= 0x9E3779B97F4A7C15ULL * (replica + 1);
    h ^= 0xD1B54A32D192ED03ULL * (static_cast<std::uint64_t>(tag) + 1);
    for (auto& w : state_) w = detail::splitmix64(h);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // Uniform on (0, 1]: marks compared against a rate ratio must never be 0
  // (an empty site has ratio 0 and must never fire) and p = 1 must always
  // win a "mark <= p" test.
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform on [0, 1): safe for index scaling.
  double uniform_idx() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform_idx() * static_cast<double>(n));
  }

 private:
  std::uint64_t state_[4];
};

}  // namespace zrp
