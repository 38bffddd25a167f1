#include "doctest.h"

#include <cmath>
#include <vector>

#include "zrp/rng.hpp"

using namespace zrp;

TEST_CASE("same seed, replica and tag replay bit-identically") {
  Rng a(42, 7, StreamTag::events);
  Rng b(42, 7, StreamTag::events);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("substreams differ across replica and tag") {
  Rng a(42, 0, StreamTag::events);
  Rng b(42, 1, StreamTag::events);
  Rng c(42, 0, StreamTag::init_condition);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const auto x = a.next_u64();
    if (x == b.next_u64()) ++same_ab;
    if (x == c.next_u64()) ++same_ac;
  }
  CHECK(same_ab == 0);
  CHECK(same_ac == 0);
}

TEST_CASE("uniform ranges") {
  Rng r(1, 0, StreamTag::scratch);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform_pos();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
    const double v = r.uniform_idx();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("below stays in range and covers endpoints") {
  Rng r(3, 0, StreamTag::scratch);
  bool saw_zero = false, saw_last = false;
  for (int i = 0; i < 100000; ++i) {
    const auto k = r.below(7);
    CHECK(k < 7);
    if (k == 0) saw_zero = true;
    if (k == 6) saw_last = true;
  }
  CHECK(saw_zero);
  CHECK(saw_last);
}

TEST_CASE("exponential gaps have the requested mean") {
  Rng r(5, 0, StreamTag::scratch);
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += r.exponential(2.0);
  const double mean = sum / n;
  CHECK(std::abs(mean - 0.5) < 3.0 * 0.5 / std::sqrt(static_cast<double>(n)));
}

// Frozen outputs: any change to the generator or the substream derivation is
// a reproducibility break and must show up here.
TEST_CASE("generator output is stable") {
  Rng r(123456789, 3, StreamTag::events);
  std::vector<std::uint64_t> got;
  for (int i = 0; i < 4; ++i) got.push_back(r.next_u64());
  const std::vector<std::uint64_t> want = {
      17691227250435262060ULL,
      4409264142690344641ULL,
      7193789888694277064ULL,
      2480699466877375514ULL,
  };
  CHECK(got == want);
}
