#include "doctest.h"

#include <cmath>
#include <vector>

#include "zrp/rng.hpp"
#include "zrp/stats.hpp"

using namespace zrp;

TEST_CASE("ecdf basics") {
  Ecdf e({3.0, 1.0, 2.0});
  CHECK(e.at(0.5) == 0.0);
  CHECK(e.at(1.0) == doctest::Approx(1.0 / 3.0));
  CHECK(e.at(2.5) == doctest::Approx(2.0 / 3.0));
  CHECK(e.at(3.0) == 1.0);
}

TEST_CASE("ks of quantile samples is at most 1/n") {
  // samples at i/n quantiles of the uniform law
  const int n = 50;
  std::vector<double> xs;
  for (int i = 1; i <= n; ++i) xs.push_back(static_cast<double>(i) / n);
  Ecdf e(xs);
  const double d = ks_distance(e, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(d <= 1.0 / n + 1e-12);
}

TEST_CASE("single sample at the median gives 0.5") {
  Ecdf e({0.0});
  const double d = ks_distance(e, [](double x) { return x < 0.0 ? 0.25 : 0.5; });
  CHECK(d == doctest::Approx(0.5));
}

TEST_CASE("degenerate cdf against its own point mass") {
  Ecdf e(std::vector<double>(10, 2.0));
  const double d = ks_distance(e, [](double x) { return x >= 2.0 ? 1.0 : 0.0; });
  CHECK(d == doctest::Approx(0.0));
}

TEST_CASE("ties are handled with both one-sided gaps") {
  Ecdf e({1.0, 1.0, 2.0, 2.0});
  // F jumps 0 -> 0.5 at 1 and 0.5 -> 1 at 2
  const double d = ks_distance(e, [](double x) {
    if (x < 1.0) return 0.0;
    if (x < 2.0) return 0.5;
    return 1.0;
  });
  CHECK(d == doctest::Approx(0.0));
}

TEST_CASE("mean and standard error") {
  const auto ms = mean_se({1.0, 2.0, 3.0, 4.0});
  CHECK(ms.mean == doctest::Approx(2.5));
  CHECK(ms.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(mean_se({}).n == 0);
}

TEST_CASE("proportion standard error shrinks as 1/sqrt(N)") {
  Rng rng(77, 0, StreamTag::scratch);
  std::vector<double> ses;
  for (int n : {500, 2000, 8000}) {
    std::int64_t hits = 0;
    for (int i = 0; i < n; ++i)
      if (rng.uniform_pos() <= 2.0 / 3.0) ++hits;
    ses.push_back(proportion_se(hits, n).se);
  }
  // each step quadruples N, so the SE should halve, within 20%
  CHECK(std::abs(ses[0] / ses[1] - 2.0) < 0.4);
  CHECK(std::abs(ses[1] / ses[2] - 2.0) < 0.4);
}
