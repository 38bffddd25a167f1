#include "doctest.h"

#include <cmath>
#include <vector>

#include "zrp/core.hpp"
#include "zrp/measures.hpp"

using namespace zrp;

namespace {

// Independent series oracle: raw summation of phi^k / g(k)! with many terms.
struct BruteSeries {
  double z = 0.0, r = 0.0;
};

BruteSeries brute_series(const RateFunction& g, double phi, int terms = 400) {
  BruteSeries out;
  double term = 1.0;
  for (int k = 0; k <= terms; ++k) {
    if (k > 0) term *= phi / g.at_count(k);
    out.z += term;
    out.r += k * term;
  }
  out.r /= out.z;
  return out;
}

}  // namespace

TEST_CASE("partition function against raw summation") {
  const auto unit = RateFunction::constant_rate();
  const auto got = partition_function(unit, 0.5);
  const auto want = brute_series(unit, 0.5);
  CHECK(got.z == doctest::Approx(want.z).epsilon(1e-12));
  CHECK(got.z == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(got.r == doctest::Approx(want.r).epsilon(1e-12));
  CHECK(got.r == doctest::Approx(1.0).epsilon(1e-12));

  const auto g = RateFunction::validate({0.5, 1.0});
  const auto got2 = partition_function(g, 0.7);
  const auto want2 = brute_series(g, 0.7);
  CHECK(got2.z == doctest::Approx(want2.z).epsilon(1e-12));
  CHECK(got2.r == doctest::Approx(want2.r).epsilon(1e-12));
}

TEST_CASE("partition function limits and divergence") {
  const auto unit = RateFunction::constant_rate();
  const auto tiny = partition_function(unit, 1e-12);
  CHECK(tiny.z == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(tiny.r < 1e-11);
  CHECK_THROWS_AS(partition_function(unit, 1.0), Error);
  CHECK_THROWS_AS(partition_function(RateFunction::validate({0.5, 1.0}), 1.5), Error);
}

TEST_CASE("fugacity of density: constant-rate closed form") {
  const auto unit = RateFunction::constant_rate();
  CHECK(fugacity_of_density(unit, 1.0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(fugacity_of_density(unit, 3.0) == doctest::Approx(0.75).epsilon(1e-10));
  CHECK(fugacity_of_density(unit, 0.0) == 0.0);
}

TEST_CASE("fugacity of density: two-entry table closed form") {
  // Z = (1+phi)/(1-phi), R = 2 phi/(1-phi^2) for g = [0.5, 1.0]; the inverse
  // solves rho phi^2 + 2 phi - rho = 0.
  const auto g = RateFunction::validate({0.5, 1.0});
  for (double rho : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
    const double want = (std::sqrt(1.0 + rho * rho) - 1.0) / rho;
    CHECK(fugacity_of_density(g, rho) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("density inversion residual stays below 1e-10") {
  for (const auto& g : {RateFunction::constant_rate(), RateFunction::validate({0.5, 1.0}),
                        RateFunction::validate({0.25, 0.5, 0.5, 2.0})}) {
    for (double rho : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
      const double phi = fugacity_of_density(g, rho);
      CHECK(std::abs(mean_density(g, phi) - rho) <= 1e-10);
    }
  }
}

TEST_CASE("mean density is strictly increasing in the fugacity") {
  const auto g = RateFunction::validate({0.5, 1.0});
  double prev = 0.0;
  for (double phi = 0.05; phi < 1.0; phi += 0.05) {
    const double r = mean_density(g, std::min(phi, 0.999));
    CHECK(r > prev);
    prev = r;
  }
}

TEST_CASE("the fugacity saturates at gmax as the density grows") {
  for (const auto& g : {RateFunction::constant_rate(), RateFunction::validate({0.5, 1.0})}) {
    CHECK(std::abs(fugacity_of_density(g, 1e4) - g.gmax()) < 1e-3);
  }
}

TEST_CASE("site sampler matches the geometric law for constant rate") {
  const auto unit = RateFunction::constant_rate();
  const double phi = 0.5;  // density 1
  SiteSampler sampler(unit, phi);
  Rng rng(2024, 0, StreamTag::init_condition);

  const int n = 100000;
  std::vector<std::int64_t> counts(21, 0);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto k = sampler.sample(rng);
    sum += static_cast<double>(k);
    if (k < 20)
      ++counts[static_cast<std::size_t>(k)];
    else
      ++counts[20];
  }

  // mean within 3 sigma of rho = 1 (variance rho(1+rho) = 2)
  CHECK(std::abs(sum / n - 1.0) < 3.0 * std::sqrt(2.0 / n));

  // chi-square over the first 20 atoms plus the lumped tail, df = 20,
  // significance 1e-3 -> critical value 45.31
  double chi2 = 0.0;
  for (int k = 0; k <= 20; ++k) {
    const double p = k < 20 ? 0.5 * std::pow(0.5, k) : std::pow(0.5, 20);
    const double expected = p * n;
    const double diff = static_cast<double>(counts[static_cast<std::size_t>(k)]) - expected;
    chi2 += diff * diff / expected;
  }
  CHECK(chi2 < 45.31);
}

TEST_CASE("site sampler degenerates at zero fugacity") {
  const auto unit = RateFunction::constant_rate();
  Rng rng(7, 0, StreamTag::init_condition);
  SiteSampler sampler(unit, 0.0);
  for (int i = 0; i < 100; ++i) CHECK(sampler.sample(rng) == 0);
}

TEST_CASE("initial conditions: deterministic layouts") {
  const auto unit = RateFunction::constant_rate();
  Rng rng(11, 0, StreamTag::init_condition);

  const auto star = sample_initial(InitialCondition::make_xi_star(), unit, {-3, 5}, rng);
  for (std::int64_t x = -3; x < 0; ++x) CHECK(star.occupancy(x).is_infinite());
  CHECK(star.site(0).classed.size() == 1);
  CHECK(star.site(0).classed.front().klass == 2);
  for (std::int64_t x = 1; x <= 5; ++x) CHECK(star.occupancy(x).count() == 0);
  CHECK(star.left_policy == EdgePolicy::exact_infinite);
  CHECK(star.right_policy == EdgePolicy::guarded);

  const auto third = sample_initial(InitialCondition::make_xi_star_third(), unit, {-3, 5}, rng);
  CHECK(third.site(1).classed.front().klass == 3);

  const auto empty = sample_initial(
      InitialCondition::make_product_zr(Density::finite(0.0), 0.0), unit, {-3, 5}, rng);
  for (std::int64_t x = -3; x <= 5; ++x) CHECK(empty.occupancy(x).count() == 0);

  const auto block = sample_initial(InitialCondition::make_bernoulli_ex(1.0, 0.0), unit, {-3, 5}, rng);
  for (std::int64_t x = -3; x < 0; ++x) CHECK(block.occupancy(x).count() == 1);
  for (std::int64_t x = 0; x <= 5; ++x) CHECK(block.occupancy(x).count() == 0);

  const auto burst = sample_initial(InitialCondition::make_burst(Density::inf(), 3), unit, {-2, 4}, rng);
  CHECK(burst.occupancy(-1).is_infinite());
  CHECK(burst.site(0).classed.size() == 3);
  CHECK(burst.site(0).classed[0].label == 1);
  CHECK(burst.site(0).classed[2].label == 3);

  CHECK_THROWS_AS(sample_initial(InitialCondition::make_xi_star(), unit, {0, 5}, rng), Error);
}

TEST_CASE("initial conditions: empirical site means within 3 sigma") {
  const auto unit = RateFunction::constant_rate();
  Rng rng(12345, 0, StreamTag::init_condition);
  const std::int32_t half = 4000;
  const auto cfg = sample_initial(
      InitialCondition::make_product_zr(Density::finite(1.0), 0.25), unit, {-half, half}, rng);
  double left_sum = 0.0, right_sum = 0.0;
  for (std::int64_t x = -half; x < 0; ++x) left_sum += static_cast<double>(cfg.occupancy(x).count());
  for (std::int64_t x = 0; x <= half; ++x) right_sum += static_cast<double>(cfg.occupancy(x).count());
  const double left_mean = left_sum / half;
  const double right_mean = right_sum / (half + 1);
  CHECK(std::abs(left_mean - 1.0) < 3.0 * std::sqrt(2.0 / half));          // var 2
  CHECK(std::abs(right_mean - 0.25) < 3.0 * std::sqrt(0.3125 / half));     // var 0.3125
}

TEST_CASE("step profiles") {
  const auto p1 = profile_of(InitialCondition::make_product_zr(Density::inf(), 0.0));
  CHECK(p1.left.infinite);
  CHECK(p1.right.value == 0.0);

  const auto p2 = profile_of(InitialCondition::make_product_zr(Density::finite(1.0), 0.0));
  CHECK(p2.left.value == 1.0);

  const auto p3 = profile_of(InitialCondition::make_bernoulli_ex(0.8, 0.1));
  CHECK(p3.left.value == 0.8);
  CHECK(p3.right.value == 0.1);

  const auto p4 = profile_of(InitialCondition::make_xi_star());
  CHECK(p4.left.infinite);
}
