#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "zrp/core.hpp"
#include "zrp/error.hpp"
#include "zrp/rng.hpp"

namespace zrp {

// ---------------------------------------------------------------------------
// Density value that can be a genuine infinity (reservoir side of a step).

struct Density {
  double value = 0.0;
  bool infinite = false;

  static Density finite(double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail(Errc::invalid_config, "density must be finite >= 0");
    return Density{v, false};
  }
  static Density inf() { return Density{0.0, true}; }

  bool is_zero() const { return !infinite && value == 0.0; }
  friend bool operator==(const Density& a, const Density& b) {
    return a.infinite == b.infinite && (a.infinite || a.value == b.value);
  }
};

// ---------------------------------------------------------------------------
// Fugacity calculus: Z(phi) = sum_k phi^k / g(k)!, R(phi) = E[occupancy].

struct PartitionData {
  double z = 1.0;
  double r = 0.0;
  std::int64_t truncation_k = 0;
};

namespace detail {

struct SeriesMoments {
  double z = 1.0;
  double m1 = 0.0;  // sum k w_k / Z
  double m2 = 0.0;  // sum k^2 w_k / Z
  std::int64_t truncation_k = 0;
};

// Series summation with the geometric tail bound: past the rate table the
// term ratio is exactly phi/gmax, so the neglected mass of the series is
// bounded in closed form and summation stops once it is below eps_tail.
inline SeriesMoments series_moments(const RateFunction& g, double phi, double eps_tail) {
  if (!(phi >= 0.0)) fail(Errc::invalid_config, "fugacity must be >= 0");
  if (phi >= g.gmax()) fail(Errc::divergent, "Z diverges for phi >= gmax");
  SeriesMoments out;
  if (phi == 0.0) return out;

  const double ratio = phi / g.gmax();
  double term = 1.0;  // phi^k / g(k)!
  double z = 1.0, r = 0.0, r2 = 0.0;
  std::int64_t k = 0;
  while (true) {
    ++k;
    term *= phi / g.at_count(k);
    const auto kd = static_cast<double>(k);
    z += term;
    r += term * kd;
    r2 += term * kd * kd;
    if (k >= static_cast<std::int64_t>(g.table_size())) {
      // sum_{j>=1} (k+j)^2 term ratio^j <= term * (k + geo-series corrections)
      const double geo = ratio / (1.0 - ratio);
      const double geo2 = ratio / ((1.0 - ratio) * (1.0 - ratio));
      const double geo3 = ratio * (1.0 + ratio) / ((1.0 - ratio) * (1.0 - ratio) * (1.0 - ratio));
      const double tail_z = term * geo;
      const double tail_r = term * (kd * geo + geo2);
      const double tail_r2 = term * (kd * kd * geo + 2.0 * kd * geo2 + geo3);
      if (tail_z < eps_tail * z && tail_r < eps_tail * std::max(r, 1.0) &&
          tail_r2 < eps_tail * std::max(r2, 1.0))
        break;
    }
    if (k > 100000000) fail(Errc::divergent, "partition series failed to converge");
  }
  out.z = z;
  out.m1 = r / z;
  out.m2 = r2 / z;
  out.truncation_k = k;
  return out;
}

}  // namespace detail

inline PartitionData partition_function(const RateFunction& g, double phi,
                                        double eps_tail = 1e-12) {
  const auto m = detail::series_moments(g, phi, eps_tail);
  return PartitionData{m.z, m.m1, m.truncation_k};
}

inline double mean_density(const RateFunction& g, double phi) {
  return partition_function(g, phi).r;
}

// Inverse of R; R is a strictly increasing bijection from [0, gmax) onto
// [0, inf). Newton steps (R' = Var/phi) inside a bisection bracket converge
// to machine precision, well inside the 1e-10 residual contract.
inline double fugacity_of_density(const RateFunction& g, double rho) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) fail(Errc::invalid_config, "density must be finite >= 0");
  if (rho == 0.0) return 0.0;
  double lo = 0.0;
  double hi = g.gmax() * (1.0 - 1.0 / 1024.0);
  while (mean_density(g, hi) < rho) {
    hi = g.gmax() - (g.gmax() - hi) * 0.5;
    if (g.gmax() - hi < 1e-12 * g.gmax())
      fail(Errc::divergent, "density unreachable at representable fugacities");
  }
  double phi = std::min(hi, g.gmax() * rho / (1.0 + rho));
  for (int i = 0; i < 100; ++i) {
    const auto m = detail::series_moments(g, phi, 1e-16);
    const double resid = m.m1 - rho;
    if (resid > 0.0) hi = phi; else lo = phi;
    if (std::abs(resid) <= 1e-13 * std::max(1.0, rho) || hi - lo <= 1e-17 * hi) break;
    const double slope = (m.m2 - m.m1 * m.m1) / phi;  // R'(phi)
    double next = phi - resid / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    phi = next;
  }
  return phi;
}

// Shorthand used by the flux: g-tilde(rho) = fugacity at density rho.
inline double density_to_fugacity(const RateFunction& g, double rho) {
  return fugacity_of_density(g, rho);
}

// ---------------------------------------------------------------------------
// Site-marginal sampler for mu_phi via inverse CDF over the truncated series.

class SiteSampler {
 public:
  SiteSampler(const RateFunction& g, double phi, double eps_tail = 1e-12) {
    if (!(phi >= 0.0)) fail(Errc::invalid_config, "fugacity must be >= 0");
    if (phi >= g.gmax()) fail(Errc::divergent, "mu_phi undefined for phi >= gmax");
    const double ratio = phi / g.gmax();
    double term = 1.0;
    std::vector<double> weights{1.0};
    std::int64_t k = 0;
    while (phi > 0.0) {
      ++k;
      term *= phi / g.at_count(k);
      weights.push_back(term);
      if (k >= static_cast<std::int64_t>(g.table_size()) &&
          term * ratio / (1.0 - ratio) < eps_tail)
        break;
    }
    double total = 0.0;
    for (double w : weights) total += w;
    cdf_.reserve(weights.size());
    double acc = 0.0;
    for (double w : weights) {
      acc += w / total;
      cdf_.push_back(acc);
    }
    cdf_.back() = 1.0;
  }

  std::int64_t sample(Rng& rng) const {
    const double u = rng.uniform_pos();
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::int64_t>(it - cdf_.begin());
  }

  std::size_t support_size() const { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
};

inline std::int64_t sample_site(const RateFunction& g, double phi, Rng& rng) {
  return SiteSampler(g, phi).sample(rng);
}

// ---------------------------------------------------------------------------
// Initial conditions

struct InitialCondition {
  enum class Kind {
    product_zr,           // mu_{rho,lambda}: rho on x<0, lambda on x>=0
    bernoulli_ex,         // nu_{alpha,beta} exclusion step
    xi_star,              // reservoirs on x<0, one second-class at 0
    xi_star_third,        // xi_star plus a third-class particle at 1
    origin_second_burst,  // mu_{rho,0} plus K second-class particles at 0
  };

  Kind kind = Kind::xi_star;
  Density rho = Density::inf();   // left density (product_zr / burst)
  double lambda = 0.0;            // right density (product_zr)
  double alpha = 0.0, beta = 0.0; // exclusion step densities
  std::int32_t burst_count = 1;   // labels 1..K, bottom to top

  static InitialCondition make_xi_star() { return InitialCondition{}; }
  static InitialCondition make_xi_star_third() {
    InitialCondition ic;
    ic.kind = Kind::xi_star_third;
    return ic;
  }
  static InitialCondition make_product_zr(Density rho, double lambda) {
    InitialCondition ic;
    ic.kind = Kind::product_zr;
    ic.rho = rho;
    ic.lambda = lambda;
    return ic;
  }
  static InitialCondition make_bernoulli_ex(double alpha, double beta) {
    InitialCondition ic;
    ic.kind = Kind::bernoulli_ex;
    ic.alpha = alpha;
    ic.beta = beta;
    return ic;
  }
  static InitialCondition make_burst(Density rho, std::int32_t count) {
    InitialCondition ic;
    ic.kind = Kind::origin_second_burst;
    ic.rho = rho;
    ic.burst_count = count;
    return ic;
  }
};

struct StepProfile {
  Density left;
  Density right;
};

inline StepProfile profile_of(const InitialCondition& ic) {
  using K = InitialCondition::Kind;
  switch (ic.kind) {
    case K::product_zr:
      return {ic.rho, Density::finite(ic.lambda)};
    case K::bernoulli_ex:
      return {Density::finite(ic.alpha), Density::finite(ic.beta)};
    case K::xi_star:
    case K::xi_star_third:
      return {Density::inf(), Density::finite(0.0)};
    case K::origin_second_burst:
      return {ic.rho, Density::finite(0.0)};
  }
  fail(Errc::not_a_step, "initial condition has no step profile");
}

struct WindowSpec {
  std::int32_t left = 0;
  std::int32_t right = 0;
  bool track_fc = false;
};

// Margin of the simulated window: nearest-neighbour jumps under rate-gmax
// clocks stay within a Poisson light cone, so v*t plus `sigmas` standard
// deviations shields the observables from the missing outside world.
inline std::int32_t window_margin(double gmax, double t_end, double sigmas = 8.0) {
  const double vt = gmax * t_end;
  return static_cast<std::int32_t>(std::ceil(vt + sigmas * std::sqrt(vt + 10.0)));
}

// Window and edge policies appropriate for an initial condition: sides backed
// by a reservoir are exact and need no room, empty sides are guarded, busy
// finite sides rely on the margin.
inline WindowSpec default_window(const InitialCondition& ic, const RateFunction& g, double t_end,
                                 double sigmas = 8.0, bool track_fc = false) {
  const std::int32_t m = window_margin(g.gmax(), t_end, sigmas);
  const StepProfile prof = profile_of(ic);
  WindowSpec w;
  w.right = m + 2;
  w.left = prof.left.infinite ? -1 : -(m + 2);
  w.track_fc = track_fc;
  return w;
}

inline EdgePolicy edge_policy_for(const Density& d) {
  if (d.infinite) return EdgePolicy::exact_infinite;
  if (d.is_zero()) return EdgePolicy::guarded;
  return EdgePolicy::open;
}

inline Configuration sample_initial(const InitialCondition& ic, const RateFunction& g,
                                    const WindowSpec& w, Rng& rng) {
  using K = InitialCondition::Kind;
  if (w.left > 0 || w.right < 1) fail(Errc::window_too_small, "window must cover sites 0 and 1");
  if (profile_of(ic).left.infinite && w.left >= 0)
    fail(Errc::window_too_small, "window must include the reservoir at site -1");

  Configuration cfg(w.left, w.right, w.track_fc);
  const StepProfile prof = profile_of(ic);
  cfg.left_policy = edge_policy_for(prof.left);
  cfg.right_policy = edge_policy_for(prof.right);

  std::int64_t next_tag = 1;
  auto add_fc = [&](std::int64_t x, std::int64_t n) {
    for (std::int64_t i = 0; i < n; ++i) {
      if (w.track_fc)
        cfg.add_tagged_first_class(x, next_tag++);
      else
        cfg.add_first_class(x, 1);
    }
  };

  switch (ic.kind) {
    case K::product_zr:
    case K::origin_second_burst: {
      const double lam = ic.kind == K::product_zr ? ic.lambda : 0.0;
      if (ic.rho.infinite) {
        for (std::int64_t x = w.left; x < 0; ++x) cfg.set_infinite(x);
      } else if (ic.rho.value > 0.0) {
        SiteSampler left_sampler(g, fugacity_of_density(g, ic.rho.value));
        for (std::int64_t x = w.left; x < 0; ++x) add_fc(x, left_sampler.sample(rng));
      }
      if (lam > 0.0) {
        SiteSampler right_sampler(g, fugacity_of_density(g, lam));
        for (std::int64_t x = 0; x <= w.right; ++x) add_fc(x, right_sampler.sample(rng));
      }
      if (ic.kind == K::origin_second_burst)
        for (std::int32_t j = 1; j <= ic.burst_count; ++j) cfg.add_classed(0, 2, j);
      break;
    }
    case K::xi_star:
    case K::xi_star_third: {
      for (std::int64_t x = w.left; x < 0; ++x) cfg.set_infinite(x);
      cfg.add_classed(0, 2, 1);
      if (ic.kind == K::xi_star_third) cfg.add_classed(1, 3, 1);
      break;
    }
    case K::bernoulli_ex: {
      for (std::int64_t x = w.left; x <= w.right; ++x) {
        const double a = x < 0 ? ic.alpha : ic.beta;
        if (a > 0.0 && (a >= 1.0 || rng.uniform_pos() <= a)) add_fc(x, 1);
      }
      break;
    }
  }
  return cfg;
}

}  // namespace zrp
