#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "zrp/core.hpp"
#include "zrp/error.hpp"
#include "zrp/measures.hpp"

namespace zrp {

// ---------------------------------------------------------------------------
// Macroscopic flux F(rho) = (p-q) * gtilde(rho) with numeric derivative and
// inverse-derivative. Works for any table-defined rate function; the
// constant-rate closed forms are test oracles, not the implementation path.

class Flux {
 public:
  Flux(RateFunction g, AsymmetryParams asym) : g_(std::move(g)), asym_(asym) {
    concave_ = check_concavity();
  }

  const RateFunction& rate() const { return g_; }
  const AsymmetryParams& asym() const { return asym_; }

  // sup_rho gtilde(rho); for a bounded nondecreasing table this is gmax.
  double ell() const { return g_.gmax(); }

  double value(const Density& rho) const {
    if (rho.infinite) return asym_.drift() * ell();
    return asym_.drift() * density_to_fugacity(g_, rho.value);
  }
  double value(double rho) const { return value(Density::finite(rho)); }

  double derivative(double rho) const {
    if (!(rho >= 0.0)) fail(Errc::out_of_range, "F' needs rho >= 0");
    const double h = 1e-6 * std::max(1.0, rho);
    if (rho < h) return (value(rho + h) - value(rho)) / h;
    return (value(rho + h) - value(rho - h)) / (2.0 * h);
  }

  // F'(infinity) = 0: the fugacity flattens at its supremum.
  double derivative_at_zero() const { return derivative(0.0); }

  // Inverse of the decreasing map rho -> F'(rho), for v in (0, F'(0)].
  double derivative_inverse(double v) const {
    const double f0 = derivative_at_zero();
    if (!(v > 0.0) || v > f0 * (1.0 + 1e-9))
      fail(Errc::out_of_range, "(F')^{-1} defined on (0, F'(0)]");
    if (v >= f0) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (derivative(hi) > v) {
      hi *= 2.0;
      if (hi > 1e12) fail(Errc::out_of_range, "(F')^{-1}: no finite preimage");
    }
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double d = derivative(mid);
      if (std::abs(d - v) <= 1e-12 && i > 40) return mid;
      (d > v ? lo : hi) = mid;
      if (hi - lo < 1e-14 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
  }

  // Fan formulas presume a concave flux; checked on a grid at construction.
  bool concave() const { return concave_; }

 private:
  bool check_concavity() const {
    double prev = 0.0, cur = 0.0;
    bool first = true;
    for (double rho = 0.125; rho <= 64.0; rho *= 2.0) {
      cur = derivative(rho);
      if (!first && cur > prev + 1e-9) return false;
      prev = cur;
      first = false;
    }
    return true;
  }

  RateFunction g_;
  AsymmetryParams asym_;
  bool concave_ = true;
};

// ---------------------------------------------------------------------------
// Entropy solution of d_t rho + d_u F(rho) = 0 for decreasing step data.

class EntropySolution {
 public:
  EntropySolution(Density rho_left, Density rho_right, std::shared_ptr<const Flux> flux)
      : left_(rho_left), right_(rho_right), flux_(std::move(flux)) {
    if (!left_.infinite && right_.infinite)
      fail(Errc::invalid_config, "step must decrease left to right");
    if (!left_.infinite && !(left_.value > right_.value))
      fail(Errc::invalid_config, "step must decrease left to right");
    left_speed_ = left_.infinite ? 0.0 : flux_->derivative(left_.value);
    right_speed_ = flux_->derivative(right_.value);
  }

  Density rho_left() const { return left_; }
  Density rho_right() const { return right_; }
  const Flux& flux() const { return *flux_; }

  // Characteristic through u with initial density rho0.
  double characteristic(double rho0, double t, double u) const {
    return u + flux_->derivative(rho0) * t;
  }

  Density at(double t, double u) const {
    if (!(t > 0.0)) fail(Errc::invalid_config, "entropy solution needs t > 0");
    if (u <= left_speed_ * t) return left_;
    if (u >= right_speed_ * t) return right_;
    return Density::finite(flux_->derivative_inverse(u / t));
  }

  double fan_left_speed() const { return left_speed_; }
  double fan_right_speed() const { return right_speed_; }

 private:
  Density left_, right_;
  std::shared_ptr<const Flux> flux_;
  double left_speed_ = 0.0, right_speed_ = 0.0;
};

inline EntropySolution make_entropy_solution(const RateFunction& g, AsymmetryParams asym,
                                             Density rho_left, Density rho_right) {
  return EntropySolution(rho_left, rho_right, std::make_shared<Flux>(g, asym));
}

// ---------------------------------------------------------------------------
// Limiting laws

// Law of the asymptotic speed X of the tracked second-class particle started
// in front of a reservoir: F_X(u) = 1 - F(rho(1,u)) / (p * ell) on [0, p-q],
// right-continuous with an atom q/p at 0 for partial asymmetry.
class SpeedLaw {
 public:
  SpeedLaw(RateFunction g, AsymmetryParams asym)
      : flux_(std::make_shared<Flux>(std::move(g), asym)),
        solution_(Density::inf(), Density::finite(0.0), flux_) {}

  double support_max() const { return flux_->asym().drift(); }

  double cdf(double u) const {
    const auto& a = flux_->asym();
    if (u < 0.0 || u > support_max() + 1e-12) fail(Errc::out_of_support, "speed law on [0, p-q]");
    if (u >= support_max()) return 1.0;
    const Density rho = solution_.at(1.0, std::max(u, 0.0));
    return 1.0 - flux_->value(rho) / (a.p * flux_->ell());
  }

  // P(X = 0): weight of the trapped-at-the-reservoir event.
  double atom_at_zero() const { return flux_->asym().q / flux_->asym().p; }

  // CDF of X conditioned on X > 0.
  double cdf_untrapped(double u) const {
    const double a0 = atom_at_zero();
    return (cdf(u) - a0) / (1.0 - a0);
  }

  const Flux& flux() const { return *flux_; }
  const EntropySolution& solution() const { return solution_; }

 private:
  std::shared_ptr<Flux> flux_;
  EntropySolution solution_;
};

// Law of the limiting crossing current J = F((F')^{-1}(X)) - (F')^{-1}(X) X,
// X distributed by the speed law. Defined for total asymmetry only; the
// partial case diverges.
class CurrentLaw {
 public:
  CurrentLaw(RateFunction g, AsymmetryParams asym) : speed_(std::move(g), asym) {
    if (!asym.totally()) fail(Errc::partial_asymmetry, "crossing current diverges for p != 1");
  }

  // The transform x -> F((F')^{-1}(x)) - (F')^{-1}(x) x, decreasing on (0, p-q].
  double transform(double x) const {
    const Flux& f = speed_.flux();
    if (x < 0.0 || x > speed_.support_max() + 1e-12)
      fail(Errc::out_of_support, "transform on [0, p-q]");
    if (x >= speed_.support_max()) return 0.0;
    if (x <= 0.0) return f.value(Density::inf());
    const double rho = f.derivative_inverse(x);
    return f.value(rho) - rho * x;
  }

  double support_max() const { return transform(0.0); }

  double cdf(double v) const {
    if (v < 0.0 || v > support_max() + 1e-12)
      fail(Errc::out_of_support, "current law support");
    if (v >= support_max()) return 1.0;
    if (v <= 0.0) return 0.0;
    // P(transform(X) <= v) = 1 - F_X(transform^{-1}(v)); X has no atom here.
    double lo = 0.0, hi = speed_.support_max();
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (transform(mid) > v ? lo : hi) = mid;
    }
    return 1.0 - speed_.cdf(0.5 * (lo + hi));
  }

 private:
  SpeedLaw speed_;
};

// Laws for the constant-rate process from a general decreasing step
// mu_{rho,lambda}: speed ((1+U)/2)^2 and current ((1-U)/2)^2 with U uniform
// on [(1-rho)/(1+rho), (1-lambda)/(1+lambda)].
class DualStepLaw {
 public:
  DualStepLaw(Density rho, double lambda) {
    a_ = rho.infinite ? -1.0 : (1.0 - rho.value) / (1.0 + rho.value);
    b_ = (1.0 - lambda) / (1.0 + lambda);
    if (!(a_ < b_)) fail(Errc::invalid_config, "uniform support is empty");
  }

  double speed_cdf(double u) const {
    if (u < 0.0) return 0.0;
    const double s = 2.0 * std::sqrt(u) - 1.0;  // P(((1+U)/2)^2 <= u) = P(U <= s)
    return std::clamp((s - a_) / (b_ - a_), 0.0, 1.0);
  }

  double current_cdf(double v) const {
    if (v < 0.0) return 0.0;
    const double s = 1.0 - 2.0 * std::sqrt(v);  // P(((1-U)/2)^2 <= v) = P(U >= s)
    return std::clamp((b_ - s) / (b_ - a_), 0.0, 1.0);
  }

  double speed_min() const { return ((1.0 + a_) / 2.0) * ((1.0 + a_) / 2.0); }
  double speed_max() const { return ((1.0 + b_) / 2.0) * ((1.0 + b_) / 2.0); }

 private:
  double a_ = -1.0, b_ = 1.0;
};

// ---------------------------------------------------------------------------
// Targets for the joint-occupation experiment (constant rate, p = 1).

// Weighted sum of joint tail probabilities of the labelled second-class
// particles converges to the fan density rho(1, u).
inline double weighted_sum_target(Density rho, double u, AsymmetryParams asym) {
  if (!asym.totally()) fail(Errc::partial_asymmetry, "target defined for p = 1 only");
  const double lo_support = rho.infinite ? 0.0 : 1.0 / ((1.0 + rho.value) * (1.0 + rho.value));
  if (u < lo_support - 1e-12 || u > 1.0 + 1e-12)
    fail(Errc::out_of_support, "u outside the target support");
  auto sol = make_entropy_solution(RateFunction::constant_rate(), asym, rho, Density::finite(0.0));
  const Density d = sol.at(1.0, std::clamp(u, lo_support, 1.0));
  if (d.infinite) fail(Errc::out_of_support, "fan density infinite at u = 0");
  return d.value;
}

// Single-particle tail: lim P(X_2^1(t) >= u t) = ((1+rho)/rho)(1 - sqrt(u)).
inline double tail_prob_target(Density rho, double u) {
  const double lo_support = rho.infinite ? 0.0 : 1.0 / ((1.0 + rho.value) * (1.0 + rho.value));
  if (u < lo_support - 1e-12 || u > 1.0 + 1e-12)
    fail(Errc::out_of_support, "u outside the target support");
  const double scale = rho.infinite ? 1.0 : (1.0 + rho.value) / rho.value;
  return scale * (1.0 - std::sqrt(std::clamp(u, 0.0, 1.0)));
}

}  // namespace zrp
