#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "zrp/error.hpp"

namespace zrp {

// ---------------------------------------------------------------------------
// Jump bias

struct AsymmetryParams {
  double p = 1.0;  // rightward probability
  double q = 0.0;  // leftward probability, q = 1 - p

  static AsymmetryParams with_right_bias(double p) {
    if (!(p > 0.5 && p <= 1.0))
      fail(Errc::invalid_config, "asymmetry requires 1/2 < p <= 1");
    return AsymmetryParams{p, 1.0 - p};
  }

  static AsymmetryParams totally_asymmetric() { return AsymmetryParams{1.0, 0.0}; }

  bool totally() const { return p == 1.0; }
  double drift() const { return p - q; }
};

// ---------------------------------------------------------------------------
// Jump rate g(.)

// Finite nondecreasing rate table with constant tail: g(k) = table[k-1] for
// k <= K and g(k) = g(K) beyond. g(0) = 0 always. The constant tail makes g
// bounded and Lipschitz, and the supremum (used for infinite-occupancy sites
// and for uniformized clocks) equals the last entry.
class RateFunction {
 public:
  static RateFunction validate(std::vector<double> table) {
    if (table.empty()) fail(Errc::invalid_config, "rate table is empty");
    for (std::size_t i = 0; i < table.size(); ++i) {
      const double v = table[i];
      if (!(v > 0.0) || !std::isfinite(v))
        fail(Errc::not_positive, "g(" + std::to_string(i + 1) + ") must be finite and > 0");
      if (i > 0 && v < table[i - 1])
        fail(Errc::not_monotone, "g(" + std::to_string(i + 1) + ") < g(" + std::to_string(i) + ")");
    }
    return RateFunction(std::move(table));
  }

  // g(k) = 1{k >= 1}
  static RateFunction constant_rate() { return validate({1.0}); }

  double at_count(std::int64_t k) const {
    if (k <= 0) return 0.0;
    const auto n = static_cast<std::int64_t>(values_.size());
    return values_[static_cast<std::size_t>(std::min(k, n) - 1)];
  }

  double gmax() const { return gmax_; }
  std::size_t table_size() const { return values_.size(); }
  const std::vector<double>& table() const { return values_; }

  // g(k)! = prod_{j=1..k} g(j); g(0)! = 1; beyond the table the product grows
  // by factors of gmax.
  double factorial(std::int64_t k) const {
    if (k < 0) fail(Errc::invalid_config, "factorial of negative occupancy");
    const auto n = static_cast<std::int64_t>(values_.size());
    if (k <= n) return factorials_[static_cast<std::size_t>(k)];
    return factorials_.back() * std::pow(gmax_, static_cast<double>(k - n));
  }

  bool is_constant_rate() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 1.0; });
  }

  // Smallest k with level <= g(k), for level in (0, gmax]. Determines the
  // departure slot under shared-mark thinning; slots above the table are in
  // the constant tail.
  std::int64_t slot_for_level(double level) const {
    auto it = std::lower_bound(values_.begin(), values_.end(), level);
    if (it == values_.end()) return static_cast<std::int64_t>(values_.size());
    return static_cast<std::int64_t>(it - values_.begin()) + 1;
  }

 private:
  explicit RateFunction(std::vector<double> table)
      : values_(std::move(table)), gmax_(values_.back()) {
    factorials_.reserve(values_.size() + 1);
    factorials_.push_back(1.0);
    for (double v : values_) factorials_.push_back(factorials_.back() * v);
  }

  std::vector<double> values_;
  std::vector<double> factorials_;  // g(0)! .. g(K)!
  double gmax_;
};

// One rate per line, ascending k from 1; blank lines and '#' comments ignored.
inline RateFunction load_rate_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_failure, "cannot open rate table: " + path);
  std::vector<double> table;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double v;
    if (ss >> v) table.push_back(v);
  }
  if (table.empty()) fail(Errc::io_failure, "rate table has no entries: " + path);
  return RateFunction::validate(std::move(table));
}

// ---------------------------------------------------------------------------
// Site occupancy, possibly an infinite reservoir

class Occupancy {
 public:
  static Occupancy finite(std::int64_t n) {
    if (n < 0) fail(Errc::invalid_config, "negative occupancy");
    return Occupancy(n);
  }
  static Occupancy infinite() { return Occupancy(kInfinite); }

  bool is_infinite() const { return raw_ == kInfinite; }
  std::int64_t count() const {
    if (is_infinite()) fail(Errc::invalid_config, "count() on infinite occupancy");
    return raw_;
  }

  void add_one() {
    if (!is_infinite()) ++raw_;
  }
  void remove_one() {
    if (is_infinite()) return;
    if (raw_ == 0) fail(Errc::empty_site, "removing from empty site");
    --raw_;
  }

  bool operator==(const Occupancy& o) const { return raw_ == o.raw_; }

 private:
  static constexpr std::int64_t kInfinite = -1;
  explicit Occupancy(std::int64_t raw) : raw_(raw) {}
  std::int64_t raw_ = 0;
};

// ---------------------------------------------------------------------------
// Per-site stack

struct ClassedParticle {
  std::int32_t klass;  // >= 2; class 1 mass is held in counts / fifo tags
  std::int64_t label;

  friend bool operator<(const ClassedParticle& a, const ClassedParticle& b) {
    return a.klass != b.klass ? a.klass < b.klass : a.label < b.label;
  }
  friend bool operator==(const ClassedParticle& a, const ClassedParticle& b) {
    return a.klass == b.klass && a.label == b.label;
  }
};

// First-class arrival-order queue; only maintained when tag tracking is on.
class FifoTags {
 public:
  void push_back(std::int64_t tag) { buf_.push_back(tag); }
  std::int64_t pop_front() {
    const std::int64_t tag = buf_[head_++];
    if (head_ > 64 && head_ * 2 > buf_.size()) {
      buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(head_));
      head_ = 0;
    }
    return tag;
  }
  std::size_t size() const { return buf_.size() - head_; }
  bool empty() const { return size() == 0; }
  std::int64_t front() const { return buf_[head_]; }

 private:
  std::vector<std::int64_t> buf_;
  std::size_t head_ = 0;
};

// A site holds its total occupancy plus explicit records for every particle
// of class >= 2, kept sorted by (class, label). On infinite sites first-class
// mass is implicit and the classed passengers never depart.
struct SiteStack {
  Occupancy occ = Occupancy::finite(0);
  std::vector<ClassedParticle> classed;
  FifoTags fc_tags;

  std::int64_t first_class_count() const {
    if (occ.is_infinite()) return -1;  // implicit, unbounded
    return occ.count() - static_cast<std::int64_t>(classed.size());
  }

  bool has_first_class() const {
    return occ.is_infinite() || first_class_count() > 0;
  }

  void insert_classed(ClassedParticle p) {
    classed.insert(std::upper_bound(classed.begin(), classed.end(), p), p);
    occ.add_one();
  }
};

// ---------------------------------------------------------------------------
// Windowed lattice configuration

enum class EdgePolicy {
  exact_infinite,  // adjacent outside law is an infinite reservoir; exact
  guarded,         // adjacent outside law is empty; firing near the edge breaches
  open,            // busy outside law; shielded by the margin policy only
};

enum class Direction : std::int8_t { left = -1, right = +1 };

struct MovedParticle {
  std::int32_t klass = 1;
  std::int64_t label = 0;  // 0 = untracked first class
};

class Configuration {
 public:
  Configuration() = default;
  Configuration(std::int32_t left, std::int32_t right, bool track_fc = false)
      : left_(left), right_(right), track_fc_(track_fc) {
    if (right < left) fail(Errc::window_too_small, "window right < left");
    sites_.resize(static_cast<std::size_t>(right - left + 1));
  }

  std::int32_t left() const { return left_; }
  std::int32_t right() const { return right_; }
  std::int64_t width() const { return static_cast<std::int64_t>(right_) - left_ + 1; }
  bool in_window(std::int64_t x) const { return x >= left_ && x <= right_; }
  bool tracks_fc() const { return track_fc_; }

  EdgePolicy left_policy = EdgePolicy::guarded;
  EdgePolicy right_policy = EdgePolicy::guarded;

  const SiteStack& site(std::int64_t x) const { return sites_[index(x)]; }
  SiteStack& site_mut(std::int64_t x) { return sites_[index(x)]; }

  Occupancy occupancy(std::int64_t x) const { return sites_[index(x)].occ; }

  void set_infinite(std::int64_t x) { sites_[index(x)].occ = Occupancy::infinite(); }

  void add_first_class(std::int64_t x, std::int64_t n) {
    auto& s = sites_[index(x)];
    for (std::int64_t i = 0; i < n; ++i) s.occ.add_one();
  }

  void add_tagged_first_class(std::int64_t x, std::int64_t tag) {
    auto& s = sites_[index(x)];
    s.occ.add_one();
    if (track_fc_) s.fc_tags.push_back(tag);
  }

  void add_classed(std::int64_t x, std::int32_t klass, std::int64_t label) {
    sites_[index(x)].insert_classed({klass, label});
  }

  // Mass bookkeeping over finite sites; reservoir emissions count as inflow,
  // absorptions into reservoirs or through window edges as outflow.
  std::int64_t inflow = 0;
  std::int64_t outflow = 0;

  std::int64_t finite_mass() const {
    std::int64_t m = 0;
    for (const auto& s : sites_)
      if (!s.occ.is_infinite()) m += s.occ.count();
    return m;
  }

  std::int64_t next_reservoir_label() { return reservoir_label_--; }

 private:
  std::size_t index(std::int64_t x) const {
    if (x < left_ || x > right_) fail(Errc::out_of_window, "site " + std::to_string(x));
    return static_cast<std::size_t>(x - left_);
  }

  std::int32_t left_ = 0;
  std::int32_t right_ = 0;
  bool track_fc_ = false;
  std::int64_t reservoir_label_ = -1;
  std::vector<SiteStack> sites_;
};

// ---------------------------------------------------------------------------
// Operations

inline double total_jump_rate(const Configuration& cfg, const RateFunction& g, std::int64_t x) {
  const Occupancy occ = cfg.occupancy(x);
  return occ.is_infinite() ? g.gmax() : g.at_count(occ.count());
}

namespace detail {

// Removes the departing particle chosen by `slot` (1-based, in priority
// order: first class fills the bottom slots, then classed particles sorted by
// (class, label)). Within a class the mover is the lowest label: the arrival
// queue for first class, the sorted front for higher classes.
inline MovedParticle take_mover(Configuration& cfg, std::int64_t x, std::int64_t slot) {
  auto& s = cfg.site_mut(x);
  MovedParticle moved;
  if (s.occ.is_infinite()) {
    // Implicit first-class emission; stored passengers never depart.
    moved.klass = 1;
    moved.label = cfg.tracks_fc() ? cfg.next_reservoir_label() : 0;
    cfg.inflow += 1;  // enters the finite part of the lattice
    return moved;
  }
  const std::int64_t fc = s.first_class_count();
  if (slot <= fc) {
    moved.klass = 1;
    moved.label = (cfg.tracks_fc() && !s.fc_tags.empty()) ? s.fc_tags.pop_front() : 0;
  } else {
    const auto idx = static_cast<std::size_t>(slot - fc - 1);
    const std::int32_t klass = s.classed[idx].klass;
    auto it = std::lower_bound(s.classed.begin(), s.classed.end(),
                               ClassedParticle{klass, std::numeric_limits<std::int64_t>::min()});
    moved.klass = it->klass;
    moved.label = it->label;
    s.classed.erase(it);
  }
  s.occ.remove_one();
  return moved;
}

inline void land(Configuration& cfg, std::int64_t x, const MovedParticle& m) {
  auto& d = cfg.site_mut(x);
  if (d.occ.is_infinite()) {
    if (m.klass == 1) {
      cfg.outflow += 1;  // swallowed by the reservoir
    } else {
      d.classed.insert(std::upper_bound(d.classed.begin(), d.classed.end(),
                                        ClassedParticle{m.klass, m.label}),
                       {m.klass, m.label});
      cfg.outflow += 1;
    }
    return;
  }
  if (m.klass == 1) {
    d.occ.add_one();
    if (cfg.tracks_fc()) d.fc_tags.push_back(m.label);
  } else {
    d.insert_classed({m.klass, m.label});
  }
}

}  // namespace detail

struct JumpOutcome {
  MovedParticle moved;
  std::int64_t from = 0;
  std::int64_t to = 0;
  bool left_window = false;       // destination outside the window
  bool into_infinite = false;     // destination is a reservoir site
};

// Departure slot chosen by the thinning level: slot = min{k : level <= g(k)},
// valid when 0 < level <= g(occupancy). Under shared marks this makes the
// classed particles move exactly when a coupled lower copy would not.
inline JumpOutcome apply_jump_leveled(Configuration& cfg, const RateFunction& g, std::int64_t x,
                                      Direction dir, double level) {
  const Occupancy occ = cfg.occupancy(x);
  const double rate = occ.is_infinite() ? g.gmax() : g.at_count(occ.count());
  if (!(level > 0.0) || level > rate) fail(Errc::empty_site, "no departure at this level");

  std::int64_t slot = g.slot_for_level(level);
  if (!occ.is_infinite()) slot = std::min(slot, occ.count());

  JumpOutcome out;
  out.from = x;
  out.to = x + static_cast<std::int64_t>(dir);
  out.moved = detail::take_mover(cfg, x, slot);

  if (!cfg.in_window(out.to)) {
    out.left_window = true;
    if (!cfg.occupancy(x).is_infinite() || out.moved.klass != 1) cfg.outflow += 1;
    if (cfg.occupancy(x).is_infinite() && out.moved.klass == 1) cfg.inflow -= 1;  // never entered
    return out;
  }
  out.into_infinite = cfg.occupancy(out.to).is_infinite();
  detail::land(cfg, out.to, out.moved);
  return out;
}

// Plain priority jump: the front of the stack departs (lowest class, then
// lowest label). Equivalent to the leveled form with level -> 0+.
inline JumpOutcome apply_jump(Configuration& cfg, const RateFunction& g, std::int64_t x,
                              Direction dir) {
  const Occupancy occ = cfg.occupancy(x);
  const double rate = occ.is_infinite() ? g.gmax() : g.at_count(occ.count());
  if (rate <= 0.0) fail(Errc::empty_site, "jump from empty site " + std::to_string(x));
  const double level = std::nextafter(0.0, 1.0);
  return apply_jump_leveled(cfg, g, x, dir, level > 0 ? level : 1e-300);
}

inline Configuration translate(const Configuration& cfg, std::int64_t shift) {
  Configuration out(static_cast<std::int32_t>(cfg.left() + shift),
                    static_cast<std::int32_t>(cfg.right() + shift), cfg.tracks_fc());
  out.left_policy = cfg.left_policy;
  out.right_policy = cfg.right_policy;
  for (std::int64_t x = cfg.left(); x <= cfg.right(); ++x)
    out.site_mut(x + shift) = cfg.site(x);
  out.inflow = cfg.inflow;
  out.outflow = cfg.outflow;
  return out;
}

}  // namespace zrp
