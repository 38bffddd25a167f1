#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "zrp/core.hpp"
#include "zrp/error.hpp"
#include "zrp/rng.hpp"

namespace zrp {

// ---------------------------------------------------------------------------
// Deterministic uniformized event stream: one Poisson clock of rate gmax per
// window site, realized as a single merged stream (total rate gmax x width,
// site drawn uniformly). Each event consumes exactly four draws, so the
// sequence is a pure function of (seed, replica, window, gmax).

struct Event {
  double time;
  std::int32_t site;
  double dir_mark;
  double accept_mark;
};

class EventStream {
 public:
  EventStream(std::uint64_t seed, std::uint64_t replica, std::int32_t left, std::int32_t right,
              double site_rate)
      : rng_(seed, replica, StreamTag::events),
        left_(left),
        width_(static_cast<std::uint64_t>(right - left + 1)),
        total_rate_(site_rate * static_cast<double>(width_)) {
    if (right < left) fail(Errc::window_too_small, "event stream window");
    if (!(site_rate > 0.0)) fail(Errc::invalid_config, "site rate must be positive");
  }

  Event next() {
    Event e;
    time_ += rng_.exponential(total_rate_);
    e.time = time_;
    e.site = left_ + static_cast<std::int32_t>(rng_.below(width_));
    e.dir_mark = rng_.uniform_pos();
    e.accept_mark = rng_.uniform_pos();
    return e;
  }

 private:
  Rng rng_;
  std::int32_t left_;
  std::uint64_t width_;
  double total_rate_;
  double time_ = 0.0;
};

// ---------------------------------------------------------------------------
// Observables

struct TrackedPos {
  std::int64_t pos = 0;
  bool trapped = false;  // absorbed by a reservoir site
  bool set = false;
};

struct TagInfo {
  std::int32_t init_site = 0;
  std::int32_t pos = 0;
};

struct Observables {
  std::vector<TrackedPos> x2;  // labelled second-class positions, label j at [j-1]
  TrackedPos x3;
  TrackedPos x1;               // first particle emitted from a reservoir into finite land
  std::int64_t x1_label = 0;
  bool x1_by_front = false;    // untagged tracking, valid for p = 1 only
  std::int64_t j2 = 0;         // first-class current over the label-1 second-class particle
  std::int64_t events_seen = 0;
  std::int64_t events_applied = 0;

  // Tagged first-class positions when tracking is on.
  std::unordered_map<std::int64_t, TagInfo> tags;
  bool tagging = false;

  const TrackedPos& x2_first() const {
    if (x2.empty()) fail(Errc::invalid_config, "no second-class particle tracked");
    return x2.front();
  }
};

// Net signed count of tagged particles across the moving line u*t; the line
// value is real, no integer rounding.
inline std::int64_t line_current(const Observables& obs, double u, double t) {
  if (!obs.tagging) fail(Errc::tagging_disabled, "line current needs tag tracking");
  const double ut = u * t;
  std::int64_t j = 0;
  for (const auto& [label, info] : obs.tags) {
    if (info.init_site <= 0) {
      if (static_cast<double>(info.pos) > ut) ++j;
    } else {
      if (static_cast<double>(info.pos) <= ut) --j;
    }
  }
  return j;
}

// ---------------------------------------------------------------------------
// Single-event transition

enum class Mode { zero_range, exclusion };

namespace detail {

inline void breach_guard(const Configuration& cfg, std::int64_t site) {
  if (cfg.left_policy == EdgePolicy::guarded && site <= cfg.left() + 2)
    fail(Errc::window_breach, "jump near guarded left edge");
  if (cfg.right_policy == EdgePolicy::guarded && site >= cfg.right() - 2)
    fail(Errc::window_breach, "jump near guarded right edge");
}

inline void note_move(Observables& obs, const Configuration& cfg, const JumpOutcome& out) {
  if (out.moved.klass == 2) {
    const auto j = static_cast<std::size_t>(out.moved.label - 1);
    if (j < obs.x2.size()) {
      obs.x2[j].pos = out.to;
      obs.x2[j].set = true;
      if (out.into_infinite) obs.x2[j].trapped = true;
    }
    return;
  }
  if (out.moved.klass == 3) {
    obs.x3.pos = out.to;
    obs.x3.set = true;
    if (out.into_infinite) obs.x3.trapped = true;
    return;
  }
  // first class
  if (obs.tagging && out.moved.label != 0) {
    auto it = obs.tags.find(out.moved.label);
    if (it == obs.tags.end()) {
      // reservoir emission: tagged from its source site
      obs.tags.emplace(out.moved.label,
                       TagInfo{static_cast<std::int32_t>(out.from), static_cast<std::int32_t>(out.to)});
    } else {
      it->second.pos = static_cast<std::int32_t>(out.to);
    }
  }
  // first emission into finite land defines X1
  const bool from_reservoir = cfg.in_window(out.from) && cfg.occupancy(out.from).is_infinite();
  if (!obs.x1.set && from_reservoir && !out.into_infinite && !out.left_window) {
    obs.x1.pos = out.to;
    obs.x1.set = true;
    obs.x1_label = out.moved.label;
  } else if (obs.x1.set && !obs.x1.trapped) {
    // With tags the particle is followed by label; without, the first
    // emission is the arrival-queue front of its site, which identifies the
    // mover whenever the jump leaves X1's current site (valid for p = 1).
    const bool is_tracked = obs.x1_label != 0 ? out.moved.label == obs.x1_label
                                              : (obs.x1_by_front && out.from == obs.x1.pos);
    if (is_tracked) {
      obs.x1.pos = out.to;
      if (out.into_infinite) obs.x1.trapped = true;
    }
  }
  // crossing current over the label-1 second-class particle
  if (!obs.x2.empty() && obs.x2.front().set) {
    const std::int64_t c = obs.x2.front().pos;
    if (out.to == c && out.from == c - 1) ++obs.j2;
    else if (out.to == c - 1 && out.from == c) --obs.j2;
  }
}

inline std::optional<JumpOutcome> step_zero_range(Configuration& cfg, const Event& e,
                                                  const AsymmetryParams& asym,
                                                  const RateFunction& g, Observables& obs) {
  const Occupancy occ = cfg.occupancy(e.site);
  const double rate = occ.is_infinite() ? g.gmax() : g.at_count(occ.count());
  const double level = e.accept_mark * g.gmax();
  if (level > rate) return std::nullopt;
  breach_guard(cfg, e.site);
  const Direction dir = e.dir_mark <= asym.p ? Direction::right : Direction::left;
  const JumpOutcome out = apply_jump_leveled(cfg, g, e.site, dir, level);
  note_move(obs, cfg, out);
  return out;
}

inline std::optional<JumpOutcome> step_exclusion(Configuration& cfg, const Event& e,
                                                 const AsymmetryParams& asym, Observables& obs) {
  auto& s = cfg.site_mut(e.site);
  if (s.occ.is_infinite()) fail(Errc::invalid_config, "exclusion site cannot be infinite");
  if (s.occ.count() == 0) return std::nullopt;
  breach_guard(cfg, e.site);
  const Direction dir = e.dir_mark <= asym.p ? Direction::right : Direction::left;
  const std::int64_t to = e.site + static_cast<std::int64_t>(dir);

  const ClassedParticle mover =
      s.classed.empty() ? ClassedParticle{1, s.fc_tags.empty() ? 0 : s.fc_tags.front()}
                        : s.classed.front();

  if (!cfg.in_window(to)) {
    // leaves the window
    if (mover.klass == 1) {
      s.occ.remove_one();
      if (!s.fc_tags.empty()) s.fc_tags.pop_front();
    } else {
      s.classed.clear();
      s.occ.remove_one();
    }
    cfg.outflow += 1;
    JumpOutcome out;
    out.from = e.site;
    out.to = to;
    out.left_window = true;
    out.moved = {mover.klass, mover.label};
    return out;
  }

  auto& d = cfg.site_mut(to);
  JumpOutcome out;
  out.from = e.site;
  out.to = to;
  if (d.occ.count() == 0) {
    // plain move
    if (mover.klass == 1) {
      s.occ.remove_one();
      if (!s.fc_tags.empty()) s.fc_tags.pop_front();
      d.occ.add_one();
      if (cfg.tracks_fc()) d.fc_tags.push_back(mover.label);
    } else {
      s.classed.clear();
      s.occ.remove_one();
      d.insert_classed(mover);
    }
    out.moved = {mover.klass, mover.label};
    note_move(obs, cfg, out);
    return out;
  }
  const ClassedParticle other =
      d.classed.empty() ? ClassedParticle{1, d.fc_tags.empty() ? 0 : d.fc_tags.front()}
                        : d.classed.front();
  if (other.klass <= mover.klass) return std::nullopt;  // blocked by equal-or-higher priority

  // swap: mover displaces the lower-priority particle
  auto remove_from = [&](SiteStack& st, const ClassedParticle& p) {
    if (p.klass == 1) {
      if (!st.fc_tags.empty()) st.fc_tags.pop_front();
      st.occ.remove_one();
    } else {
      st.classed.clear();
      st.occ.remove_one();
    }
  };
  auto put_at = [&](SiteStack& st, const ClassedParticle& p) {
    if (p.klass == 1) {
      st.occ.add_one();
      if (cfg.tracks_fc()) st.fc_tags.push_back(p.label);
    } else {
      st.insert_classed(p);
    }
  };
  remove_from(s, mover);
  remove_from(d, other);
  put_at(d, mover);
  put_at(s, other);

  out.moved = {mover.klass, mover.label};
  note_move(obs, cfg, out);
  JumpOutcome back;
  back.from = to;
  back.to = e.site;
  back.moved = {other.klass, other.label};
  note_move(obs, cfg, back);
  return out;
}

}  // namespace detail

// Fires iff the acceptance mark clears the thinning ratio; direction is right
// iff the direction mark is at most p. Exclusion mode runs rate-1 clocks and
// suppresses jumps onto equal-or-lower class numbers.
inline std::optional<JumpOutcome> step(Configuration& cfg, const Event& e,
                                        const AsymmetryParams& asym, const RateFunction& g,
                                        Mode mode, Observables& obs) {
  if (!cfg.in_window(e.site)) fail(Errc::out_of_window, "event site outside window");
  ++obs.events_seen;
  const auto applied = mode == Mode::zero_range
                           ? detail::step_zero_range(cfg, e, asym, g, obs)
                           : detail::step_exclusion(cfg, e, asym, obs);
  if (applied) ++obs.events_applied;
  return applied;
}

// ---------------------------------------------------------------------------
// Whole-replica run

struct Snapshot {
  double t = 0.0;
  std::vector<TrackedPos> x2;
  TrackedPos x3;
  TrackedPos x1;
  std::int64_t j2 = 0;
  std::vector<std::int64_t> line_currents;  // one per requested speed
};

struct RunOptions {
  Mode mode = Mode::zero_range;
  double t_end = 0.0;
  std::vector<double> sample_times;  // ascending; rows are emitted at these times
  std::uint64_t seed = 1;
  std::uint64_t replica = 0;
  std::vector<double> line_speeds;

  // Test hooks: called after every applied event / at every sample time.
  std::function<void(const Configuration&, const JumpOutcome&, double)> on_event;
  std::function<void(const Configuration&, const Observables&, double)> on_sample;
};

struct RunResult {
  Configuration config;
  Observables obs;
  std::vector<Snapshot> timeline;
};

namespace detail {

inline void init_tracking(const Configuration& cfg, Observables& obs) {
  std::int32_t max_label2 = 0;
  for (std::int64_t x = cfg.left(); x <= cfg.right(); ++x)
    for (const auto& p : cfg.site(x).classed)
      if (p.klass == 2) max_label2 = std::max<std::int32_t>(max_label2, static_cast<std::int32_t>(p.label));
  obs.x2.assign(static_cast<std::size_t>(max_label2), TrackedPos{});
  for (std::int64_t x = cfg.left(); x <= cfg.right(); ++x) {
    const auto& s = cfg.site(x);
    for (const auto& p : s.classed) {
      if (p.klass == 2) {
        auto& t = obs.x2[static_cast<std::size_t>(p.label - 1)];
        t.pos = x;
        t.set = true;
      } else if (p.klass == 3 && p.label == 1) {
        obs.x3.pos = x;
        obs.x3.set = true;
      }
    }
  }
  if (cfg.tracks_fc()) {
    obs.tagging = true;
    for (std::int64_t x = cfg.left(); x <= cfg.right(); ++x) {
      const auto& s = cfg.site(x);
      if (s.occ.is_infinite()) continue;
      FifoTags copy = s.fc_tags;
      while (!copy.empty()) {
        const std::int64_t tag = copy.pop_front();
        obs.tags.emplace(tag, TagInfo{static_cast<std::int32_t>(x), static_cast<std::int32_t>(x)});
      }
    }
  }
}

inline Snapshot make_snapshot(const Observables& obs, double t, const std::vector<double>& speeds) {
  Snapshot s;
  s.t = t;
  s.x2 = obs.x2;
  s.x3 = obs.x3;
  s.x1 = obs.x1;
  s.j2 = obs.j2;
  for (double u : speeds) s.line_currents.push_back(line_current(obs, u, t));
  return s;
}

}  // namespace detail

inline RunResult run(Configuration init, const AsymmetryParams& asym, const RateFunction& g,
                     const RunOptions& opt) {
  RunResult res;
  res.config = std::move(init);
  detail::init_tracking(res.config, res.obs);
  res.obs.x1_by_front = !res.config.tracks_fc() && asym.totally();

  const double site_rate = opt.mode == Mode::exclusion ? 1.0 : g.gmax();
  EventStream stream(opt.seed, opt.replica, res.config.left(), res.config.right(), site_rate);

  std::size_t next_sample = 0;
  auto flush_samples = [&](double upto) {
    while (next_sample < opt.sample_times.size() && opt.sample_times[next_sample] <= upto) {
      const double ts = opt.sample_times[next_sample];
      res.timeline.push_back(detail::make_snapshot(res.obs, ts, opt.line_speeds));
      if (opt.on_sample) opt.on_sample(res.config, res.obs, ts);
      ++next_sample;
    }
  };

  while (true) {
    const Event e = stream.next();
    if (e.time > opt.t_end) break;
    flush_samples(e.time);
    const auto applied = step(res.config, e, asym, g, opt.mode, res.obs);
    if (applied && opt.on_event) opt.on_event(res.config, *applied, e.time);
  }
  flush_samples(opt.t_end);
  return res;
}

// ---------------------------------------------------------------------------
// Macroscopic density profile of a configuration at time t.

// Bin i covers macroscopic [a + i*w, a + (i+1)*w); its value is the particle
// count over the matching sites divided by (w * t). Reservoir sites are
// excluded from the count.
inline std::vector<double> density_profile(const Configuration& cfg, std::size_t bins, double a,
                                           double b, double t) {
  if (!(t > 0.0)) fail(Errc::invalid_config, "density profile needs t > 0");
  if (bins == 0 || !(b > a)) fail(Errc::invalid_config, "empty bin range");
  const double w = (b - a) / static_cast<double>(bins);
  std::vector<double> out(bins, 0.0);
  for (std::size_t i = 0; i < bins; ++i) {
    const auto lo = static_cast<std::int64_t>(std::floor((a + w * static_cast<double>(i)) * t));
    const auto hi = static_cast<std::int64_t>(std::floor((a + w * static_cast<double>(i + 1)) * t));
    if (lo < cfg.left() || hi > cfg.right() + 1)
      fail(Errc::range_outside_window, "profile bins outside window");
    std::int64_t count = 0;
    for (std::int64_t x = lo; x < hi; ++x) {
      const Occupancy occ = cfg.occupancy(x);
      if (!occ.is_infinite()) count += occ.count();
    }
    out[i] = static_cast<double>(count) / (w * t);
  }
  return out;
}

}  // namespace zrp
