#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "focalad/geometry.hpp"
#include "focalad/params.hpp"

#include <json.hpp>

namespace focalad {

// Fixed sampling grid: 2 s of history and 3 s of future at 2 Hz.
constexpr double kDt = 0.5;
constexpr int kHistorySteps = 4;
constexpr int kHorizonSteps = 6;
constexpr double kSpeedMax = 20.0;
constexpr double kLaneWidth = 3.5;
constexpr int kMaxAgents = 12;

struct AgentState {
  Vec2 p;
  double length = 4.5;
  double width = 1.9;
  double theta = 0.0;
  Vec2 v;

  bool operator==(const AgentState&) const = default;
};

struct Trajectory {
  std::vector<Vec2> points;

  bool operator==(const Trajectory&) const = default;
};

enum class ManeuverKind { free_flow, cut_in, merge, yield, cross, tailgate };

constexpr std::array<ManeuverKind, 6> kAllKinds = {
    ManeuverKind::free_flow, ManeuverKind::cut_in, ManeuverKind::merge,
    ManeuverKind::yield,     ManeuverKind::cross,  ManeuverKind::tailgate};

inline const char* kind_name(ManeuverKind k) {
  switch (k) {
    case ManeuverKind::free_flow: return "free_flow";
    case ManeuverKind::cut_in: return "cut_in";
    case ManeuverKind::merge: return "merge";
    case ManeuverKind::yield: return "yield";
    case ManeuverKind::cross: return "cross";
    case ManeuverKind::tailgate: return "tailgate";
  }
  return "?";
}

inline ManeuverKind kind_from_name(const std::string& s) {
  for (ManeuverKind k : kAllKinds) {
    if (s == kind_name(k)) return k;
  }
  throw std::invalid_argument("unknown maneuver kind: " + s);
}

struct Scenario {
  std::vector<AgentState> ego_history;                 // kHistorySteps, last = now
  std::vector<std::vector<AgentState>> agent_histories;  // N x kHistorySteps
  std::vector<Trajectory> agent_futures;               // N x kHorizonSteps
  Trajectory ego_plan;                                 // kHorizonSteps
  ManeuverKind kind = ManeuverKind::free_flow;
  std::uint64_t seed = 0;
  int interacting_index = -1;

  std::size_t agent_count() const { return agent_histories.size(); }
  const AgentState& ego_now() const { return ego_history.back(); }
  const AgentState& agent_now(std::size_t i) const { return agent_histories[i].back(); }

  bool operator==(const Scenario&) const = default;
};

// position_k = p + v * k * dt for k = 1..n; heading constant.
inline Trajectory roll_constant_velocity(const AgentState& state, double dt, int n) {
  if (n < 1) throw std::invalid_argument("roll_constant_velocity: n must be >= 1");
  Trajectory out;
  out.points.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    out.points.push_back(state.p + state.v * (dt * static_cast<double>(k)));
  }
  return out;
}

// Per-step headings along a trajectory, finite-differenced from consecutive
// points; falls back to the last known heading when nearly stationary.
inline std::vector<double> trajectory_headings(const Trajectory& traj, const Vec2& prev_point,
                                               double initial_heading) {
  std::vector<double> out;
  out.reserve(traj.points.size());
  Vec2 prev = prev_point;
  double heading = initial_heading;
  for (const Vec2& p : traj.points) {
    const Vec2 d = p - prev;
    if (d.norm() > 1e-9) heading = std::atan2(d.y, d.x);
    out.push_back(heading);
    prev = p;
  }
  return out;
}

inline OrientedBox box_at(const Vec2& center, const AgentState& sized_like, double heading) {
  return OrientedBox{center, sized_like.length, sized_like.width, heading};
}

// ---------------------------------------------------------------------------
// Validation

struct OverlapEvent {
  int agent = -1;
  int step = -1;  // future step index, 0-based
};

struct ValidityReport {
  bool valid = true;
  std::vector<std::string> failures;
  std::vector<OverlapEvent> overlaps;

  void fail(std::string msg) {
    valid = false;
    failures.push_back(std::move(msg));
  }
};

namespace detail {
constexpr double kCorridorHalfWidth = 0.5 * kLaneWidth;
constexpr double kCorridorBehind = 15.0;
constexpr double kCorridorAhead = 40.0;

// Agent center inside the ego-lane band, longitudinally near the planned ego
// position at the same step.
inline bool in_ego_corridor(const Vec2& agent_pos, const Vec2& ego_plan_pos) {
  if (std::abs(agent_pos.y) > kCorridorHalfWidth) return false;
  const double dx = agent_pos.x - ego_plan_pos.x;
  return dx > -kCorridorBehind && dx < kCorridorAhead;
}
}  // namespace detail

inline ValidityReport validate_scenario(const Scenario& s) {
  ValidityReport report;
  const std::size_t n = s.agent_count();
  if (n < 1 || n > kMaxAgents) {
    report.fail("agent count " + std::to_string(n) + " outside [1," + std::to_string(kMaxAgents) + "]");
  }
  if (s.ego_history.size() != kHistorySteps) report.fail("ego history length mismatch");
  if (s.ego_plan.points.size() != kHorizonSteps) report.fail("ego plan length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (s.agent_histories[i].size() != kHistorySteps) {
      report.fail("agent " + std::to_string(i) + " history length mismatch");
    }
  }
  if (s.agent_futures.size() != n) report.fail("future count mismatch");

  auto check_speed = [&report](const Trajectory& t, const Vec2& start, const std::string& who) {
    Vec2 prev = start;
    for (std::size_t k = 0; k < t.points.size(); ++k) {
      const double d = (t.points[k] - prev).norm();
      if (d > kSpeedMax * kDt + 1e-9) {
        report.fail(who + " exceeds speed bound at step " + std::to_string(k));
      }
      prev = t.points[k];
    }
  };
  check_speed(s.ego_plan, s.ego_now().p, "ego plan");
  for (std::size_t i = 0; i < n && i < s.agent_futures.size(); ++i) {
    check_speed(s.agent_futures[i], s.agent_now(i).p, "agent " + std::to_string(i));
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (const AgentState& st : s.agent_histories[i]) {
      if (st.length <= 0 || st.width <= 0) report.fail("agent " + std::to_string(i) + " non-positive size");
      if (!(st.theta > -kPi - 1e-12 && st.theta <= kPi + 1e-12)) {
        report.fail("agent " + std::to_string(i) + " heading not normalized");
      }
    }
  }

  if (!report.valid) return report;

  // Ego plan vs. agent futures, oriented boxes per step.
  const std::vector<double> ego_headings =
      trajectory_headings(s.ego_plan, s.ego_now().p, s.ego_now().theta);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> agent_headings =
        trajectory_headings(s.agent_futures[i], s.agent_now(i).p, s.agent_now(i).theta);
    for (int k = 0; k < kHorizonSteps; ++k) {
      const OrientedBox ego_box = box_at(s.ego_plan.points[k], s.ego_now(), ego_headings[k]);
      const OrientedBox agent_box =
          box_at(s.agent_futures[i].points[k], s.agent_now(i), agent_headings[k]);
      if (boxes_overlap(ego_box, agent_box)) {
        report.overlaps.push_back({static_cast<int>(i), k});
      }
    }
  }
  if (!report.overlaps.empty()) {
    std::string msg = "ego plan overlaps agent futures at";
    for (const OverlapEvent& e : report.overlaps) {
      msg += " (agent " + std::to_string(e.agent) + ", step " + std::to_string(e.step) + ")";
    }
    report.fail(std::move(msg));
  }

  // Corridor discipline: only the designated interacting agent may enter the
  // ego corridor; for free_flow nobody does.
  for (std::size_t i = 0; i < n; ++i) {
    bool enters = false;
    for (int k = 0; k < kHorizonSteps; ++k) {
      if (detail::in_ego_corridor(s.agent_futures[i].points[k], s.ego_plan.points[k])) {
        enters = true;
        break;
      }
    }
    const bool is_interacting = static_cast<int>(i) == s.interacting_index;
    if (enters && !is_interacting) {
      report.fail("non-interacting agent " + std::to_string(i) + " enters ego corridor");
    }
    if (!enters && is_interacting) {
      report.fail("interacting agent " + std::to_string(i) + " never enters ego corridor");
    }
  }
  if (s.kind == ManeuverKind::free_flow && s.interacting_index >= 0) {
    report.fail("free_flow scenario has an interacting agent");
  }
  if (s.kind != ManeuverKind::free_flow && s.interacting_index < 0) {
    report.fail("interactive scenario lacks an interacting agent");
  }
  return report;
}

// ---------------------------------------------------------------------------
// Generation

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic sampler; avoids std distributions so streams are identical
// across standard libraries.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + unit() * (hi - lo); }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(unit() * static_cast<double>(hi - lo + 1));
  }
  double sign() { return unit() < 0.5 ? -1.0 : 1.0; }

 private:
  std::mt19937_64 rng_;
};

constexpr int kTotalSteps = kHistorySteps + kHorizonSteps;
constexpr int kNowStep = kHistorySteps - 1;  // t = 0

inline double step_time(int s) { return (s - kNowStep) * kDt; }

// A full state track over history and future steps.
struct Track {
  std::vector<AgentState> states;  // kTotalSteps entries

  std::vector<AgentState> history() const {
    return {states.begin(), states.begin() + kHistorySteps};
  }
  Trajectory future() const {
    Trajectory t;
    for (int s = kHistorySteps; s < kTotalSteps; ++s) t.points.push_back(states[s].p);
    return t;
  }
};

inline void set_heading_from_velocity(AgentState& st, double fallback) {
  st.theta = st.v.norm() > 1e-9 ? wrap_angle(std::atan2(st.v.y, st.v.x)) : wrap_angle(fallback);
}

inline Track constant_velocity_track(Vec2 p_now, Vec2 v, double length, double width) {
  Track tr;
  tr.states.resize(kTotalSteps);
  for (int s = 0; s < kTotalSteps; ++s) {
    AgentState st;
    st.p = p_now + v * step_time(s);
    st.v = v;
    st.length = length;
    st.width = width;
    set_heading_from_velocity(st, 0.0);
    tr.states[s] = st;
  }
  return tr;
}

// Longitudinal track along +x from per-step speeds (trapezoidal positions).
inline Track longitudinal_track(double x_now, double y, const std::vector<double>& speeds,
                                double length, double width) {
  Track tr;
  tr.states.resize(kTotalSteps);
  std::vector<double> xs(kTotalSteps);
  xs[kNowStep] = x_now;
  for (int s = kNowStep + 1; s < kTotalSteps; ++s) {
    xs[s] = xs[s - 1] + 0.5 * (speeds[s - 1] + speeds[s]) * kDt;
  }
  for (int s = kNowStep - 1; s >= 0; --s) {
    xs[s] = xs[s + 1] - 0.5 * (speeds[s] + speeds[s + 1]) * kDt;
  }
  for (int s = 0; s < kTotalSteps; ++s) {
    AgentState st;
    st.p = {xs[s], y};
    st.v = {speeds[s], 0.0};
    st.length = length;
    st.width = width;
    set_heading_from_velocity(st, 0.0);
    tr.states[s] = st;
  }
  return tr;
}

inline std::vector<double> constant_speeds(double u) {
  return std::vector<double>(kTotalSteps, u);
}

// Constant speed through history, then decelerate from the first future step
// down to a floor.
inline std::vector<double> braking_speeds(double u0, double decel, double floor_speed) {
  std::vector<double> v(kTotalSteps, u0);
  for (int s = kHistorySteps; s < kTotalSteps; ++s) {
    v[s] = std::max(v[s - 1] - decel * kDt, std::max(floor_speed, 0.0));
  }
  return v;
}

// Smoothstep lane-change profile: y moves from y0 to y1 over steps
// [start_step, start_step + duration_steps], monotone in between.
struct LateralProfile {
  double y0 = 0, y1 = 0;
  int start_step = 0;
  int duration_steps = 1;

  double y_at(int s) const {
    const double tau = std::clamp((s - start_step) / static_cast<double>(duration_steps), 0.0, 1.0);
    const double w = tau * tau * (3.0 - 2.0 * tau);
    return y0 + (y1 - y0) * w;
  }
  double vy_at(int s) const {
    const double tau = (s - start_step) / static_cast<double>(duration_steps);
    if (tau < 0.0 || tau > 1.0) return 0.0;
    const double dw = 6.0 * tau * (1.0 - tau);
    return (y1 - y0) * dw / (duration_steps * kDt);
  }
};

inline Track lane_change_track(double x_now, double speed_x, const LateralProfile& lat,
                               double length, double width) {
  Track tr;
  tr.states.resize(kTotalSteps);
  for (int s = 0; s < kTotalSteps; ++s) {
    AgentState st;
    st.p = {x_now + speed_x * step_time(s), lat.y_at(s)};
    st.v = {speed_x, lat.vy_at(s)};
    st.length = length;
    st.width = width;
    set_heading_from_velocity(st, 0.0);
    tr.states[s] = st;
  }
  return tr;
}

struct VehicleDims {
  double length;
  double width;
};

inline VehicleDims sample_car(Sampler& rng) {
  return {rng.uniform(4.2, 4.8), rng.uniform(1.8, 2.0)};
}

constexpr double kEgoLength = 4.6;
constexpr double kEgoWidth = 1.9;

}  // namespace detail

// Deterministic scenario generator. Interactive kinds place exactly one
// scripted interacting agent in the ego corridor plus constant-velocity
// distractors in the side lanes; free_flow places distractors only. The ego
// ground-truth plan is a scripted response (brake or hold) that validation
// proves collision-free; sampling retries with fresh jitter when a draw
// violates it.
inline Scenario generate_scenario(ManeuverKind kind, std::uint64_t seed) {
  using namespace detail;
  constexpr int kMaxAttempts = 32;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Sampler rng(splitmix64(seed * 1000003ULL + static_cast<std::uint64_t>(kind) * 7919ULL +
                           static_cast<std::uint64_t>(attempt)));

    const double u0 = rng.uniform(8.0, 12.0);  // ego speed, identical law for all kinds

    // Ego response profile.
    std::optional<Track> interacting;
    std::vector<double> ego_speeds = constant_speeds(u0);

    switch (kind) {
      case ManeuverKind::free_flow:
        break;
      case ManeuverKind::cut_in: {
        const double side = rng.sign();
        const double ua = u0 - rng.uniform(2.5, 4.5);
        const double x0 = rng.uniform(8.0, 13.0);
        LateralProfile lat{side * (kLaneWidth + rng.uniform(-0.5, 0.5)),
                           side * rng.uniform(0.0, 0.35), 2, 5};
        const VehicleDims dims = sample_car(rng);
        interacting = lane_change_track(x0, ua, lat, dims.length, dims.width);
        const double decel = (u0 - ua + 1.5) / 1.6;
        ego_speeds = braking_speeds(u0, decel, std::max(ua - 1.5, 1.0));
        break;
      }
      case ManeuverKind::merge: {
        const double side = rng.sign();
        const double ua = u0 - rng.uniform(1.0, 3.0);
        const double x0 = rng.uniform(12.0, 18.0);
        LateralProfile lat{side * (2.0 * kLaneWidth + rng.uniform(-0.5, 0.5)),
                           side * rng.uniform(0.0, 0.35), 2, 7};
        const VehicleDims dims = sample_car(rng);
        interacting = lane_change_track(x0, ua, lat, dims.length, dims.width);
        const double decel = (u0 - ua + 1.0) / 2.5;
        ego_speeds = braking_speeds(u0, decel, std::max(ua - 0.5, 1.0));
        break;
      }
      case ManeuverKind::yield: {
        // Lead in the ego lane braking with speed-proportional decay; the
        // ego mirrors the decay to keep the gap open.
        const double x0 = rng.uniform(14.0, 20.0);
        const double ul = u0 + rng.uniform(-1.0, 1.0);
        const double rate = 0.30;
        std::vector<double> lead_speeds(kTotalSteps, ul);
        for (int s = 2; s < kTotalSteps; ++s) {
          lead_speeds[s] = lead_speeds[s - 1] * (1.0 - rate * kDt);
        }
        const VehicleDims dims = sample_car(rng);
        interacting = longitudinal_track(x0, rng.uniform(-0.3, 0.3), lead_speeds, dims.length,
                                         dims.width);
        ego_speeds = constant_speeds(u0);
        for (int s = kHistorySteps; s < kTotalSteps; ++s) {
          ego_speeds[s] = ego_speeds[s - 1] * (1.0 - rate * kDt);
        }
        break;
      }
      case ManeuverKind::cross: {
        const double side = rng.sign();
        const double xc = rng.uniform(12.0, 18.0);
        const double y0 = side * rng.uniform(3.8, 5.5);
        const double vy = -side * rng.uniform(1.8, 2.6);
        Track t = constant_velocity_track({xc + rng.uniform(-0.5, 0.5), y0}, {0.0, vy}, 0.8, 0.8);
        interacting = t;
        const double t_exit = std::min((std::abs(y0) + 1.4) / std::abs(vy), 3.0);
        const double d_short = xc - 4.5;
        const double decel =
            std::clamp(2.0 * (u0 * t_exit - d_short) / (t_exit * t_exit), 1.5, 6.0);
        ego_speeds = braking_speeds(u0, decel, 0.0);
        break;
      }
      case ManeuverKind::tailgate: {
        // Follower closes from behind and settles at a short gap; the ego
        // holds speed.
        const double gap_target = rng.uniform(2.5, 4.5);
        const double uf0 = u0 + rng.uniform(2.0, 4.0);
        const double x0 = -rng.uniform(8.5, 11.0);
        const VehicleDims dims = sample_car(rng);
        const double half_lengths = 0.5 * (kEgoLength + dims.length);
        std::vector<double> fspeeds(kTotalSteps, uf0);
        std::vector<double> fx(kTotalSteps, 0.0);
        fx[0] = x0 + u0 * step_time(0) -
                (uf0 - u0) * (step_time(0));  // relative closing before now
        // Integrate the follower controller forward from the earliest step.
        double x = x0 - 0.5 * (uf0 + uf0) * 0.0;
        // Build ego longitudinal positions first (constant speed).
        std::vector<double> ego_x(kTotalSteps);
        for (int s = 0; s < kTotalSteps; ++s) ego_x[s] = u0 * step_time(s);
        // Start the follower at the earliest step, closing at uf0.
        double fx_s = x0 - (uf0 - u0) * (-step_time(0));  // placeholder, overwritten below
        (void)fx_s;
        std::vector<double> xs(kTotalSteps);
        xs[0] = x0 + (u0 - uf0) * (-step_time(0)) + u0 * step_time(0);
        fspeeds[0] = uf0;
        for (int s = 1; s < kTotalSteps; ++s) {
          const double gap = (ego_x[s - 1] - xs[s - 1]) - half_lengths;
          const double a = std::clamp(0.6 * (gap - gap_target) + 1.4 * (u0 - fspeeds[s - 1]),
                                      -4.0, 1.5);
          fspeeds[s] = std::max(fspeeds[s - 1] + a * kDt, 0.0);
          xs[s] = xs[s - 1] + 0.5 * (fspeeds[s - 1] + fspeeds[s]) * kDt;
        }
        Track tr;
        tr.states.resize(kTotalSteps);
        for (int s = 0; s < kTotalSteps; ++s) {
          AgentState st;
          st.p = {xs[s], rng.uniform(0.0, 0.0) + 0.0};
          st.v = {fspeeds[s], 0.0};
          st.length = dims.length;
          st.width = dims.width;
          set_heading_from_velocity(st, 0.0);
          tr.states[s] = st;
        }
        const double lat_jitter = rng.uniform(-0.3, 0.3);
        for (AgentState& st : tr.states) st.p.y = lat_jitter;
        interacting = tr;
        ego_speeds = constant_speeds(u0);
        break;
      }
    }

    // Ego track.
    Track ego = longitudinal_track(0.0, 0.0, ego_speeds, kEgoLength, kEgoWidth);

    // Distractors: constant velocity in the side lanes, spaced at t=0.
    const int n_distractors = kind == ManeuverKind::free_flow ? rng.uniform_int(3, 8)
                                                              : rng.uniform_int(4, 9);
    std::vector<Track> agents;
    std::vector<std::pair<double, double>> occupied;  // (lane y, x at now)
    for (int i = 0; i < n_distractors; ++i) {
      const double lanes[4] = {-2.0 * kLaneWidth, -kLaneWidth, kLaneWidth, 2.0 * kLaneWidth};
      double lane_y = 0, x0 = 0, speed = 0;
      for (int tries = 0; tries < 12; ++tries) {
        lane_y = lanes[rng.uniform_int(0, 3)] + rng.uniform(-0.5, 0.5);
        x0 = rng.uniform(-30.0, 45.0);
        speed = rng.uniform(4.0, 15.0);
        bool clear = true;
        for (const auto& [oy, ox] : occupied) {
          if (std::abs(oy - lane_y) < 2.0 && std::abs(ox - x0) < 8.0) clear = false;
        }
        if (clear) break;
      }
      occupied.emplace_back(lane_y, x0);
      const VehicleDims dims = sample_car(rng);
      agents.push_back(constant_velocity_track({x0, lane_y}, {speed, 0.0}, dims.length, dims.width));
    }

    int interacting_index = -1;
    if (interacting) {
      interacting_index = rng.uniform_int(0, static_cast<int>(agents.size()));
      agents.insert(agents.begin() + interacting_index, *interacting);
    }

    Scenario s;
    s.kind = kind;
    s.seed = seed;
    s.interacting_index = interacting_index;
    s.ego_history = ego.history();
    s.ego_plan = ego.future();
    for (const Track& a : agents) {
      s.agent_histories.push_back(a.history());
      s.agent_futures.push_back(a.future());
    }
    if (validate_scenario(s).valid) return s;
  }
  throw std::runtime_error(std::string("generate_scenario: no valid draw for kind ") +
                           kind_name(kind) + " seed " + std::to_string(seed) + " after " +
                           std::to_string(kMaxAttempts) + " attempts");
}

// ---------------------------------------------------------------------------
// JSONL persistence: one scenario per line, schema "scenario_v1", every float
// as a shortest-round-trip decimal string.

namespace detail {

inline nlohmann::json state_to_json(const AgentState& st) {
  return {{"p", {double_to_string(st.p.x), double_to_string(st.p.y)}},
          {"size", {double_to_string(st.length), double_to_string(st.width)}},
          {"theta", double_to_string(st.theta)},
          {"v", {double_to_string(st.v.x), double_to_string(st.v.y)}}};
}

inline AgentState state_from_json(const nlohmann::json& j) {
  AgentState st;
  st.p = {double_from_string(j.at("p").at(0).get<std::string>()),
          double_from_string(j.at("p").at(1).get<std::string>())};
  st.length = double_from_string(j.at("size").at(0).get<std::string>());
  st.width = double_from_string(j.at("size").at(1).get<std::string>());
  st.theta = double_from_string(j.at("theta").get<std::string>());
  st.v = {double_from_string(j.at("v").at(0).get<std::string>()),
          double_from_string(j.at("v").at(1).get<std::string>())};
  return st;
}

inline nlohmann::json trajectory_to_json(const Trajectory& t) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Vec2& p : t.points) {
    arr.push_back({double_to_string(p.x), double_to_string(p.y)});
  }
  return arr;
}

inline Trajectory trajectory_from_json(const nlohmann::json& j) {
  Trajectory t;
  for (const auto& p : j) {
    t.points.push_back({double_from_string(p.at(0).get<std::string>()),
                        double_from_string(p.at(1).get<std::string>())});
  }
  return t;
}

}  // namespace detail

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json agents_h = nlohmann::json::array();
  for (const auto& hist : s.agent_histories) {
    nlohmann::json h = nlohmann::json::array();
    for (const AgentState& st : hist) h.push_back(detail::state_to_json(st));
    agents_h.push_back(h);
  }
  nlohmann::json futures = nlohmann::json::array();
  for (const Trajectory& t : s.agent_futures) futures.push_back(detail::trajectory_to_json(t));
  nlohmann::json ego_h = nlohmann::json::array();
  for (const AgentState& st : s.ego_history) ego_h.push_back(detail::state_to_json(st));
  return {{"schema", "scenario_v1"},
          {"kind", kind_name(s.kind)},
          {"seed", s.seed},
          {"interacting", s.interacting_index},
          {"ego_history", ego_h},
          {"agent_histories", agents_h},
          {"agent_futures", futures},
          {"ego_plan", detail::trajectory_to_json(s.ego_plan)}};
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  if (j.at("schema").get<std::string>() != "scenario_v1") {
    throw std::invalid_argument("unsupported scenario schema");
  }
  Scenario s;
  s.kind = kind_from_name(j.at("kind").get<std::string>());
  s.seed = j.at("seed").get<std::uint64_t>();
  s.interacting_index = j.at("interacting").get<int>();
  for (const auto& st : j.at("ego_history")) s.ego_history.push_back(detail::state_from_json(st));
  for (const auto& hist : j.at("agent_histories")) {
    std::vector<AgentState> h;
    for (const auto& st : hist) h.push_back(detail::state_from_json(st));
    s.agent_histories.push_back(std::move(h));
  }
  for (const auto& t : j.at("agent_futures")) {
    s.agent_futures.push_back(detail::trajectory_from_json(t));
  }
  s.ego_plan = detail::trajectory_from_json(j.at("ego_plan"));
  return s;
}

inline void save_scenarios(const std::string& path, const std::vector<Scenario>& scenarios) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const Scenario& s : scenarios) {
    out << scenario_to_json(s).dump() << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::vector<Scenario> load_scenarios(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<Scenario> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(scenario_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("scenario file " + path + " line " + std::to_string(line_no) +
                               ": " + e.what());
    }
  }
  return out;
}

}  // namespace focalad
