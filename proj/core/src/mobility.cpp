#include "hlwnet/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hlwnet/error.hpp"

namespace hlwnet {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_two_pi(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a >= kTwoPi ? 0.0 : a;
}

double wrap_pi(double a) {
  a = wrap_two_pi(a + std::numbers::pi) - std::numbers::pi;
  return a;
}

double uniform_heading(Rng& rng) { return std::uniform_real_distribution<double>(0.0, kTwoPi)(rng); }

double uniform_speed(const MobilityConfig& config, Rng& rng) {
  return config.v_max() * uniform_open_closed(rng);
}

// Specular reflection of a free-flight step. Updates position and both heading
// representations; returns true if a wall was hit.
bool move_reflect(MotionState& s, double distance, const RoomGeometry& room) {
  double x = s.position.x + distance * std::cos(s.heading);
  double y = s.position.y + distance * std::sin(s.heading);
  bool flip_x = false;
  bool flip_y = false;
  for (int guard = 0; guard < 64 && (x < 0.0 || x > room.length_m); ++guard) {
    x = x < 0.0 ? -x : 2.0 * room.length_m - x;
    flip_x = !flip_x;
  }
  for (int guard = 0; guard < 64 && (y < 0.0 || y > room.width_m); ++guard) {
    y = y < 0.0 ? -y : 2.0 * room.width_m - y;
    flip_y = !flip_y;
  }
  s.position = {std::clamp(x, 0.0, room.length_m), std::clamp(y, 0.0, room.width_m)};
  if (flip_x) {
    s.heading = std::numbers::pi - s.heading;
    s.gm_heading = std::numbers::pi - s.gm_heading;
    s.gm_mean_heading = std::numbers::pi - s.gm_mean_heading;
  }
  if (flip_y) {
    s.heading = -s.heading;
    s.gm_heading = -s.gm_heading;
    s.gm_mean_heading = -s.gm_mean_heading;
  }
  s.heading = wrap_two_pi(s.heading);
  return flip_x || flip_y;
}

}  // namespace

void MobilityConfig::validate() const {
  if (model != MobilityModel::Static && !(mean_speed_mps > 0.0)) {
    throw ConfigError("mean UE speed must be > 0");
  }
  if (!(gm_randomness >= 0.0 && gm_randomness <= 1.0)) {
    throw ConfigError("Gauss-Markov randomness must lie in [0, 1]");
  }
  if (!(gm_speed_std_mps >= 0.0) || !(gm_heading_std_rad >= 0.0)) {
    throw ConfigError("Gauss-Markov deviations must be >= 0");
  }
  if (!(gm_update_period_s > 0.0)) throw ConfigError("Gauss-Markov update period must be > 0");
  if (!(rw_flight_length_m > 0.0)) throw ConfigError("random-walk flight length must be > 0");
  if (!(ue_height_m >= 0.0)) throw ConfigError("UE height must be >= 0");
}

const char* mobility_model_name(MobilityModel model) {
  switch (model) {
    case MobilityModel::Static: return "static";
    case MobilityModel::RandomWaypoint: return "rwp";
    case MobilityModel::GaussMarkov: return "gauss_markov";
    case MobilityModel::RandomWalk: return "random_walk";
  }
  return "?";
}

Vec2 uniform_point(const RoomGeometry& room, Rng& rng) {
  std::uniform_real_distribution<double> ux(0.0, room.length_m);
  std::uniform_real_distribution<double> uy(0.0, room.width_m);
  const double x = ux(rng);
  return {x, uy(rng)};
}

MotionState init_motion(const RoomGeometry& room, const MobilityConfig& config, Rng& rng) {
  MotionState s;
  s.position = uniform_point(room, rng);
  switch (config.model) {
    case MobilityModel::Static:
      s.heading = uniform_heading(rng);
      break;
    case MobilityModel::RandomWaypoint: {
      s.waypoint = uniform_point(room, rng);
      s.speed = uniform_speed(config, rng);
      const double dx = s.waypoint.x - s.position.x;
      const double dy = s.waypoint.y - s.position.y;
      s.heading = wrap_two_pi(std::atan2(dy, dx));
      break;
    }
    case MobilityModel::GaussMarkov:
      s.heading = uniform_heading(rng);
      s.gm_heading = s.heading;
      s.gm_mean_heading = s.heading;
      s.speed = config.mean_speed_mps;
      s.gm_timer_s = config.gm_update_period_s;
      break;
    case MobilityModel::RandomWalk:
      s.heading = uniform_heading(rng);
      s.speed = uniform_speed(config, rng);
      s.rw_remaining_m = config.rw_flight_length_m;
      break;
  }
  return s;
}

MotionState rwp_advance(const MotionState& state, double dt, const RoomGeometry& room,
                        const MobilityConfig& config, Rng& rng) {
  MotionState s = state;
  const double dx = s.waypoint.x - s.position.x;
  const double dy = s.waypoint.y - s.position.y;
  const double remaining = std::hypot(dx, dy);
  const double step = s.speed * dt;
  if (step >= remaining) {
    s.position = s.waypoint;
    s.waypoint = uniform_point(room, rng);
    s.speed = uniform_speed(config, rng);
    const double ndx = s.waypoint.x - s.position.x;
    const double ndy = s.waypoint.y - s.position.y;
    if (ndx != 0.0 || ndy != 0.0) s.heading = wrap_two_pi(std::atan2(ndy, ndx));
    return s;
  }
  s.position.x += dx / remaining * step;
  s.position.y += dy / remaining * step;
  s.heading = wrap_two_pi(std::atan2(dy, dx));
  return s;
}

void gauss_markov_refresh(MotionState& s, const MobilityConfig& config, Rng& rng) {
  const double alpha = 1.0 - config.gm_randomness;
  const double noise = std::sqrt(1.0 - alpha * alpha);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double ws = gauss(rng);
  const double wd = gauss(rng);
  double speed = alpha * s.speed + (1.0 - alpha) * config.mean_speed_mps +
                 noise * config.gm_speed_std_mps * ws;
  s.speed = std::clamp(speed, 1e-3 * config.v_max(), config.v_max());
  s.gm_heading = alpha * s.gm_heading + (1.0 - alpha) * s.gm_mean_heading +
                 noise * config.gm_heading_std_rad * wd;
  s.heading = wrap_two_pi(s.gm_heading);
}

MotionState gauss_markov_advance(const MotionState& state, double dt, const RoomGeometry& room,
                                 const MobilityConfig& config, Rng& rng) {
  MotionState s = state;
  move_reflect(s, s.speed * dt, room);
  s.gm_timer_s -= dt;
  if (s.gm_timer_s <= 1e-12) {
    gauss_markov_refresh(s, config, rng);
    s.gm_timer_s += config.gm_update_period_s;
  }
  return s;
}

MotionState random_walk_advance(const MotionState& state, double dt, const RoomGeometry& room,
                                const MobilityConfig& config, Rng& rng) {
  MotionState s = state;
  const double step = s.speed * dt;
  if (step >= s.rw_remaining_m) {
    move_reflect(s, s.rw_remaining_m, room);
    s.heading = uniform_heading(rng);
    s.speed = uniform_speed(config, rng);
    s.rw_remaining_m = config.rw_flight_length_m;
    return s;
  }
  move_reflect(s, step, room);
  s.rw_remaining_m -= step;
  return s;
}

MotionState advance(const MotionState& state, double dt, const RoomGeometry& room,
                    const MobilityConfig& config, Rng& rng) {
  switch (config.model) {
    case MobilityModel::Static: return state;
    case MobilityModel::RandomWaypoint: return rwp_advance(state, dt, room, config, rng);
    case MobilityModel::GaussMarkov: return gauss_markov_advance(state, dt, room, config, rng);
    case MobilityModel::RandomWalk: return random_walk_advance(state, dt, room, config, rng);
  }
  return state;
}

double heading_angle_to_ap(const MotionState& state, const Vec3& ap) {
  const double dx = ap.x - state.position.x;
  const double dy = ap.y - state.position.y;
  if (dx == 0.0 && dy == 0.0) return 0.0;
  return std::abs(wrap_pi(state.heading - std::atan2(dy, dx)));
}

}  // namespace hlwnet
