#pragma once

#include "hlwnet/rng.hpp"
#include "hlwnet/topology.hpp"

namespace hlwnet {

enum class MobilityModel { Static, RandomWaypoint, GaussMarkov, RandomWalk };

struct MobilityConfig {
  MobilityModel model = MobilityModel::RandomWaypoint;
  // Mean UE speed. RWP and random walk draw speeds uniformly on (0, 2 * mean].
  double mean_speed_mps = 1.0;
  double gm_randomness = 0.8;       // 0: constant velocity, 1: memoryless
  double gm_speed_std_mps = 1.0;
  double gm_heading_std_rad = 1.0;
  double gm_update_period_s = 1.0;  // velocity refresh period
  double rw_flight_length_m = 20.0;
  double ue_height_m = 1.0;

  double v_max() const noexcept { return 2.0 * mean_speed_mps; }
  void validate() const;
};

struct MotionState {
  Vec2 position;
  double speed = 0.0;    // m/s
  double heading = 0.0;  // rad, [0, 2pi)
  Vec2 waypoint;         // RWP target
  // Gauss-Markov memory: unwrapped heading and its long-run mean, time to the
  // next velocity refresh.
  double gm_heading = 0.0;
  double gm_mean_heading = 0.0;
  double gm_timer_s = 0.0;
  double rw_remaining_m = 0.0;  // random walk: distance left in current flight
};

/// Initial state: position uniform over the footprint, model-specific velocity.
MotionState init_motion(const RoomGeometry& room, const MobilityConfig& config, Rng& rng);

MotionState rwp_advance(const MotionState& state, double dt, const RoomGeometry& room,
                        const MobilityConfig& config, Rng& rng);
MotionState gauss_markov_advance(const MotionState& state, double dt, const RoomGeometry& room,
                                 const MobilityConfig& config, Rng& rng);
MotionState random_walk_advance(const MotionState& state, double dt, const RoomGeometry& room,
                                const MobilityConfig& config, Rng& rng);

/// Dispatches on `config.model`.
MotionState advance(const MotionState& state, double dt, const RoomGeometry& room,
                    const MobilityConfig& config, Rng& rng);

/// One Gauss-Markov velocity refresh (speed and unwrapped heading).
void gauss_markov_refresh(MotionState& state, const MobilityConfig& config, Rng& rng);

/// Angle in [0, pi] between the heading and the horizontal bearing to `ap`.
/// Zero when the UE sits horizontally on the AP.
double heading_angle_to_ap(const MotionState& state, const Vec3& ap);

/// Uniform point of the room footprint.
Vec2 uniform_point(const RoomGeometry& room, Rng& rng);

inline Vec3 ue_position(const MotionState& state, const MobilityConfig& config) {
  return {state.position.x, state.position.y, config.ue_height_m};
}

const char* mobility_model_name(MobilityModel model);

}  // namespace hlwnet
