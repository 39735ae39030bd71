#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hlwnet/channel.hpp"
#include "hlwnet/loadbalance.hpp"
#include "hlwnet/mobility.hpp"
#include "hlwnet/rng.hpp"
#include "hlwnet/topology.hpp"

namespace hlwnet {

struct PopulationConfig {
  int n_ues_min = 10;
  int n_ues_max = 100;
  double mean_rate_bps = 100e6;
  double gamma_shape = 1.0;
  double min_rate_bps = 1e6;  // draws below are rejected

  void validate() const;
};

/// Initial UE population of one Monte Carlo scenario.
struct Scenario {
  std::uint64_t seed = 0;
  std::vector<MotionState> motion;
  std::vector<double> rates_bps;
  std::vector<double> shadowing_db;
  std::vector<Rng> rngs;  // one mobility stream per UE

  std::size_t size() const noexcept { return motion.size(); }
};

/// RNG stream ids under a scenario seed.
enum StreamId : std::uint64_t {
  kStreamPopulation = 1,
  kStreamMobility = 2,
  kStreamShadowing = 3,
  kStreamCollection = 4,
};

double draw_required_rate(const PopulationConfig& population, Rng& rng);

Scenario make_scenario(const RoomGeometry& room, const MobilityConfig& mobility,
                       const PopulationConfig& population, const WiFiParams& wifi, int n_ues,
                       std::uint64_t seed);

/// Moving UEs plus per-tick link evaluation, cached until the next advance.
class World {
 public:
  World(const NetworkTopology& topology, const ChannelParams& channel,
        const MobilityConfig& mobility, Scenario scenario);

  const NetworkTopology& topology() const noexcept { return *topology_; }
  const ChannelParams& channel() const noexcept { return channel_; }
  std::size_t n_ues() const noexcept { return motion_.size(); }
  std::size_t n_aps() const noexcept { return topology_->size(); }
  double time_s() const noexcept { return time_s_; }
  std::span<const double> rates() const noexcept { return rates_; }
  const MotionState& motion(std::size_t ue) const { return motion_[ue]; }
  Vec3 position(std::size_t ue) const { return ue_position(motion_[ue], mobility_); }

  void advance(double dt);

  const LinkRow& links(std::size_t ue);
  double capacity(std::size_t ue, std::size_t ap) { return links(ue).capacity[ap]; }
  double snr_db(std::size_t ue, std::size_t ap) { return links(ue).snr_db(ap, channel_.snr_floor_db); }
  /// Capacity of every (UE, AP) pair at the current instant.
  void fill_capacities(CapacityMatrix& caps);
  /// SSS choice on the current link qualities (dB, floored).
  std::size_t sss_choice(std::size_t ue);

 private:
  const NetworkTopology* topology_;
  ChannelParams channel_;
  MobilityConfig mobility_;
  std::vector<MotionState> motion_;
  std::vector<double> rates_;
  std::vector<double> shadowing_db_;
  std::vector<Rng> rngs_;
  std::vector<LinkRow> rows_;
  std::vector<long long> row_epoch_;
  long long epoch_ = 0;
  double time_s_ = 0.0;
};

/// GT solve from the SSS assignment at the world's current instant.
SolveResult initial_solve(World& world, const LbOptions& lb, int max_iters);

}  // namespace hlwnet
