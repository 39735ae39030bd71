#include "hlwnet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hlwnet/error.hpp"

namespace hlwnet {

void PopulationConfig::validate() const {
  if (n_ues_min < 1 || n_ues_max < n_ues_min) throw ConfigError("UE count range must satisfy 1 <= min <= max");
  if (!(mean_rate_bps > 0.0) || !(gamma_shape > 0.0)) throw ConfigError("rate distribution must be positive");
  if (!(min_rate_bps >= 0.0) || min_rate_bps >= 10.0 * mean_rate_bps) {
    throw ConfigError("minimum rate must be >= 0 and well below the mean");
  }
}

double draw_required_rate(const PopulationConfig& population, Rng& rng) {
  std::gamma_distribution<double> gamma(population.gamma_shape,
                                        population.mean_rate_bps / population.gamma_shape);
  for (;;) {
    const double r = gamma(rng);
    if (r >= population.min_rate_bps && r > 0.0) return r;
  }
}

Scenario make_scenario(const RoomGeometry& room, const MobilityConfig& mobility,
                       const PopulationConfig& population, const WiFiParams& wifi, int n_ues,
                       std::uint64_t seed) {
  if (n_ues < 1) throw ConfigError("scenario needs at least one UE");
  Scenario s;
  s.seed = seed;
  Rng pop = make_rng(seed, {kStreamPopulation});
  Rng shadow = make_rng(seed, {kStreamShadowing});
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int j = 0; j < n_ues; ++j) {
    Rng mob = make_rng(seed, {kStreamMobility, static_cast<std::uint64_t>(j)});
    s.motion.push_back(init_motion(room, mobility, mob));
    s.rngs.push_back(mob);
    s.rates_bps.push_back(draw_required_rate(population, pop));
    const double w = gauss(shadow);
    s.shadowing_db.push_back(wifi.shadowing_sigma_db > 0.0 ? wifi.shadowing_sigma_db * w : 0.0);
  }
  return s;
}

World::World(const NetworkTopology& topology, const ChannelParams& channel,
             const MobilityConfig& mobility, Scenario scenario)
    : topology_(&topology),
      channel_(channel),
      mobility_(mobility),
      motion_(std::move(scenario.motion)),
      rates_(std::move(scenario.rates_bps)),
      shadowing_db_(std::move(scenario.shadowing_db)),
      rngs_(std::move(scenario.rngs)),
      rows_(motion_.size()),
      row_epoch_(motion_.size(), -1) {}

void World::advance(double dt) {
  for (std::size_t j = 0; j < motion_.size(); ++j) {
    motion_[j] = hlwnet::advance(motion_[j], dt, topology_->room(), mobility_, rngs_[j]);
  }
  time_s_ += dt;
  if (mobility_.model != MobilityModel::Static) ++epoch_;
}

const LinkRow& World::links(std::size_t ue) {
  if (row_epoch_[ue] != epoch_) {
    evaluate_links(*topology_, position(ue), channel_, shadowing_db_[ue], rows_[ue]);
    row_epoch_[ue] = epoch_;
  }
  return rows_[ue];
}

void World::fill_capacities(CapacityMatrix& caps) {
  if (caps.n_ues() != n_ues() || caps.n_aps() != n_aps()) caps = CapacityMatrix(n_ues(), n_aps());
  for (std::size_t j = 0; j < n_ues(); ++j) {
    const LinkRow& row = links(j);
    std::copy(row.capacity.begin(), row.capacity.end(), caps.row(j).begin());
  }
}

std::size_t World::sss_choice(std::size_t ue) {
  const LinkRow& row = links(ue);
  std::size_t best = 0;
  double best_db = row.snr_db(0, channel_.snr_floor_db);
  for (std::size_t a = 1; a < row.quality.size(); ++a) {
    const double db = row.snr_db(a, channel_.snr_floor_db);
    if (db > best_db) {
      best_db = db;
      best = a;
    }
  }
  return best;
}

SolveResult initial_solve(World& world, const LbOptions& lb, int max_iters) {
  CapacityMatrix caps;
  world.fill_capacities(caps);
  Assignment init(world.n_ues());
  for (std::size_t j = 0; j < init.size(); ++j) init[j] = world.sss_choice(j);
  return gt_best_response_solve(caps, world.rates(), init, max_iters, lb);
}

}  // namespace hlwnet
