#include "hlwnet/topology.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hlwnet/error.hpp"

namespace hlwnet {

void RoomGeometry::validate() const {
  if (!(length_m > 0.0) || !(width_m > 0.0) || !(height_m > 0.0)) {
    throw ConfigError("room dimensions must be strictly positive");
  }
}

NetworkTopology::NetworkTopology(RoomGeometry room, std::vector<AccessPoint> aps,
                                 double lifi_separation_m)
    : room_(room), aps_(std::move(aps)), separation_m_(lifi_separation_m) {
  room_.validate();
  std::size_t wifi_count = 0;
  for (std::size_t i = 0; i < aps_.size(); ++i) {
    if (aps_[i].id != static_cast<int>(i) + 1) {
      throw ConfigError("AP ids must be 1..N_a without gaps");
    }
    if (aps_[i].kind == ApKind::WiFi) {
      ++wifi_count;
      wifi_index_ = i;
    } else {
      ++lifi_count_;
    }
    if (aps_[i].type < 1) throw ConfigError("AP type must be >= 1");
    type_count_ = std::max(type_count_, aps_[i].type);
  }
  if (wifi_count != 1) throw ConfigError("topology must contain exactly one WiFi AP");
}

std::vector<std::size_t> NetworkTopology::aps_of_type(ApTypeId type) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < aps_.size(); ++i) {
    if (aps_[i].type == type) out.push_back(i);
  }
  return out;
}

std::vector<ApTypeId> classify_by_geometry(const RoomGeometry& room,
                                           std::span<const Vec3> lifi_positions) {
  constexpr double kTol = 1e-6;
  const double cx = room.length_m / 2.0;
  const double cy = room.width_m / 2.0;
  std::vector<double> dist(lifi_positions.size());
  for (std::size_t i = 0; i < lifi_positions.size(); ++i) {
    dist[i] = std::hypot(lifi_positions[i].x - cx, lifi_positions[i].y - cy);
  }
  std::vector<double> levels = dist;
  std::sort(levels.begin(), levels.end());
  std::vector<double> distinct;
  for (double d : levels) {
    if (distinct.empty() || d - distinct.back() > kTol) distinct.push_back(d);
  }
  std::vector<ApTypeId> types(lifi_positions.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    auto it = std::find_if(distinct.begin(), distinct.end(),
                           [&](double level) { return std::abs(level - dist[i]) <= kTol; });
    types[i] = static_cast<ApTypeId>(it - distinct.begin()) + 1;
  }
  return types;
}

NetworkTopology build_grid_topology(const RoomGeometry& room, int grid_n, double separation_m,
                                    double wifi_height_m, bool per_ap_types) {
  room.validate();
  if (grid_n < 1) throw ConfigError("LiFi grid size must be >= 1");
  if (separation_m < 0.0) throw ConfigError("LiFi separation must be non-negative");
  const double extent = grid_n * separation_m;
  if (extent > room.length_m + 1e-9 || extent > room.width_m + 1e-9) {
    std::ostringstream msg;
    msg << "LiFi grid extent " << extent << " m exceeds room footprint " << room.length_m << " x "
        << room.width_m << " m";
    throw ConfigError(msg.str());
  }
  if (grid_n > 1 && separation_m <= 0.0) {
    throw ConfigError("LiFi separation must be positive for grids larger than 1x1");
  }
  if (!(wifi_height_m >= 0.0) || wifi_height_m > room.height_m) {
    throw ConfigError("WiFi AP height must lie within the room");
  }

  const double cx = room.length_m / 2.0;
  const double cy = room.width_m / 2.0;
  const double offset = (grid_n - 1) / 2.0;
  std::vector<Vec3> lifi;
  lifi.reserve(static_cast<std::size_t>(grid_n) * grid_n);
  for (int row = 0; row < grid_n; ++row) {
    for (int col = 0; col < grid_n; ++col) {
      lifi.push_back({cx + (col - offset) * separation_m, cy + (row - offset) * separation_m,
                      room.height_m});
    }
  }

  std::vector<ApTypeId> types;
  if (per_ap_types) {
    for (std::size_t i = 0; i < lifi.size(); ++i) types.push_back(static_cast<ApTypeId>(i) + 1);
  } else {
    types = classify_by_geometry(room, lifi);
  }
  const ApTypeId wifi_type = *std::max_element(types.begin(), types.end()) + 1;

  std::vector<AccessPoint> aps;
  aps.reserve(lifi.size() + 1);
  for (std::size_t i = 0; i < lifi.size(); ++i) {
    aps.push_back({static_cast<int>(i) + 1, ApKind::LiFi, lifi[i], types[i]});
  }
  aps.push_back({static_cast<int>(lifi.size()) + 1, ApKind::WiFi, {cx, cy, wifi_height_m}, wifi_type});
  return NetworkTopology(room, std::move(aps), separation_m);
}

ApTypeId classify_ap(const NetworkTopology& topology, int ap_id) {
  if (ap_id < 1 || static_cast<std::size_t>(ap_id) > topology.size()) {
    throw std::out_of_range("AP id out of range");
  }
  return topology.ap(static_cast<std::size_t>(ap_id) - 1).type;
}

std::string type_name(ApTypeId type) {
  static const char* kRoman[] = {"I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X"};
  if (type >= 1 && type <= 10) return kRoman[type - 1];
  return std::to_string(type);
}

}  // namespace hlwnet
