#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hlwnet {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct RoomGeometry {
  double length_m = 10.0;
  double width_m = 10.0;
  double height_m = 3.0;

  void validate() const;
};

enum class ApKind { LiFi, WiFi };

/// AP type used to pick an interval model. 1-based: Type I = 1 ... In the
/// default 4x4 layout Types I-III are LiFi rings and Type IV is the WiFi AP.
using ApTypeId = int;

struct AccessPoint {
  int id = 0;  // 1-based, as printed in reports
  ApKind kind = ApKind::LiFi;
  Vec3 position;
  ApTypeId type = 0;
};

/// Immutable room + AP layout. Algorithms index APs 0-based (`index = id - 1`).
class NetworkTopology {
 public:
  NetworkTopology(RoomGeometry room, std::vector<AccessPoint> aps, double lifi_separation_m);

  const RoomGeometry& room() const noexcept { return room_; }
  std::span<const AccessPoint> aps() const noexcept { return aps_; }
  const AccessPoint& ap(std::size_t index) const { return aps_.at(index); }
  std::size_t size() const noexcept { return aps_.size(); }
  std::size_t lifi_count() const noexcept { return lifi_count_; }
  std::size_t wifi_index() const noexcept { return wifi_index_; }
  bool is_lifi(std::size_t index) const { return aps_[index].kind == ApKind::LiFi; }
  double lifi_separation_m() const noexcept { return separation_m_; }

  /// Number of distinct AP types; types are 1..type_count().
  int type_count() const noexcept { return type_count_; }
  std::vector<std::size_t> aps_of_type(ApTypeId type) const;

 private:
  RoomGeometry room_;
  std::vector<AccessPoint> aps_;
  double separation_m_;
  std::size_t lifi_count_ = 0;
  std::size_t wifi_index_ = 0;
  int type_count_ = 0;
};

/// grid_n x grid_n LiFi APs on the ceiling, centred in the room, ids assigned
/// row by row, plus one WiFi AP (id grid_n^2 + 1) above the room centre at
/// `wifi_height_m`. With `per_ap_types` every AP becomes its own type.
NetworkTopology build_grid_topology(const RoomGeometry& room, int grid_n, double separation_m,
                                    double wifi_height_m, bool per_ap_types = false);

/// Types for LiFi AP positions by rank of horizontal distance to the room
/// centre (equal distances within 1e-6 m share a type). Returned types start
/// at 1; the WiFi AP takes max + 1.
std::vector<ApTypeId> classify_by_geometry(const RoomGeometry& room,
                                           std::span<const Vec3> lifi_positions);

/// Type of the AP with 1-based `ap_id`.
ApTypeId classify_ap(const NetworkTopology& topology, int ap_id);

/// "I", "II", ... for small types, otherwise the decimal number.
std::string type_name(ApTypeId type);

}  // namespace hlwnet
