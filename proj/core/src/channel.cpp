#include "hlwnet/channel.hpp"

#include <cmath>
#include <numbers>

#include "hlwnet/error.hpp"

namespace hlwnet {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

double lifi_signal(double gain, const LiFiParams& p) {
  const double current = p.responsivity_a_per_w * gain * p.modulated_power_w;
  return current * current;
}

double lifi_noise(const LiFiParams& p) { return p.noise_psd_a2_per_hz * p.bandwidth_hz; }

}  // namespace

void LiFiParams::validate() const {
  if (!(bandwidth_hz > 0) || !(noise_psd_a2_per_hz > 0) || !(responsivity_a_per_w > 0) ||
      !(modulated_power_w > 0) || !(lambertian_order > 0) || !(pd_area_m2 > 0) ||
      !(optics_gain > 0)) {
    throw ConfigError("LiFi physical parameters must be strictly positive");
  }
  if (!(fov_semiangle_rad > 0) || fov_semiangle_rad > std::numbers::pi / 2 + 1e-12) {
    throw ConfigError("LiFi field of view must lie in (0, pi/2]");
  }
  if (!(nlos_gain_fraction >= 0) || nlos_gain_fraction >= 1) {
    throw ConfigError("NLoS gain fraction must lie in [0, 1)");
  }
}

void WiFiParams::validate() const {
  if (!(bandwidth_hz > 0) || !(noise_psd_w_per_hz > 0) || !(tx_power_w > 0) ||
      !(carrier_freq_hz > 0) || !(breakpoint_distance_m > 0) || !(pathloss_exp_before > 0) ||
      !(pathloss_exp_after > 0)) {
    throw ConfigError("WiFi physical parameters must be strictly positive");
  }
  if (!(shadowing_sigma_db >= 0)) throw ConfigError("WiFi shadowing sigma must be >= 0");
  if (!(excess_loss_db >= 0)) throw ConfigError("WiFi excess loss must be >= 0");
}

void ChannelParams::validate() const {
  lifi.validate();
  wifi.validate();
}

double lambertian_order_from_half_angle(double half_angle_rad) {
  if (!(half_angle_rad > 0) || !(half_angle_rad < std::numbers::pi / 2)) {
    throw ConfigError("half-intensity angle must lie in (0, pi/2)");
  }
  return -std::numbers::ln2 / std::log(std::cos(half_angle_rad));
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
double to_db(double linear) { return 10.0 * std::log10(linear); }
double from_db(double db) { return std::pow(10.0, db / 10.0); }

double lifi_channel_gain(const Vec3& ap, const Vec3& ue, const LiFiParams& p) {
  const double dx = ap.x - ue.x;
  const double dy = ap.y - ue.y;
  const double dz = ap.z - ue.z;
  const double d2 = dx * dx + dy * dy + dz * dz;
  if (d2 == 0.0) throw DomainError("LiFi gain undefined for coincident AP and UE");
  if (dz <= 0.0) return 0.0;
  const double cos_angle = dz / std::sqrt(d2);
  // Irradiance and incidence angles coincide for a downward AP and upward PD.
  if (cos_angle < std::cos(p.fov_semiangle_rad) - 1e-15) return 0.0;
  const double cos_m = p.lambertian_order == 1.0 ? cos_angle : std::pow(cos_angle, p.lambertian_order);
  double gain = (p.lambertian_order + 1.0) * p.pd_area_m2 / (2.0 * std::numbers::pi * d2) * cos_m *
                p.optics_gain * cos_angle;
  if (p.nlos_enabled) gain *= 1.0 + p.nlos_gain_fraction;
  return gain;
}

double wifi_path_loss_db(double distance_m, const WiFiParams& p) {
  if (!(distance_m > 0)) throw DomainError("WiFi path loss undefined at zero distance");
  const double ref = 20.0 * std::log10(4.0 * std::numbers::pi * p.carrier_freq_hz / kSpeedOfLight);
  double loss;
  if (distance_m <= p.breakpoint_distance_m) {
    loss = ref + 10.0 * p.pathloss_exp_before * std::log10(distance_m);
  } else {
    loss = ref + 10.0 * p.pathloss_exp_before * std::log10(p.breakpoint_distance_m) +
           10.0 * p.pathloss_exp_after * std::log10(distance_m / p.breakpoint_distance_m);
  }
  return loss + p.excess_loss_db;
}

double wifi_channel_gain(const Vec3& ap, const Vec3& ue, const WiFiParams& p, double shadowing_db) {
  const double d = std::sqrt((ap.x - ue.x) * (ap.x - ue.x) + (ap.y - ue.y) * (ap.y - ue.y) +
                             (ap.z - ue.z) * (ap.z - ue.z));
  if (d == 0.0) throw DomainError("WiFi gain undefined for coincident AP and UE");
  return from_db(-(wifi_path_loss_db(d, p) + shadowing_db));
}

LinkGains compute_link_gains(const NetworkTopology& topology, std::span<const Vec3> ue_positions,
                             const ChannelParams& params, std::span<const double> shadowing_db) {
  LinkGains gains(topology.size(), ue_positions.size());
  for (std::size_t a = 0; a < topology.size(); ++a) {
    const AccessPoint& ap = topology.ap(a);
    for (std::size_t u = 0; u < ue_positions.size(); ++u) {
      if (ap.kind == ApKind::LiFi) {
        gains(a, u) = lifi_channel_gain(ap.position, ue_positions[u], params.lifi);
      } else {
        const double shadow = shadowing_db.empty() ? 0.0 : shadowing_db[u];
        gains(a, u) = wifi_channel_gain(ap.position, ue_positions[u], params.wifi, shadow);
      }
    }
  }
  return gains;
}

double lifi_sinr(const NetworkTopology& topology, std::size_t target_ap, std::size_t ue,
                 const LinkGains& gains, const LiFiParams& params) {
  if (!topology.is_lifi(target_ap)) throw std::invalid_argument("lifi_sinr: target AP is not LiFi");
  double interference = 0.0;
  for (std::size_t a = 0; a < topology.size(); ++a) {
    if (a == target_ap || !topology.is_lifi(a)) continue;
    interference += lifi_signal(gains(a, ue), params);
  }
  return lifi_signal(gains(target_ap, ue), params) / (lifi_noise(params) + interference);
}

double wifi_snr(const NetworkTopology& topology, std::size_t ue, const LinkGains& gains,
                const WiFiParams& params) {
  const double h2 = gains(topology.wifi_index(), ue);
  return h2 * params.tx_power_w / (params.noise_psd_w_per_hz * params.bandwidth_hz);
}

double lifi_capacity_bps(double sinr, const LiFiParams& params) {
  return params.bandwidth_hz / 2.0 * std::log2(1.0 + std::numbers::e / (2.0 * std::numbers::pi) * sinr);
}

double wifi_capacity_bps(double snr, const WiFiParams& params) {
  return params.bandwidth_hz * std::log2(1.0 + snr);
}

double link_capacity_bps(const NetworkTopology& topology, std::size_t ap, double sinr_or_snr,
                         const ChannelParams& params) {
  return topology.is_lifi(ap) ? lifi_capacity_bps(sinr_or_snr, params.lifi)
                              : wifi_capacity_bps(sinr_or_snr, params.wifi);
}

std::vector<double> snr_vector(const NetworkTopology& topology, std::size_t ue,
                               const LinkGains& gains, const ChannelParams& params) {
  std::vector<double> out(topology.size());
  for (std::size_t a = 0; a < topology.size(); ++a) {
    const double q = topology.is_lifi(a) ? lifi_sinr(topology, a, ue, gains, params.lifi)
                                         : wifi_snr(topology, ue, gains, params.wifi);
    out[a] = q > 0.0 ? std::max(to_db(q), params.snr_floor_db) : params.snr_floor_db;
  }
  return out;
}

double LinkRow::snr_db(std::size_t ap, double floor_db) const {
  const double q = quality[ap];
  return q > 0.0 ? std::max(to_db(q), floor_db) : floor_db;
}

void evaluate_links(const NetworkTopology& topology, const Vec3& ue, const ChannelParams& params,
                    double shadowing_db, LinkRow& row) {
  const std::size_t n = topology.size();
  row.gain.resize(n);
  row.quality.resize(n);
  row.capacity.resize(n);
  double total_lifi = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    const AccessPoint& ap = topology.ap(a);
    if (ap.kind == ApKind::LiFi) {
      row.gain[a] = lifi_channel_gain(ap.position, ue, params.lifi);
      total_lifi += lifi_signal(row.gain[a], params.lifi);
    } else {
      row.gain[a] = wifi_channel_gain(ap.position, ue, params.wifi, shadowing_db);
    }
  }
  const double noise = lifi_noise(params.lifi);
  for (std::size_t a = 0; a < n; ++a) {
    if (topology.is_lifi(a)) {
      const double s = lifi_signal(row.gain[a], params.lifi);
      // Guard the subtraction against rounding when one AP dominates.
      const double interference = std::max(total_lifi - s, 0.0);
      row.quality[a] = s / (noise + interference);
      row.capacity[a] = lifi_capacity_bps(row.quality[a], params.lifi);
    } else {
      row.quality[a] = row.gain[a] * params.wifi.tx_power_w /
                       (params.wifi.noise_psd_w_per_hz * params.wifi.bandwidth_hz);
      row.capacity[a] = wifi_capacity_bps(row.quality[a], params.wifi);
    }
  }
}

double link_quality(const NetworkTopology& topology, std::size_t ap, const Vec3& ue,
                    const ChannelParams& params, double shadowing_db) {
  if (!topology.is_lifi(ap)) {
    const double h2 = wifi_channel_gain(topology.ap(ap).position, ue, params.wifi, shadowing_db);
    return h2 * params.wifi.tx_power_w / (params.wifi.noise_psd_w_per_hz * params.wifi.bandwidth_hz);
  }
  double signal = 0.0;
  double interference = 0.0;
  for (std::size_t a = 0; a < topology.size(); ++a) {
    if (!topology.is_lifi(a)) continue;
    const double s = lifi_signal(lifi_channel_gain(topology.ap(a).position, ue, params.lifi), params.lifi);
    if (a == ap) {
      signal = s;
    } else {
      interference += s;
    }
  }
  return signal / (lifi_noise(params.lifi) + interference);
}

double link_capacity_at(const NetworkTopology& topology, std::size_t ap, const Vec3& ue,
                        const ChannelParams& params, double shadowing_db) {
  return link_capacity_bps(topology, ap, link_quality(topology, ap, ue, params, shadowing_db), params);
}

}  // namespace hlwnet
