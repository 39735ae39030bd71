#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "hlwnet/topology.hpp"

namespace hlwnet {

/// Optical downlink constants. The default beam has a 15 deg half-intensity
/// angle and the receiver a 60 deg FOV.
struct LiFiParams {
  double bandwidth_hz = 20e6;
  double noise_psd_a2_per_hz = 1e-21;
  double responsivity_a_per_w = 0.53;
  double modulated_power_w = 3.0;
  double lambertian_order = 19.993727358517113;  // m = -ln 2 / ln cos(half-intensity angle)
  double pd_area_m2 = 1e-4;
  double fov_semiangle_rad = std::numbers::pi / 3.0;
  double optics_gain = 1.0;
  bool nlos_enabled = false;
  double nlos_gain_fraction = 0.0;

  void validate() const;
};

/// Lambertian order for a given half-intensity semi-angle.
double lambertian_order_from_half_angle(double half_angle_rad);

struct WiFiParams {
  double bandwidth_hz = 20e6;
  double noise_psd_w_per_hz = 3.9810717055349565e-21;  // -174 dBm/Hz
  double tx_power_w = 0.1;                               // 20 dBm
  double carrier_freq_hz = 2.4e9;
  double breakpoint_distance_m = 5.0;
  double pathloss_exp_before = 2.0;
  double pathloss_exp_after = 3.5;
  double shadowing_sigma_db = 0.0;
  double excess_loss_db = 12.0;  // walls, body blockage and implementation loss

  void validate() const;
};

struct ChannelParams {
  LiFiParams lifi;
  WiFiParams wifi;
  double snr_floor_db = -20.0;

  void validate() const;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double to_db(double linear);
double from_db(double db);

/// Lambertian LoS DC gain between a ceiling AP facing down and an upward-facing
/// receiver; zero outside the receiver field of view or when the UE is not
/// below the AP. Throws DomainError for coincident positions.
double lifi_channel_gain(const Vec3& ap, const Vec3& ue, const LiFiParams& params);

/// Path loss in dB of the breakpoint log-distance model (incl. excess loss).
double wifi_path_loss_db(double distance_m, const WiFiParams& params);

/// Power gain |H|^2 of the WiFi link. `shadowing_db` is a per-UE draw added to
/// the path loss (0 when shadowing is disabled).
double wifi_channel_gain(const Vec3& ap, const Vec3& ue, const WiFiParams& params,
                         double shadowing_db = 0.0);

/// Channel gain of every (AP, UE) pair, row-major by AP.
class LinkGains {
 public:
  LinkGains(std::size_t n_aps, std::size_t n_ues) : n_aps_(n_aps), n_ues_(n_ues), g_(n_aps * n_ues) {}

  double& operator()(std::size_t ap, std::size_t ue) { return g_[ap * n_ues_ + ue]; }
  double operator()(std::size_t ap, std::size_t ue) const { return g_[ap * n_ues_ + ue]; }
  std::size_t n_aps() const noexcept { return n_aps_; }
  std::size_t n_ues() const noexcept { return n_ues_; }

 private:
  std::size_t n_aps_;
  std::size_t n_ues_;
  std::vector<double> g_;
};

LinkGains compute_link_gains(const NetworkTopology& topology, std::span<const Vec3> ue_positions,
                             const ChannelParams& params, std::span<const double> shadowing_db = {});

/// SINR of LiFi AP `target_ap` at `ue`; every other LiFi AP interferes.
double lifi_sinr(const NetworkTopology& topology, std::size_t target_ap, std::size_t ue,
                 const LinkGains& gains, const LiFiParams& params);

/// SNR of the (single) WiFi AP at `ue`.
double wifi_snr(const NetworkTopology& topology, std::size_t ue, const LinkGains& gains,
                const WiFiParams& params);

double lifi_capacity_bps(double sinr, const LiFiParams& params);
double wifi_capacity_bps(double snr, const WiFiParams& params);
double link_capacity_bps(const NetworkTopology& topology, std::size_t ap, double sinr_or_snr,
                         const ChannelParams& params);

/// Per-AP link quality of `ue` in dB, floored at `params.snr_floor_db`.
std::vector<double> snr_vector(const NetworkTopology& topology, std::size_t ue,
                               const LinkGains& gains, const ChannelParams& params);

/// Everything the simulators need about one UE at one instant.
struct LinkRow {
  std::vector<double> gain;      // per AP
  std::vector<double> quality;   // linear SINR (LiFi) / SNR (WiFi)
  std::vector<double> capacity;  // bit/s

  double snr_db(std::size_t ap, double floor_db) const;
};

/// Fills `row` for a UE at `ue` (all APs).
void evaluate_links(const NetworkTopology& topology, const Vec3& ue, const ChannelParams& params,
                    double shadowing_db, LinkRow& row);

/// Linear SINR/SNR of one AP at `ue` without building a full row.
double link_quality(const NetworkTopology& topology, std::size_t ap, const Vec3& ue,
                    const ChannelParams& params, double shadowing_db = 0.0);

/// Capacity of one AP at `ue`; cost is one LiFi sweep for LiFi APs.
double link_capacity_at(const NetworkTopology& topology, std::size_t ap, const Vec3& ue,
                        const ChannelParams& params, double shadowing_db = 0.0);

}  // namespace hlwnet
