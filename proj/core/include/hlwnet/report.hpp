#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hlwnet/runtime.hpp"

namespace hlwnet {

/// One simulation run of one scheme.
struct ReportRow {
  std::string scheme;
  int n_ues = 0;
  double mean_speed_mps = 0.0;
  std::uint64_t seed = 0;
  double network_throughput_bps = 0.0;
  double mean_interval_s = 0.0;
  long long hho = 0;
  long long vho = 0;
  long long updates = 0;
  double decision_runtime_s = 0.0;  // median over the run's decisions
};

ReportRow make_row(const std::string& scheme, int n_ues, double speed, std::uint64_t seed,
                   const SimMetrics& metrics);

std::string rows_to_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> rows_from_csv(const std::string& text);

/// Mean network throughput (Mbps) per scheme and speed.
std::string throughput_vs_speed(const std::vector<ReportRow>& rows);
/// Mean network throughput (Mbps) per scheme and N_u.
std::string throughput_vs_n_ues(const std::vector<ReportRow>& rows);
/// Mean realized update interval (ms) per scheme and speed.
std::string interval_vs_speed(const std::vector<ReportRow>& rows);
/// Median runtimes (s) per N_u.
std::string runtime_vs_n_ues(const std::vector<RuntimeRow>& rows);

}  // namespace hlwnet
