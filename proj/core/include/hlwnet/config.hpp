#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hlwnet/msnn.hpp"
#include "hlwnet/runtime.hpp"
#include "hlwnet/surrogate.hpp"
#include "hlwnet/topology.hpp"

namespace hlwnet {

struct TopologyConfig {
  RoomGeometry room;
  int grid_n = 4;
  double separation_m = 2.5;
  double wifi_height_m = 0.5;
  bool per_ap_types = false;  // one interval model per AP instead of per type

  NetworkTopology build() const;
};

struct SimulateConfig {
  std::vector<std::string> schemes{"ms-atcnn", "atcnn-10ms", "atcnn-aver", "atcnn-lr",
                                   "gt-ideal", "gt-practical", "sss-ttt"};
  std::vector<double> speeds_mps{1, 2, 3, 4, 5};
  std::vector<int> n_ues{50};
  int replications = 20;
  double ttt_s = 0.16;
  LagMode lag = LagMode::Fixed;
  LagTable gt_lag = LagTable::gt_default();
  LagTable atcnn_lag = LagTable::atcnn_default();
  LagTable msnn_lag = LagTable::msnn_default();
  DecisionEngine engine = DecisionEngine::ExactTarget;
  std::vector<int> runtime_sizes{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  int runtime_repetitions = 100;
};

struct ExperimentConfig {
  std::string scale = "paper";
  std::uint64_t seed = 1;
  TopologyConfig topology;
  ChannelParams channel;
  MobilityConfig mobility;      // model parameters; speeds come from the run
  CollectionConfig collection;  // its mobility = `mobility` at the collection speed
  MsnnTrainConfig msnn;
  SurrogateConfig surrogate;
  int surrogate_samples = 2000;
  RunConfig run;
  SimulateConfig simulate;

  void validate() const;
};

/// Table-scale defaults ("paper") or a reduced 2x2 LiFi grid ("smoke").
ExperimentConfig preset_config(const std::string& scale);

/// Keys present in `json` override the preset named by its "scale" key
/// (default "paper"). Unknown keys are rejected with ConfigError.
ExperimentConfig config_from_json(const std::string& json);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);

/// FNV-1a over the canonical JSON of the whole config, and of the parts that
/// determine a collected dataset.
std::string config_hash(const ExperimentConfig& config);
std::string collection_hash(const ExperimentConfig& config);
std::string fnv1a_hex(const std::string& text);

std::string lag_mode_name(LagMode mode);
LagMode parse_lag_mode(const std::string& name);

}  // namespace hlwnet
