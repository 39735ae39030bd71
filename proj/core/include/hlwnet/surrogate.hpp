#pragma once

#include <cstdint>
#include <vector>

#include "hlwnet/loadbalance.hpp"
#include "hlwnet/neural.hpp"
#include "hlwnet/scenario.hpp"

namespace hlwnet {

/// x_j: per-AP link quality (dB) and required rate.
struct UeFeatures {
  std::vector<double> snr_db;
  double rate_bps = 0.0;
};

/// Condition UEs in canonical order (descending best SNR, then
/// lexicographic) followed by sentinel rows (floor SNR, zero rate) up to M-1.
/// Throws CapacityError when 1 + condition.size() > M.
std::vector<UeFeatures> map_to_preset_count(std::vector<UeFeatures> condition, std::size_t preset_m,
                                            std::size_t n_aps, double floor_db);

struct SurrogateConfig {
  std::size_t preset_m = 20;
  std::size_t hidden = 16;
  double snr_floor_db = -20.0;
  double snr_ceiling_db = 60.0;
  double rate_scale_bps = 100e6;
  TrainConfig train{.epochs = 150, .batch_size = 16, .learning_rate = 1e-3,
                    .validation_fraction = 0.2, .patience = 25, .seed = 1};
};

/// Target-conditioned AP selector. For every AP a, a target encoder (target's
/// link to a, rate) and a condition encoder (condition load attributed to a)
/// feed a combiner that scores a; the scores go through a softmax over APs.
/// Weights are shared across APs.
class SurrogateModel {
 public:
  SurrogateModel() = default;
  /// `lifi_mask[a]` tells which APs are LiFi; condition UEs are attributed to
  /// their strongest LiFi AP when aggregating load.
  SurrogateModel(std::vector<bool> lifi_mask, const SurrogateConfig& config, std::uint64_t seed);

  bool trained() const noexcept { return trained_; }
  std::size_t n_aps() const noexcept { return lifi_mask_.size(); }
  const SurrogateConfig& config() const noexcept { return config_; }

  /// Encoder inputs for one decision, one row per AP.
  std::vector<std::vector<double>> target_input(const UeFeatures& target) const;
  std::vector<std::vector<double>> condition_input(const std::vector<UeFeatures>& padded) const;
  /// Fills the target-dependent columns of the condition rows.
  void add_join_cost(const UeFeatures& target, std::vector<std::vector<double>>& cond) const;

  std::vector<double> probabilities(const UeFeatures& target,
                                    const std::vector<UeFeatures>& condition) const;
  /// Host AP index for the target. Throws ModelError when untrained.
  std::size_t infer(const UeFeatures& target, const std::vector<UeFeatures>& condition) const;

  Mlp& target_encoder() { return target_enc_; }
  const Mlp& target_encoder() const { return target_enc_; }
  const Mlp& condition_encoder() const { return cond_enc_; }
  const Mlp& head() const { return head_; }
  const std::vector<bool>& lifi_mask() const noexcept { return lifi_mask_; }
  Mlp& condition_encoder() { return cond_enc_; }
  Mlp& head() { return head_; }
  void mark_trained() { trained_ = true; }

 private:
  std::vector<double> forward_inputs(const std::vector<std::vector<double>>& t,
                                     const std::vector<std::vector<double>>& c) const;

  std::vector<bool> lifi_mask_;
  SurrogateConfig config_;
  Mlp target_enc_;
  Mlp cond_enc_;
  Mlp head_;
  bool trained_ = false;
};

struct SurrogateExample {
  UeFeatures target;
  std::vector<UeFeatures> condition;
  std::size_t label = 0;  // oracle AP index
};

struct SurrogateFit {
  SurrogateModel model;
  TrainHistory history;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
};

SurrogateFit surrogate_train(const std::vector<SurrogateExample>& examples,
                             const std::vector<bool>& lifi_mask, const SurrogateConfig& config);

double surrogate_accuracy(const SurrogateModel& model, const std::vector<SurrogateExample>& examples,
                          std::size_t begin, std::size_t end);

/// Features of UE `ue` from the world's current links.
UeFeatures ue_features(World& world, std::size_t ue);

/// Oracle decisions on random snapshots: GT solve from SSS, one random target
/// per snapshot labeled with its GT host.
std::vector<SurrogateExample> surrogate_oracle_dataset(const NetworkTopology& topology,
                                                       const ChannelParams& channel,
                                                       const MobilityConfig& mobility,
                                                       const PopulationConfig& population,
                                                       std::size_t count, std::size_t preset_m,
                                                       const LbOptions& lb, std::uint64_t seed);

void save_surrogate(const std::string& path, const SurrogateModel& model, const std::string& config_hash);
SurrogateModel load_surrogate(const std::string& path, std::string* config_hash = nullptr);

}  // namespace hlwnet
