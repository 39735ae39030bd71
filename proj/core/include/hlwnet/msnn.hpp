#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hlwnet/loadbalance.hpp"
#include "hlwnet/mobility.hpp"
#include "hlwnet/neural.hpp"
#include "hlwnet/scenario.hpp"

namespace hlwnet {

constexpr double kMinIntervalS = 0.01;
constexpr double kMaxIntervalS = 2.0;

struct MsnnInput {
  double snr_db = 0.0;     // host link quality
  double theta_rad = 0.0;  // heading vs bearing to host, folded to [0, pi]
  double speed_mps = 0.0;
};

struct CollectionConfig {
  double degradation = 0.05;   // allowed throughput loss vs the 10 ms reference
  double ideal_step_s = 0.01;  // reference decision period and label grid step
  double sim_tick_s = 0.001;
  double min_interval_s = kMinIntervalS;
  double max_interval_s = kMaxIntervalS;
  int samples_per_type = 2000;
  bool global_max = false;  // largest feasible grid point instead of first violation
  MobilityConfig mobility;  // target and condition UEs
  PopulationConfig population;
  LbOptions lb;
  int gt_max_iters = 100;
  std::uint64_t seed = 1;

  void validate() const;
  int grid_points() const;
};

struct MsnnSample {
  std::uint64_t scenario = 0;  // scenario index under the collection seed
  ApTypeId type = 0;
  std::size_t host = 0;  // 0-based AP index chosen at t0
  MsnnInput input;
  double label_s = 0.0;
};

/// Average throughputs of the target on the label grid: entry n-1 covers
/// [t0, t0 + n * step).
struct SampleTrace {
  std::vector<double> held;   // decision frozen at t0
  std::vector<double> ideal;  // decision refreshed every step
};

/// Left Riemann average of f over [t0, t1) with step dt.
double riemann_average(const std::function<double(double)>& f, double t0, double t1, double dt);

/// Simulates the target with condition UEs' hosts frozen at `assignment` and
/// both decision policies from the world's current instant. The world is
/// advanced by the grid length.
SampleTrace trace_sample(World& world, const Assignment& assignment, std::size_t target,
                         std::size_t decision, const CollectionConfig& config);

/// Label on the grid (first violation, or global max if configured).
double label_from_trace(const SampleTrace& trace, const CollectionConfig& config);

/// True when held >= (1 - degradation) * ideal at grid point n (1-based).
bool constraint_holds(const SampleTrace& trace, int n, double degradation);

/// One labeled sample from scenario `index`, or nothing when the picked
/// target's type bucket is full. `wanted` lists the types still accepting
/// samples.
std::optional<MsnnSample> collect_sample(const NetworkTopology& topology,
                                         const ChannelParams& channel,
                                         const CollectionConfig& config, std::uint64_t index,
                                         const std::vector<ApTypeId>& wanted);

/// Scenario seed used for index `index`; exposed for re-simulation.
std::uint64_t collection_scenario_seed(const CollectionConfig& config, std::uint64_t index);

using MsnnDatasets = std::map<ApTypeId, std::vector<MsnnSample>>;

/// Collects until every type holds samples_per_type rows. `resume` holds rows
/// already collected (scenario indices ascending); `on_sample` sees each new row.
MsnnDatasets build_datasets(const NetworkTopology& topology, const ChannelParams& channel,
                            const CollectionConfig& config, const std::vector<MsnnSample>& resume = {},
                            const std::function<void(const MsnnSample&)>& on_sample = {});

/// Input columns: 0 = SNR, 1 = theta, 2 = speed.
struct MsnnModel {
  Mlp mlp;
  Normalizer input_norm;  // over the used columns
  std::vector<int> columns{0, 1, 2};
};

std::vector<double> msnn_features(const MsnnInput& in, const std::vector<int>& columns);
double normalize_label(double label_s);
double denormalize_label(double y);

/// T = 0.01 + y * (2 - 0.01), y the sigmoid output on normalized (clamped) inputs.
double predict_interval(const MsnnModel& model, const MsnnInput& input);

class MsnnBank {
 public:
  void set(ApTypeId type, MsnnModel model) { models_[type] = std::move(model); }
  bool has(ApTypeId type) const { return models_.count(type) != 0; }
  const MsnnModel& at(ApTypeId type) const;
  const std::map<ApTypeId, MsnnModel>& models() const noexcept { return models_; }
  double predict(ApTypeId type, const MsnnInput& input) const { return predict_interval(at(type), input); }

 private:
  std::map<ApTypeId, MsnnModel> models_;
};

struct MsnnTrainConfig {
  std::vector<std::size_t> hidden{16, 4};
  TrainConfig train;
  double speed_max_mps = 10.0;  // upper normalization bound of v
};

/// Input normalizer: SNR over the observed dB range, theta over [0, pi],
/// speed over [0, speed_max].
Normalizer msnn_input_normalizer(const std::vector<MsnnSample>& rows, const std::vector<int>& columns,
                                 double speed_max_mps);

struct MsnnFit {
  MsnnModel model;
  TrainHistory history;
};

MsnnFit train_msnn(const std::vector<MsnnSample>& rows, const std::vector<int>& columns,
                   const MsnnTrainConfig& config);

struct ErrorStats {
  double mean = 0.0;
  double variance = 0.0;  // of (predicted - label), s^2
  double ci_lo = 0.0;     // 10th percentile
  double ci_hi = 0.0;     // 90th percentile
  std::size_t count = 0;
};

ErrorStats error_stats(const std::vector<double>& errors);

/// Errors (predicted - label, seconds) on the trailing validation rows.
std::vector<double> validation_errors(const MsnnModel& model, const std::vector<MsnnSample>& rows,
                                      double validation_fraction);

// Dataset and bank files.
/// One dataset row: ap_type,snr_db,theta_rad,speed_mps,label_s,scenario,host_ap (1-based).
std::string sample_to_csv(const MsnnSample& sample);
MsnnSample sample_from_csv(const std::string& line);

void save_dataset(const std::string& path, ApTypeId type, const std::vector<MsnnSample>& rows,
                  const std::string& config_hash);
struct DatasetFile {
  ApTypeId type = 0;
  std::string config_hash;
  std::vector<MsnnSample> rows;
};
DatasetFile load_dataset(const std::string& path);

void save_msnn_model(const std::string& path, const MsnnModel& model, ApTypeId type,
                     const std::string& config_hash);
MsnnModel load_msnn_model(const std::string& path, std::string* config_hash = nullptr);

}  // namespace hlwnet
