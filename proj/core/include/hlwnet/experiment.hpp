#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hlwnet/config.hpp"
#include "hlwnet/report.hpp"

namespace hlwnet {

/// Collects per-type datasets. When `journal_path` is non-empty every sample
/// is appended there as it is produced, and an existing journal with a
/// matching collection hash is resumed.
MsnnDatasets collect_datasets(const ExperimentConfig& config, const NetworkTopology& topology,
                              const std::string& journal_path = {},
                              const std::function<void(const MsnnSample&)>& on_sample = {});

struct BankFit {
  MsnnBank bank;
  std::map<ApTypeId, TrainHistory> history;
};

BankFit train_bank(const ExperimentConfig& config, const MsnnDatasets& datasets,
                   const std::vector<int>& columns = {0, 1, 2});

SurrogateFit train_surrogate(const ExperimentConfig& config, const NetworkTopology& topology);

struct Models {
  const MsnnBank* bank = nullptr;
  const SurrogateModel* surrogate = nullptr;
};

/// All configured schemes on one scenario. Schemes that are sized from the
/// MS-ATCNN mean interval (atcnn-aver, gt-ideal, gt-practical) reuse the
/// MS-ATCNN run on the same scenario.
std::map<std::string, SimMetrics> run_schemes(const ExperimentConfig& config, const NetworkTopology& topology,
                                              const Models& models, const std::vector<std::string>& schemes,
                                              double speed_mps, int n_ues, std::uint64_t scenario_seed);

std::uint64_t replication_seed(const ExperimentConfig& config, double speed_mps, int n_ues, int replication);

std::vector<ReportRow> simulate(const ExperimentConfig& config, const NetworkTopology& topology,
                                const Models& models,
                                const std::function<void(const ReportRow&)>& on_row = {});

struct AblationRow {
  std::string variant;  // baseline, drop-snr, drop-theta, drop-speed, merged
  ErrorStats errors;    // pooled over types, seconds
  double train_loss = 0.0;  // at the restored epoch, mean over models
  double val_loss = 0.0;
};

std::vector<AblationRow> ablate(const ExperimentConfig& config, const MsnnDatasets& datasets);
std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace hlwnet
