#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hlwnet/loadbalance.hpp"
#include "hlwnet/msnn.hpp"
#include "hlwnet/scenario.hpp"
#include "hlwnet/surrogate.hpp"

namespace hlwnet {

struct IntervalQuery {
  std::size_t ue = 0;
  ApTypeId host_type = 0;  // type of the host chosen by this decision
  MsnnInput input;
};

/// Decides when a UE runs its next load-balancing decision.
class IntervalPolicy {
 public:
  virtual ~IntervalPolicy() = default;
  virtual double next_interval(const IntervalQuery& query) const = 0;
};

class ConstantInterval final : public IntervalPolicy {
 public:
  explicit ConstantInterval(double interval_s);
  double next_interval(const IntervalQuery&) const override { return interval_s_; }

 private:
  double interval_s_;
};

class MsnnInterval final : public IntervalPolicy {
 public:
  explicit MsnnInterval(const MsnnBank& bank) : bank_(&bank) {}
  double next_interval(const IntervalQuery& q) const override { return bank_->predict(q.host_type, q.input); }

 private:
  const MsnnBank* bank_;
};

/// Linear in speed through (v1, t1) and (v2, t2), clamped to [0.01, 2] s.
class LinearSpeedInterval final : public IntervalPolicy {
 public:
  LinearSpeedInterval(double v1 = 1.0, double t1 = 2.0, double v2 = 10.0, double t2 = 0.01);
  double next_interval(const IntervalQuery& q) const override;

 private:
  double v1_, t1_, v2_, t2_;
};

/// `target_policy` for one UE, `others` for the rest.
class TargetOnlyInterval final : public IntervalPolicy {
 public:
  TargetOnlyInterval(std::size_t target, const IntervalPolicy& target_policy, const IntervalPolicy& others)
      : target_(target), target_policy_(&target_policy), others_(&others) {}
  double next_interval(const IntervalQuery& q) const override {
    return q.ue == target_ ? target_policy_->next_interval(q) : others_->next_interval(q);
  }

 private:
  std::size_t target_;
  const IntervalPolicy* target_policy_;
  const IntervalPolicy* others_;
};

enum class LagMode { None, Fixed, Measured };

/// Algorithm runtime as a function of N_u, log-log interpolated between
/// points and extrapolated from the end segments.
struct LagTable {
  std::vector<std::pair<double, double>> points;  // (N_u, seconds), ascending N_u

  double at(double n_ues) const;
  static LagTable gt_default();      // 10 ms at 10 UEs .. 700 ms at 100 UEs
  static LagTable atcnn_default();   // 120 us .. 184 us
  static LagTable msnn_default();    // 2 us flat
};

struct RunConfig {
  double tick_s = 0.001;
  double horizon_s = 10.0;
  double outage_s = 0.0;  // zero throughput after each handover
  LbOptions lb;
  int gt_max_iters = 100;

  void validate() const;
};

struct SimMetrics {
  std::vector<double> ue_throughput_bps;  // time averages
  double network_throughput_bps = 0.0;
  long long hho = 0;
  long long vho = 0;
  std::vector<long long> updates;      // decisions per UE (feedback proxy)
  std::vector<double> interval_sum_s;  // sum of scheduled intervals per UE
  double mean_interval_s = 0.0;        // mean over UEs of interval_sum / updates
  std::vector<double> decision_runtime_s;
  bool allocation_valid = true;        // one host per UE and share simplex at every tick

  long long handovers() const noexcept { return hho + vho; }
};

enum class DecisionEngine { ExactTarget, Surrogate };

struct UserCentricOptions {
  DecisionEngine engine = DecisionEngine::ExactTarget;
  const SurrogateModel* surrogate = nullptr;
  LagMode lag_mode = LagMode::None;
  double fixed_lag_s = 0.0;
};

struct Environment {
  const NetworkTopology* topology = nullptr;
  ChannelParams channel;
  MobilityConfig mobility;
};

/// Per-UE decisions at UE-specific times; the next time comes from `policy`.
SimMetrics run_user_centric(const Environment& env, const Scenario& scenario,
                            const IntervalPolicy& policy, const UserCentricOptions& options,
                            const RunConfig& config);

/// Full GT solve for every UE each `interval_s`, applied `lag` later.
SimMetrics run_network_centric(const Environment& env, const Scenario& scenario, double interval_s,
                               LagMode lag_mode, double fixed_lag_s, const RunConfig& config);

/// Strongest-signal selection with time-to-trigger.
SimMetrics run_sss_ttt(const Environment& env, const Scenario& scenario, double ttt_s,
                       const RunConfig& config);

struct RuntimeRow {
  int n_ues = 0;
  double msnn_s = 0.0;       // median single inference (averaged over a burst)
  double surrogate_s = 0.0;  // median single target decision
  double gt_s = 0.0;         // median full solve (direct utility evaluation)
  double gt_iterations = 0.0;
};

/// Medians over `repetitions` invocations per size. Null models are skipped.
std::vector<RuntimeRow> measure_runtime(const Environment& env, const PopulationConfig& population,
                                        const MsnnBank* bank, const SurrogateModel* surrogate,
                                        const std::vector<int>& sizes, int repetitions,
                                        const LbOptions& lb, std::uint64_t seed);

}  // namespace hlwnet
