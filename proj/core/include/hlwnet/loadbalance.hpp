#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hlwnet {

class NetworkTopology;
class LinkGains;
struct ChannelParams;

/// Host AP index (0-based) per UE.
using Assignment = std::vector<std::size_t>;

enum class ShareRule { DemandWeighted, Equal };
enum class UtilityKind { LogThroughput, LogNormalized };  // sum log G vs sum log(G / R)

struct LbOptions {
  ShareRule share = ShareRule::DemandWeighted;
  UtilityKind utility = UtilityKind::LogThroughput;
  double floor_bps = 1.0;  // throughput floor inside the log
};

/// Link capacity (bit/s) per (UE, AP), row-major by UE.
class CapacityMatrix {
 public:
  CapacityMatrix() = default;
  CapacityMatrix(std::size_t n_ues, std::size_t n_aps) : n_ues_(n_ues), n_aps_(n_aps), c_(n_ues * n_aps) {}

  double& operator()(std::size_t ue, std::size_t ap) { return c_[ue * n_aps_ + ap]; }
  double operator()(std::size_t ue, std::size_t ap) const { return c_[ue * n_aps_ + ap]; }
  std::span<const double> row(std::size_t ue) const { return {c_.data() + ue * n_aps_, n_aps_}; }
  std::span<double> row(std::size_t ue) { return {c_.data() + ue * n_aps_, n_aps_}; }
  std::size_t n_ues() const noexcept { return n_ues_; }
  std::size_t n_aps() const noexcept { return n_aps_; }

 private:
  std::size_t n_ues_ = 0;
  std::size_t n_aps_ = 0;
  std::vector<double> c_;
};

CapacityMatrix capacities_from_gains(const NetworkTopology& topology, const LinkGains& gains,
                                     const ChannelParams& params);

/// Time shares of the UEs attached to one AP, in input order. Sums to 1.
std::vector<double> allocate_time_shares(std::span<const double> attached_rates,
                                         ShareRule rule = ShareRule::DemandWeighted);

/// Per-UE time share at its host (the only non-zero entry of its rho column).
std::vector<double> allocation_for(const Assignment& assignment, std::span<const double> rates,
                                   std::size_t n_aps, ShareRule rule = ShareRule::DemandWeighted);

/// Instantaneous throughput rho * C per UE.
std::vector<double> ue_throughputs(const Assignment& assignment, const CapacityMatrix& caps,
                                   std::span<const double> rates, const LbOptions& options = {});

double pf_utility(const Assignment& assignment, const CapacityMatrix& caps,
                  std::span<const double> rates, const LbOptions& options = {});

/// Argmax of the quality vector; ties go to the lowest index.
std::size_t sss_select(std::span<const double> quality);

enum class UtilityEvaluation {
  Direct,       // recompute the global utility for every candidate move
  Incremental,  // utility change over the two affected APs only
};

struct SolverStats {
  int iterations = 0;  // best-response passes
  double runtime_s = 0.0;
  double utility = 0.0;
  bool converged = false;
};

struct SolveResult {
  Assignment assignment;
  std::vector<double> shares;  // per UE at its host
  SolverStats stats;
};

/// Round-robin best response on the global PF utility, UEs in ascending order.
/// A UE moves only on strict improvement. Stops after a pass without moves or
/// after `max_iters` passes (then returns the best assignment seen).
SolveResult gt_best_response_solve(const CapacityMatrix& caps, std::span<const double> rates,
                                   const Assignment& initial, int max_iters,
                                   const LbOptions& options = {},
                                   UtilityEvaluation evaluation = UtilityEvaluation::Incremental);

/// Host for `target` that maximizes the global utility with every other UE
/// held at `assignment`. Keeps the current host unless another AP is strictly
/// better.
std::size_t best_response_for(std::size_t target, const Assignment& assignment,
                              const CapacityMatrix& caps, std::span<const double> rates,
                              const LbOptions& options = {});

struct ExhaustiveResult {
  Assignment assignment;
  double utility = 0.0;
};

/// Global optimum by enumeration. Throws CapacityError if N_a^N_u > budget.
ExhaustiveResult exhaustive_solve(const CapacityMatrix& caps, std::span<const double> rates,
                                  const LbOptions& options = {}, std::uint64_t budget = 1000000);

}  // namespace hlwnet
