#include "hlwnet/loadbalance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hlwnet/channel.hpp"
#include "hlwnet/error.hpp"

namespace hlwnet {

namespace {

constexpr double kMoveTol = 1e-9;

void check_sizes(const CapacityMatrix& caps, std::span<const double> rates) {
  if (caps.n_ues() != rates.size()) {
    throw std::invalid_argument("capacity matrix and rate vector disagree on UE count");
  }
}

double utility_term(double share, double capacity, double rate, const LbOptions& o) {
  double u = std::log(std::max(share * capacity, o.floor_bps));
  if (o.utility == UtilityKind::LogNormalized) u -= std::log(rate);
  return u;
}

// Per-AP member bookkeeping for incremental evaluation.
class ApLoads {
 public:
  ApLoads(const CapacityMatrix& caps, std::span<const double> rates, const Assignment& a,
          const LbOptions& o)
      : caps_(caps), rates_(rates), o_(o), members_(caps.n_aps()), sum_(caps.n_aps(), 0.0),
        util_(caps.n_aps(), 0.0) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      members_[a[j]].push_back(j);
      sum_[a[j]] += rates_[j];
    }
    for (std::size_t ap = 0; ap < members_.size(); ++ap) util_[ap] = contribution(ap, npos, npos);
  }

  // Utility of AP `ap` with `removed` taken out and `added` put in (npos: none).
  double contribution(std::size_t ap, std::size_t removed, std::size_t added) const {
    double s = sum_[ap];
    std::size_t n = members_[ap].size();
    if (removed != npos) {
      s -= rates_[removed];
      --n;
    }
    if (added != npos) {
      s += rates_[added];
      ++n;
    }
    if (n == 0) return 0.0;
    const double inv_s = 1.0 / s;
    const double equal_share = 1.0 / static_cast<double>(n);
    double u = 0.0;
    for (std::size_t j : members_[ap]) {
      if (j == removed) continue;
      const double share = o_.share == ShareRule::Equal ? equal_share : rates_[j] * inv_s;
      u += utility_term(share, caps_(j, ap), rates_[j], o_);
    }
    if (added != npos) {
      const double share = o_.share == ShareRule::Equal ? equal_share : rates_[added] * inv_s;
      u += utility_term(share, caps_(added, ap), rates_[added], o_);
    }
    return u;
  }

  // Best AP for `k` currently at `host`; returns host unless strictly better.
  std::size_t best_for(std::size_t k, std::size_t host) const {
    const double base = util_[host];
    const double host_without = contribution(host, k, npos);
    std::size_t best = host;
    double best_gain = kMoveTol;
    for (std::size_t b = 0; b < members_.size(); ++b) {
      if (b == host) continue;
      const double gain = host_without - base + contribution(b, npos, k) - util_[b];
      if (gain > best_gain) {
        best_gain = gain;
        best = b;
      }
    }
    return best;
  }

  void move(std::size_t k, std::size_t from, std::size_t to) {
    auto& m = members_[from];
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] == k) {
        m.erase(m.begin() + static_cast<std::ptrdiff_t>(i));
        break;
      }
    }
    sum_[from] -= rates_[k];
    // Keep member lists sorted so floating-point sums do not depend on history.
    auto& t = members_[to];
    t.insert(std::upper_bound(t.begin(), t.end(), k), k);
    sum_[to] = 0.0;
    for (std::size_t j : t) sum_[to] += rates_[j];
    sum_[from] = 0.0;
    for (std::size_t j : m) sum_[from] += rates_[j];
    util_[from] = contribution(from, npos, npos);
    util_[to] = contribution(to, npos, npos);
  }

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

 private:
  const CapacityMatrix& caps_;
  std::span<const double> rates_;
  const LbOptions& o_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<double> sum_;
  std::vector<double> util_;
};

std::size_t best_direct(std::size_t k, Assignment& a, const CapacityMatrix& caps,
                        std::span<const double> rates, const LbOptions& o) {
  const std::size_t host = a[k];
  const double base = pf_utility(a, caps, rates, o);
  std::size_t best = host;
  double best_gain = kMoveTol;
  for (std::size_t b = 0; b < caps.n_aps(); ++b) {
    if (b == host) continue;
    a[k] = b;
    const double gain = pf_utility(a, caps, rates, o) - base;
    if (gain > best_gain) {
      best_gain = gain;
      best = b;
    }
  }
  a[k] = host;
  return best;
}

}  // namespace

CapacityMatrix capacities_from_gains(const NetworkTopology& topology, const LinkGains& gains,
                                     const ChannelParams& params) {
  CapacityMatrix caps(gains.n_ues(), gains.n_aps());
  for (std::size_t u = 0; u < gains.n_ues(); ++u) {
    for (std::size_t a = 0; a < gains.n_aps(); ++a) {
      const double q = topology.is_lifi(a) ? lifi_sinr(topology, a, u, gains, params.lifi)
                                           : wifi_snr(topology, u, gains, params.wifi);
      caps(u, a) = link_capacity_bps(topology, a, q, params);
    }
  }
  return caps;
}

std::vector<double> allocate_time_shares(std::span<const double> attached_rates, ShareRule rule) {
  if (attached_rates.empty()) throw std::invalid_argument("no UEs attached");
  std::vector<double> shares(attached_rates.size());
  if (rule == ShareRule::Equal) {
    std::fill(shares.begin(), shares.end(), 1.0 / static_cast<double>(shares.size()));
    return shares;
  }
  double total = 0.0;
  for (double r : attached_rates) {
    if (!(r > 0.0)) throw std::invalid_argument("required rates must be positive");
    total += r;
  }
  for (std::size_t i = 0; i < shares.size(); ++i) shares[i] = attached_rates[i] / total;
  return shares;
}

std::vector<double> allocation_for(const Assignment& assignment, std::span<const double> rates,
                                   std::size_t n_aps, ShareRule rule) {
  std::vector<double> sum(n_aps, 0.0);
  std::vector<std::size_t> count(n_aps, 0);
  for (std::size_t j = 0; j < assignment.size(); ++j) {
    sum[assignment[j]] += rates[j];
    ++count[assignment[j]];
  }
  std::vector<double> shares(assignment.size());
  for (std::size_t j = 0; j < assignment.size(); ++j) {
    const std::size_t a = assignment[j];
    shares[j] = rule == ShareRule::Equal ? 1.0 / static_cast<double>(count[a]) : rates[j] / sum[a];
  }
  return shares;
}

std::vector<double> ue_throughputs(const Assignment& assignment, const CapacityMatrix& caps,
                                   std::span<const double> rates, const LbOptions& options) {
  check_sizes(caps, rates);
  std::vector<double> out = allocation_for(assignment, rates, caps.n_aps(), options.share);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] *= caps(j, assignment[j]);
  return out;
}

double pf_utility(const Assignment& assignment, const CapacityMatrix& caps,
                  std::span<const double> rates, const LbOptions& options) {
  check_sizes(caps, rates);
  const std::vector<double> shares = allocation_for(assignment, rates, caps.n_aps(), options.share);
  double u = 0.0;
  for (std::size_t j = 0; j < assignment.size(); ++j) {
    u += utility_term(shares[j], caps(j, assignment[j]), rates[j], options);
  }
  return u;
}

std::size_t sss_select(std::span<const double> quality) {
  if (quality.empty()) throw std::invalid_argument("empty quality vector");
  std::size_t best = 0;
  for (std::size_t a = 1; a < quality.size(); ++a) {
    if (quality[a] > quality[best]) best = a;
  }
  return best;
}

SolveResult gt_best_response_solve(const CapacityMatrix& caps, std::span<const double> rates,
                                   const Assignment& initial, int max_iters,
                                   const LbOptions& options, UtilityEvaluation evaluation) {
  check_sizes(caps, rates);
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (initial.size() != rates.size()) throw std::invalid_argument("initial assignment size mismatch");
  const auto start = std::chrono::steady_clock::now();
  SolveResult result;
  result.assignment = initial;
  Assignment& a = result.assignment;
  if (evaluation == UtilityEvaluation::Incremental) {
    ApLoads loads(caps, rates, a, options);
    while (result.stats.iterations < max_iters) {
      ++result.stats.iterations;
      bool moved = false;
      for (std::size_t k = 0; k < a.size(); ++k) {
        const std::size_t to = loads.best_for(k, a[k]);
        if (to != a[k]) {
          loads.move(k, a[k], to);
          a[k] = to;
          moved = true;
        }
      }
      if (!moved) {
        result.stats.converged = true;
        break;
      }
    }
  } else {
    while (result.stats.iterations < max_iters) {
      ++result.stats.iterations;
      bool moved = false;
      for (std::size_t k = 0; k < a.size(); ++k) {
        const std::size_t to = best_direct(k, a, caps, rates, options);
        if (to != a[k]) {
          a[k] = to;
          moved = true;
        }
      }
      if (!moved) {
        result.stats.converged = true;
        break;
      }
    }
  }
  if (a.empty()) result.stats.converged = true;
  result.shares = allocation_for(a, rates, caps.n_aps(), options.share);
  result.stats.utility = pf_utility(a, caps, rates, options);
  result.stats.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::size_t best_response_for(std::size_t target, const Assignment& assignment,
                              const CapacityMatrix& caps, std::span<const double> rates,
                              const LbOptions& options) {
  check_sizes(caps, rates);
  ApLoads loads(caps, rates, assignment, options);
  return loads.best_for(target, assignment.at(target));
}

ExhaustiveResult exhaustive_solve(const CapacityMatrix& caps, std::span<const double> rates,
                                  const LbOptions& options, std::uint64_t budget) {
  check_sizes(caps, rates);
  const std::size_t n_aps = caps.n_aps();
  const std::size_t n_ues = caps.n_ues();
  std::uint64_t total = 1;
  for (std::size_t j = 0; j < n_ues; ++j) {
    if (total > budget / n_aps) throw CapacityError("exhaustive search exceeds budget");
    total *= n_aps;
  }
  if (total > budget) throw CapacityError("exhaustive search exceeds budget");
  ExhaustiveResult best;
  best.utility = -std::numeric_limits<double>::infinity();
  Assignment a(n_ues, 0);
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    for (std::size_t j = 0; j < n_ues; ++j) {
      a[j] = static_cast<std::size_t>(c % n_aps);
      c /= n_aps;
    }
    const double u = pf_utility(a, caps, rates, options);
    if (u > best.utility) {
      best.utility = u;
      best.assignment = a;
    }
  }
  return best;
}

}  // namespace hlwnet
