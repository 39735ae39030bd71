#include "hlwnet/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>

#include "hlwnet/error.hpp"

namespace hlwnet {

namespace {

constexpr double kTimeEps = 1e-9;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

// Attachment, per-tick throughput accounting and handover bookkeeping shared
// by every scheme.
class Tracker {
 public:
  Tracker(World& world, const RunConfig& config, Assignment initial)
      : world_(world), config_(config), assignment_(std::move(initial)) {
    const std::size_t n = world.n_ues();
    sums_.assign(n, 0.0);
    outage_until_.assign(n, -1.0);
    m_.updates.assign(n, 0);
    m_.interval_sum_s.assign(n, 0.0);
  }

  const Assignment& assignment() const noexcept { return assignment_; }
  SimMetrics& metrics() noexcept { return m_; }

  void hand_over(std::size_t ue, std::size_t ap, double t) {
    const std::size_t old = assignment_[ue];
    if (old == ap) return;
    const NetworkTopology& topo = world_.topology();
    if (topo.is_lifi(old) == topo.is_lifi(ap)) {
      ++m_.hho;
    } else {
      ++m_.vho;
    }
    assignment_[ue] = ap;
    if (config_.outage_s > 0.0) outage_until_[ue] = t + config_.outage_s;
  }

  void record_update(std::size_t ue, double interval_s) {
    ++m_.updates[ue];
    m_.interval_sum_s[ue] += interval_s;
  }

  void accumulate(double t) {
    const std::size_t n = world_.n_ues();
    const std::size_t n_aps = world_.n_aps();
    const std::vector<double> shares = allocation_for(assignment_, world_.rates(), n_aps, config_.lb.share);
    share_sum_.assign(n_aps, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t a = assignment_[j];
      if (a >= n_aps || shares[j] < 0.0 || shares[j] > 1.0 + kTimeEps) {
        m_.allocation_valid = false;
        continue;
      }
      share_sum_[a] += shares[j];
      if (t < outage_until_[j] - kTimeEps) continue;
      sums_[j] += shares[j] * world_.capacity(j, a);
    }
    for (std::size_t a = 0; a < n_aps; ++a) {
      if (share_sum_[a] != 0.0 && std::abs(share_sum_[a] - 1.0) > 1e-9) m_.allocation_valid = false;
    }
    ++ticks_;
  }

  SimMetrics finish() {
    const std::size_t n = world_.n_ues();
    m_.ue_throughput_bps.assign(n, 0.0);
    m_.network_throughput_bps = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      m_.ue_throughput_bps[j] = ticks_ > 0 ? sums_[j] / static_cast<double>(ticks_) : 0.0;
      m_.network_throughput_bps += m_.ue_throughput_bps[j];
    }
    double acc = 0.0;
    std::size_t counted = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (m_.updates[j] == 0) continue;
      acc += m_.interval_sum_s[j] / static_cast<double>(m_.updates[j]);
      ++counted;
    }
    m_.mean_interval_s = counted > 0 ? acc / static_cast<double>(counted) : 0.0;
    return std::move(m_);
  }

 private:
  World& world_;
  const RunConfig& config_;
  Assignment assignment_;
  std::vector<double> sums_;
  std::vector<double> outage_until_;
  std::vector<double> share_sum_;
  long long ticks_ = 0;
  SimMetrics m_;
};

long long tick_count(const RunConfig& config) {
  return static_cast<long long>(std::llround(config.horizon_s / config.tick_s));
}

void check_environment(const Environment& env) {
  if (env.topology == nullptr) throw ConfigError("environment has no topology");
  env.channel.validate();
  env.mobility.validate();
}

}  // namespace

ConstantInterval::ConstantInterval(double interval_s) : interval_s_(interval_s) {
  if (!(interval_s > 0.0)) throw ConfigError("interval must be positive");
}

LinearSpeedInterval::LinearSpeedInterval(double v1, double t1, double v2, double t2)
    : v1_(v1), t1_(t1), v2_(v2), t2_(t2) {
  if (!(v2 > v1)) throw ConfigError("linear interval needs v2 > v1");
}

double LinearSpeedInterval::next_interval(const IntervalQuery& q) const {
  const double t = t1_ + (t2_ - t1_) * (q.input.speed_mps - v1_) / (v2_ - v1_);
  return std::clamp(t, kMinIntervalS, kMaxIntervalS);
}

double LagTable::at(double n_ues) const {
  if (points.empty()) return 0.0;
  if (points.size() == 1) return points.front().second;
  const double x = std::log(std::max(n_ues, 1.0));
  std::size_t i = 0;
  while (i + 2 < points.size() && n_ues > points[i + 1].first) ++i;
  const double x0 = std::log(points[i].first);
  const double x1 = std::log(points[i + 1].first);
  const double y0 = std::log(points[i].second);
  const double y1 = std::log(points[i + 1].second);
  return std::exp(y0 + (y1 - y0) * (x - x0) / (x1 - x0));
}

LagTable LagTable::gt_default() {
  return {{{10, 0.010}, {20, 0.030}, {30, 0.060}, {40, 0.100}, {50, 0.160},
           {60, 0.230}, {70, 0.320}, {80, 0.430}, {90, 0.560}, {100, 0.700}}};
}

LagTable LagTable::atcnn_default() { return {{{10, 120e-6}, {100, 184e-6}}}; }

LagTable LagTable::msnn_default() { return {{{10, 2e-6}}}; }

void RunConfig::validate() const {
  if (!(tick_s > 0.0)) throw ConfigError("tick must be positive");
  if (!(horizon_s >= tick_s)) throw ConfigError("horizon must cover at least one tick");
  if (outage_s < 0.0) throw ConfigError("outage must be non-negative");
  if (gt_max_iters < 1) throw ConfigError("gt_max_iters must be at least 1");
}

SimMetrics run_user_centric(const Environment& env, const Scenario& scenario,
                            const IntervalPolicy& policy, const UserCentricOptions& options,
                            const RunConfig& config) {
  config.validate();
  check_environment(env);
  if (options.engine == DecisionEngine::Surrogate && options.surrogate == nullptr) {
    throw ConfigError("surrogate engine selected without a model");
  }
  if (options.fixed_lag_s < 0.0) throw ConfigError("lag must be non-negative");

  World world(*env.topology, env.channel, env.mobility, scenario);
  const std::size_t n = world.n_ues();
  Tracker tracker(world, config, initial_solve(world, config.lb, config.gt_max_iters).assignment);
  SimMetrics& m = tracker.metrics();

  struct Pending {
    double apply_s;
    std::size_t ue;
    std::size_t ap;
  };
  std::deque<Pending> pending;  // ordered by apply time within equal lags
  std::vector<double> t0(n, 0.0);
  CapacityMatrix caps(n, world.n_aps());
  std::vector<UeFeatures> condition;

  const long long ticks = tick_count(config);
  for (long long k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * config.tick_s;
    bool filled = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (t0[j] > t + kTimeEps) continue;
      const auto start = Clock::now();
      std::size_t host = 0;
      if (options.engine == DecisionEngine::ExactTarget) {
        if (!filled) {
          world.fill_capacities(caps);
          filled = true;
        }
        host = best_response_for(j, tracker.assignment(), caps, world.rates(), config.lb);
      } else {
        condition.clear();
        for (std::size_t i = 0; i < n; ++i) {
          if (i != j) condition.push_back(ue_features(world, i));
        }
        host = options.surrogate->infer(ue_features(world, j), condition);
      }
      IntervalQuery q;
      q.ue = j;
      q.host_type = env.topology->ap(host).type;
      q.input.snr_db = world.snr_db(j, host);
      q.input.theta_rad = heading_angle_to_ap(world.motion(j), env.topology->ap(host).position);
      q.input.speed_mps = world.motion(j).speed;
      const double interval = policy.next_interval(q);
      const double elapsed = seconds_since(start);
      m.decision_runtime_s.push_back(elapsed);
      tracker.record_update(j, interval);
      t0[j] += interval;

      double lag = 0.0;
      if (options.lag_mode == LagMode::Fixed) lag = options.fixed_lag_s;
      if (options.lag_mode == LagMode::Measured) lag = elapsed;
      if (lag <= 0.0) {
        tracker.hand_over(j, host, t);
        // later deciders in this tick see the new attachment
      } else {
        pending.push_back({t + lag, j, host});
      }
    }
    if (!pending.empty()) {
      std::stable_sort(pending.begin(), pending.end(),
                       [](const Pending& a, const Pending& b) { return a.apply_s < b.apply_s; });
      while (!pending.empty() && pending.front().apply_s <= t + kTimeEps) {
        tracker.hand_over(pending.front().ue, pending.front().ap, t);
        pending.pop_front();
      }
    }
    tracker.accumulate(t);
    world.advance(config.tick_s);
  }
  return tracker.finish();
}

SimMetrics run_network_centric(const Environment& env, const Scenario& scenario, double interval_s,
                               LagMode lag_mode, double fixed_lag_s, const RunConfig& config) {
  config.validate();
  check_environment(env);
  if (interval_s < config.tick_s - kTimeEps) throw ConfigError("interval shorter than one tick");
  if (fixed_lag_s < 0.0) throw ConfigError("lag must be non-negative");

  World world(*env.topology, env.channel, env.mobility, scenario);
  const std::size_t n = world.n_ues();
  Tracker tracker(world, config, initial_solve(world, config.lb, config.gt_max_iters).assignment);
  SimMetrics& m = tracker.metrics();
  for (std::size_t j = 0; j < n; ++j) tracker.record_update(j, interval_s);

  struct Batch {
    double apply_s;
    Assignment assignment;
  };
  std::deque<Batch> pending;
  CapacityMatrix caps(n, world.n_aps());
  const UtilityEvaluation eval =
      lag_mode == LagMode::Measured ? UtilityEvaluation::Direct : UtilityEvaluation::Incremental;
  double next_s = interval_s;

  const long long ticks = tick_count(config);
  for (long long k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * config.tick_s;
    if (next_s <= t + kTimeEps) {
      next_s += interval_s;
      world.fill_capacities(caps);
      const auto start = Clock::now();
      SolveResult r = gt_best_response_solve(caps, world.rates(), tracker.assignment(),
                                             config.gt_max_iters, config.lb, eval);
      const double elapsed = seconds_since(start);
      m.decision_runtime_s.push_back(elapsed);
      for (std::size_t j = 0; j < n; ++j) tracker.record_update(j, interval_s);
      double lag = 0.0;
      if (lag_mode == LagMode::Fixed) lag = fixed_lag_s;
      if (lag_mode == LagMode::Measured) lag = elapsed;
      pending.push_back({t + lag, std::move(r.assignment)});
    }
    while (!pending.empty() && pending.front().apply_s <= t + kTimeEps) {
      const Assignment& next = pending.front().assignment;
      for (std::size_t j = 0; j < n; ++j) tracker.hand_over(j, next[j], t);
      pending.pop_front();
    }
    tracker.accumulate(t);
    world.advance(config.tick_s);
  }
  return tracker.finish();
}

SimMetrics run_sss_ttt(const Environment& env, const Scenario& scenario, double ttt_s,
                       const RunConfig& config) {
  config.validate();
  check_environment(env);
  if (ttt_s < 0.0) throw ConfigError("ttt must be non-negative");

  World world(*env.topology, env.channel, env.mobility, scenario);
  const std::size_t n = world.n_ues();
  Tracker tracker(world, config, initial_solve(world, config.lb, config.gt_max_iters).assignment);
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> candidate(n, kNone);
  std::vector<double> since(n, 0.0);

  const long long ticks = tick_count(config);
  for (long long k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * config.tick_s;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t best = world.sss_choice(j);
      if (best == tracker.assignment()[j]) {
        candidate[j] = kNone;
        continue;
      }
      if (candidate[j] != best) {
        candidate[j] = best;
        since[j] = t;
      }
      if (t - since[j] >= ttt_s - kTimeEps) {
        tracker.hand_over(j, best, t);
        candidate[j] = kNone;
      }
    }
    tracker.accumulate(t);
    world.advance(config.tick_s);
  }
  return tracker.finish();
}

std::vector<RuntimeRow> measure_runtime(const Environment& env, const PopulationConfig& population,
                                        const MsnnBank* bank, const SurrogateModel* surrogate,
                                        const std::vector<int>& sizes, int repetitions,
                                        const LbOptions& lb, std::uint64_t seed) {
  check_environment(env);
  if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
  std::vector<RuntimeRow> rows;
  for (int n_ues : sizes) {
    RuntimeRow row;
    row.n_ues = n_ues;
    std::vector<double> msnn_t, surr_t, gt_t, gt_it;
    for (int r = 0; r < repetitions; ++r) {
      const std::uint64_t s = derive_seed(seed, {static_cast<std::uint64_t>(n_ues), static_cast<std::uint64_t>(r)});
      Scenario sc = make_scenario(env.topology->room(), env.mobility, population, env.channel.wifi, n_ues, s);
      World world(*env.topology, env.channel, env.mobility, std::move(sc));
      const std::size_t n = world.n_ues();
      CapacityMatrix caps(n, world.n_aps());
      world.fill_capacities(caps);
      Assignment init(n);
      for (std::size_t j = 0; j < n; ++j) init[j] = world.sss_choice(j);

      auto start = Clock::now();
      const SolveResult solved =
          gt_best_response_solve(caps, world.rates(), init, 100, lb, UtilityEvaluation::Direct);
      gt_t.push_back(seconds_since(start));
      gt_it.push_back(solved.stats.iterations);

      const std::size_t target = static_cast<std::size_t>(r) % n;
      const std::size_t host = solved.assignment[target];
      if (bank != nullptr) {
        MsnnInput in{world.snr_db(target, host),
                     heading_angle_to_ap(world.motion(target), env.topology->ap(host).position),
                     world.motion(target).speed};
        const ApTypeId type = env.topology->ap(host).type;
        // one call is near the clock's resolution, so time a burst
        constexpr int kBurst = 1000;
        volatile double sink = 0.0;
        start = Clock::now();
        for (int b = 0; b < kBurst; ++b) sink = bank->predict(type, in);
        (void)sink;
        msnn_t.push_back(seconds_since(start) / kBurst);
      }
      if (surrogate != nullptr && n <= surrogate->config().preset_m) {
        const UeFeatures tf = ue_features(world, target);
        std::vector<UeFeatures> cond;
        for (std::size_t i = 0; i < n; ++i) {
          if (i != target) cond.push_back(ue_features(world, i));
        }
        start = Clock::now();
        volatile std::size_t sink = surrogate->infer(tf, cond);
        (void)sink;
        surr_t.push_back(seconds_since(start));
      }
    }
    row.msnn_s = median(msnn_t);
    row.surrogate_s = median(surr_t);
    row.gt_s = median(gt_t);
    row.gt_iterations = median(gt_it);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hlwnet
