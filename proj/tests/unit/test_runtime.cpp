#include <doctest.h>

#include <cmath>

#include "hlwnet/error.hpp"
#include "hlwnet/runtime.hpp"

using namespace hlwnet;
using doctest::Approx;

namespace {

const NetworkTopology& topology() {
  static const NetworkTopology t = build_grid_topology(RoomGeometry{}, 4, 2.5, 0.5);
  return t;
}

Environment env_at(double speed, MobilityModel model = MobilityModel::RandomWaypoint) {
  Environment e{&topology(), ChannelParams{}, MobilityConfig{}};
  e.mobility.model = model;
  e.mobility.mean_speed_mps = speed;
  return e;
}

Scenario scenario(const Environment& e, int n, std::uint64_t seed) {
  return make_scenario(topology().room(), e.mobility, PopulationConfig{}, e.channel.wifi, n, seed);
}

RunConfig horizon(double s) {
  RunConfig c;
  c.horizon_s = s;
  return c;
}

void check_accounting(const SimMetrics& m) {
  CHECK(m.allocation_valid);
  double sum = 0;
  for (double v : m.ue_throughput_bps) {
    CHECK(v >= 0);
    sum += v;
  }
  CHECK(m.network_throughput_bps == Approx(sum).epsilon(1e-9));
  CHECK(m.handovers() == m.hho + m.vho);
}

// Handover count of one UE under time-to-trigger, from its per-tick
// strongest-signal sequence: a handover fires once a run of one AP other than
// the host has lasted ttt.
long long ttt_oracle(const std::vector<std::size_t>& choice, std::size_t host, double ttt, double tick) {
  const long long need = std::llround(ttt / tick);
  long long count = 0;
  std::size_t run_ap = host;
  long long run = 0;
  for (std::size_t c : choice) {
    if (c == host) {
      run = 0;
      run_ap = host;
      continue;
    }
    run = (c == run_ap) ? run + 1 : 1;
    run_ap = c;
    if (run - 1 >= need) {
      host = c;
      ++count;
      run = 0;
    }
  }
  return count;
}

}  // namespace

TEST_SUITE("runtime") {

TEST_CASE("lag tables") {
  const LagTable gt = LagTable::gt_default();
  CHECK(gt.at(10) == Approx(0.010));
  CHECK(gt.at(100) == Approx(0.700));
  CHECK(gt.at(std::sqrt(30.0 * 40.0)) == Approx(std::sqrt(0.060 * 0.100)));
  CHECK(gt.at(20) < gt.at(50));
  CHECK(LagTable::atcnn_default().at(10) == Approx(120e-6));
  CHECK(LagTable::atcnn_default().at(100) == Approx(184e-6));
  CHECK(LagTable::msnn_default().at(10) == Approx(2e-6));
  CHECK(LagTable::msnn_default().at(100) == Approx(2e-6));
}

TEST_CASE("every scheme keeps a valid allocation and consistent totals") {
  const Environment e = env_at(3);
  const Scenario sc = scenario(e, 20, 11);
  const RunConfig rc = horizon(1.0);
  check_accounting(run_user_centric(e, sc, ConstantInterval(0.05), {}, rc));
  check_accounting(run_user_centric(e, sc, LinearSpeedInterval(), {}, rc));
  check_accounting(run_network_centric(e, sc, 0.1, LagMode::Fixed, 0.03, rc));
  check_accounting(run_sss_ttt(e, sc, 0.16, rc));
}

TEST_CASE("constant 10 ms updates reproduce the ideal reference") {
  const Environment e = env_at(3);
  CollectionConfig cc;
  cc.mobility = e.mobility;
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const Scenario sc = scenario(e, 6, seed);
    for (std::size_t target : {0u, 3u}) {
      World w(topology(), e.channel, e.mobility, sc);
      const SolveResult base = initial_solve(w, cc.lb, 100);
      const SampleTrace tr = trace_sample(w, base.assignment, target, base.assignment[target], cc);
      // the others decide at t = 0 (a Nash point, so no change) and never again
      const ConstantInterval fast(0.01), never(10.0);
      const SimMetrics m = run_user_centric(e, sc, TargetOnlyInterval(target, fast, never), {}, horizon(2.0));
      CHECK(m.ue_throughput_bps[target] == Approx(tr.ideal.back()).epsilon(1e-12));
      CHECK(m.updates[target] == 200);
    }
  }
}

TEST_CASE("lag does not help") {
  const Environment e = env_at(5);
  double lagged = 0, fresh = 0;
  int worse = 0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Scenario sc = scenario(e, 20, seed);
    const double a = run_network_centric(e, sc, 0.2, LagMode::Fixed, 0.1, horizon(2.0)).network_throughput_bps;
    const double b = run_network_centric(e, sc, 0.2, LagMode::None, 0.0, horizon(2.0)).network_throughput_bps;
    lagged += a;
    fresh += b;
    worse += a <= b;
  }
  CHECK(lagged <= fresh);
  CHECK(worse >= 5);
}

TEST_CASE("interval equal to the horizon leaves the initial attachment") {
  const Environment e = env_at(3);
  const SimMetrics m = run_network_centric(e, scenario(e, 15, 2), 1.0, LagMode::None, 0.0, horizon(1.0));
  CHECK(m.decision_runtime_s.empty());
  CHECK(m.handovers() == 0);
  for (long long u : m.updates) CHECK(u == 1);
}

TEST_CASE("static networks do not depend on the update interval") {
  const Environment e = env_at(1, MobilityModel::Static);
  const Scenario sc = scenario(e, 20, 8);
  const double ref = run_network_centric(e, sc, 0.01, LagMode::None, 0.0, horizon(1.0)).network_throughput_bps;
  for (double interval : {0.1, 0.5, 1.0}) {
    const SimMetrics m = run_network_centric(e, sc, interval, LagMode::None, 0.0, horizon(1.0));
    CHECK(m.network_throughput_bps == Approx(ref).epsilon(1e-12));
    CHECK(m.handovers() == 0);
  }
  CHECK(run_user_centric(e, sc, ConstantInterval(0.05), {}, horizon(1.0)).network_throughput_bps ==
        Approx(ref).epsilon(1e-12));
}

TEST_CASE("time-to-trigger follows the strongest-signal history") {
  const Environment e = env_at(4);
  const RunConfig rc = horizon(3.0);
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const Scenario sc = scenario(e, 1, seed);
    World w(topology(), e.channel, e.mobility, sc);
    const std::size_t host = initial_solve(w, rc.lb, 100).assignment[0];
    std::vector<std::size_t> choice;
    for (long long k = 0; k < 3000; ++k) {
      choice.push_back(w.sss_choice(0));
      w.advance(rc.tick_s);
    }
    long long prev = -1;
    for (double ttt : {0.0, 0.02, 0.16, 0.5, 5.0}) {
      const long long got = run_sss_ttt(e, sc, ttt, rc).handovers();
      CHECK(got == ttt_oracle(choice, host, ttt, rc.tick_s));
      if (prev >= 0) CHECK(got <= prev);
      prev = got;
    }
  }
  SUBCASE("flapping shorter than the trigger time is ignored") {
    std::vector<std::size_t> flap;
    for (int k = 0; k < 1000; ++k) flap.push_back((k / 50) % 2 == 0 ? 1 : 0);
    CHECK(ttt_oracle(flap, 0, 0.16, 0.001) == 0);
    CHECK(ttt_oracle(flap, 0, 0.0, 0.001) == 20);
  }
}

TEST_CASE("recorded intervals match the schedule") {
  const Environment e = env_at(3);
  const SimMetrics m = run_user_centric(e, scenario(e, 10, 4), ConstantInterval(0.0375), {}, horizon(1.0));
  for (std::size_t j = 0; j < m.updates.size(); ++j) {
    CHECK(m.updates[j] == 27);  // decisions at 0, 37.5 ms, ... below 1 s
    CHECK(m.interval_sum_s[j] / static_cast<double>(m.updates[j]) == Approx(0.0375));
  }
  CHECK(m.mean_interval_s == Approx(0.0375));
  CHECK(m.decision_runtime_s.size() == 270);
}

TEST_CASE("static UE with a trained bank updates every 2 s") {
  CollectionConfig cc;
  cc.mobility.model = MobilityModel::Static;
  cc.population.n_ues_min = 5;
  cc.population.n_ues_max = 20;
  cc.samples_per_type = 40;
  const MsnnDatasets d = build_datasets(topology(), ChannelParams{}, cc);
  MsnnTrainConfig tc;
  tc.train.epochs = 300;
  tc.train.learning_rate = 0.01;
  tc.train.patience = 300;
  MsnnBank bank;
  for (const auto& [type, rows] : d) bank.set(type, train_msnn(rows, {0, 1, 2}, tc).model);

  const Environment e = env_at(1, MobilityModel::Static);
  Scenario sc = scenario(e, 1, 5);
  sc.motion[0].position = {1.25, 1.25};
  const SimMetrics m = run_user_centric(e, sc, MsnnInterval(bank), {}, horizon(10.0));
  CHECK(m.handovers() == 0);
  const double spacing = m.interval_sum_s[0] / static_cast<double>(m.updates[0]);
  MESSAGE("predicted spacing " << spacing);
  CHECK(spacing >= 1.95);
  CHECK(spacing <= 2.0);
  // decisions land on the first tick at or after each due time
  long long due = 0;
  for (double t = 0; std::ceil(t / 0.001 - 1e-6) * 0.001 < 10.0; t += spacing) ++due;
  CHECK(m.updates[0] == due);
}

TEST_CASE("runs are deterministic") {
  const Environment e = env_at(3);
  const Scenario sc = scenario(e, 15, 9);
  auto same = [](const SimMetrics& a, const SimMetrics& b) {
    CHECK(a.ue_throughput_bps == b.ue_throughput_bps);
    CHECK(a.hho == b.hho);
    CHECK(a.vho == b.vho);
    CHECK(a.updates == b.updates);
  };
  same(run_user_centric(e, sc, LinearSpeedInterval(), {}, horizon(1.0)),
       run_user_centric(e, sc, LinearSpeedInterval(), {}, horizon(1.0)));
  same(run_network_centric(e, sc, 0.1, LagMode::Fixed, 0.05, horizon(1.0)),
       run_network_centric(e, sc, 0.1, LagMode::Fixed, 0.05, horizon(1.0)));
  same(run_sss_ttt(e, sc, 0.16, horizon(1.0)), run_sss_ttt(e, sc, 0.16, horizon(1.0)));
}

TEST_CASE("invalid runs are rejected") {
  const Environment e = env_at(3);
  const Scenario sc = scenario(e, 3, 1);
  CHECK_THROWS_AS(ConstantInterval(0.0), ConfigError);
  CHECK_THROWS_AS(run_network_centric(e, sc, 1e-4, LagMode::None, 0.0, horizon(1.0)), ConfigError);
  CHECK_THROWS_AS(run_sss_ttt(e, sc, -1.0, horizon(1.0)), ConfigError);
  UserCentricOptions o;
  o.engine = DecisionEngine::Surrogate;
  CHECK_THROWS_AS(run_user_centric(e, sc, ConstantInterval(0.1), o, horizon(1.0)), ConfigError);
}

TEST_CASE("runtime table has one row per size") {
  const Environment e = env_at(1, MobilityModel::Static);
  const auto rows = measure_runtime(e, PopulationConfig{}, nullptr, nullptr, {5, 10}, 3, LbOptions{}, 1);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].n_ues == 5);
  CHECK(rows[1].gt_s > 0);
  CHECK(rows[1].gt_iterations >= 1);
  CHECK(rows[0].msnn_s == 0);
}

}
