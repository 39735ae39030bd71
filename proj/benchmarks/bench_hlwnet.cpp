#include <benchmark/benchmark.h>

#include "hlwnet/runtime.hpp"

using namespace hlwnet;

namespace {

const NetworkTopology& topology() {
  static const NetworkTopology t = build_grid_topology(RoomGeometry{}, 4, 2.5, 0.5);
  return t;
}

struct Snapshot {
  CapacityMatrix caps;
  std::vector<double> rates;
  Assignment sss;
  std::vector<UeFeatures> features;
};

Snapshot snapshot(int n_ues) {
  MobilityConfig still;
  still.model = MobilityModel::Static;
  const ChannelParams ch;
  World w(topology(), ch, still, make_scenario(topology().room(), still, PopulationConfig{}, ch.wifi, n_ues, 42));
  Snapshot s;
  w.fill_capacities(s.caps);
  s.rates.assign(w.rates().begin(), w.rates().end());
  for (std::size_t j = 0; j < w.n_ues(); ++j) {
    s.sss.push_back(w.sss_choice(j));
    s.features.push_back(ue_features(w, j));
  }
  return s;
}

void BM_LinkEvaluation(benchmark::State& state) {
  LinkRow row;
  const ChannelParams ch;
  for (auto _ : state) {
    evaluate_links(topology(), {3.3, 6.1, 1.0}, ch, 0.0, row);
    benchmark::DoNotOptimize(row.capacity.data());
  }
}
BENCHMARK(BM_LinkEvaluation);

void BM_MsnnInference(benchmark::State& state) {
  MsnnModel m;
  m.mlp = Mlp({{3, 16, 4, 1}, {Activation::ReLU, Activation::ReLU, Activation::Sigmoid}, LossKind::MSE}, 1);
  m.input_norm = Normalizer{{-20, 0, 0}, {60, 3.14159, 10}};
  const MsnnInput in{25.0, 1.2, 3.0};
  for (auto _ : state) benchmark::DoNotOptimize(predict_interval(m, in));
}
BENCHMARK(BM_MsnnInference);

void BM_SurrogateInference(benchmark::State& state) {
  const Snapshot s = snapshot(static_cast<int>(state.range(0)));
  std::vector<bool> mask;
  for (std::size_t a = 0; a < topology().size(); ++a) mask.push_back(topology().is_lifi(a));
  SurrogateConfig cfg;
  cfg.preset_m = 100;
  SurrogateModel model(mask, cfg, 1);
  model.mark_trained();
  const std::vector<UeFeatures> cond(s.features.begin() + 1, s.features.end());
  for (auto _ : state) benchmark::DoNotOptimize(model.infer(s.features[0], cond));
}
BENCHMARK(BM_SurrogateInference)->DenseRange(10, 100, 30);

void BM_GtSolve(benchmark::State& state) {
  const Snapshot s = snapshot(static_cast<int>(state.range(0)));
  const auto eval = state.range(1) == 0 ? UtilityEvaluation::Direct : UtilityEvaluation::Incremental;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gt_best_response_solve(s.caps, s.rates, s.sss, 100, {}, eval).stats.utility);
  }
}
BENCHMARK(BM_GtSolve)->ArgsProduct({{10, 40, 70, 100}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_BestResponseForOneUe(benchmark::State& state) {
  const Snapshot s = snapshot(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(best_response_for(0, s.sss, s.caps, s.rates));
}
BENCHMARK(BM_BestResponseForOneUe)->DenseRange(10, 100, 30);

}  // namespace

BENCHMARK_MAIN();
