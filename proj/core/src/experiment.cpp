#include "hlwnet/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hlwnet/error.hpp"
#include "hlwnet/io.hpp"

namespace hlwnet {

namespace {

constexpr const char* kJournalMagic = "# hlwnet-msnn-journal 1";

std::vector<MsnnSample> read_journal(const std::string& path, const std::string& hash) {
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line) || line != kJournalMagic) throw FormatError(path + ": not a collection journal");
  if (!std::getline(in, line) || line != "# config_hash " + hash) {
    throw ConfigError(path + ": journal was written under a different collection config");
  }
  std::vector<MsnnSample> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      rows.push_back(sample_from_csv(line));
    } catch (const FormatError&) {
      if (in.peek() == EOF) break;  // torn final line from an interrupted run
      throw;
    }
  }
  return rows;
}

Environment environment(const ExperimentConfig& config, const NetworkTopology& topology, double speed) {
  Environment env{&topology, config.channel, config.mobility};
  env.mobility.mean_speed_mps = speed;
  return env;
}

double lag_for(const ExperimentConfig& config, const LagTable& table, int n_ues) {
  return config.simulate.lag == LagMode::Fixed ? table.at(n_ues) : 0.0;
}

UserCentricOptions user_options(const ExperimentConfig& config, const Models& models, double fixed_lag) {
  UserCentricOptions o;
  o.engine = config.simulate.engine;
  o.surrogate = models.surrogate;
  o.lag_mode = config.simulate.lag;
  o.fixed_lag_s = fixed_lag;
  return o;
}

ErrorStats pooled_errors(const std::vector<std::vector<double>>& parts) {
  std::vector<double> all;
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return error_stats(all);
}

}  // namespace

MsnnDatasets collect_datasets(const ExperimentConfig& config, const NetworkTopology& topology,
                              const std::string& journal_path,
                              const std::function<void(const MsnnSample&)>& on_sample) {
  const std::string hash = collection_hash(config);
  std::vector<MsnnSample> resume;
  std::ofstream journal;
  if (!journal_path.empty()) {
    if (std::filesystem::exists(journal_path)) {
      resume = read_journal(journal_path, hash);
      // rewrite without a possibly torn tail before appending
      std::ostringstream os;
      os << kJournalMagic << "\n# config_hash " << hash << '\n';
      for (const MsnnSample& s : resume) os << sample_to_csv(s) << '\n';
      write_file_atomic(journal_path, os.str());
      journal.open(journal_path, std::ios::app);
    } else {
      const std::filesystem::path parent = std::filesystem::path(journal_path).parent_path();
      if (!parent.empty()) std::filesystem::create_directories(parent);
      journal.open(journal_path);
      journal << kJournalMagic << "\n# config_hash " << hash << '\n';
    }
    if (!journal) throw std::runtime_error("cannot write journal " + journal_path);
    journal.flush();
  }
  return build_datasets(topology, config.channel, config.collection, resume, [&](const MsnnSample& s) {
    if (journal.is_open()) {
      journal << sample_to_csv(s) << '\n';
      journal.flush();
    }
    if (on_sample) on_sample(s);
  });
}

BankFit train_bank(const ExperimentConfig& config, const MsnnDatasets& datasets, const std::vector<int>& columns) {
  BankFit out;
  for (const auto& [type, rows] : datasets) {
    if (rows.empty()) throw ModelError("no samples for AP type " + type_name(type));
    MsnnTrainConfig tc = config.msnn;
    tc.train.seed = derive_seed(config.msnn.train.seed, {static_cast<std::uint64_t>(type)});
    MsnnFit fit = train_msnn(rows, columns, tc);
    out.history[type] = std::move(fit.history);
    out.bank.set(type, std::move(fit.model));
  }
  return out;
}

SurrogateFit train_surrogate(const ExperimentConfig& config, const NetworkTopology& topology) {
  PopulationConfig pop = config.collection.population;
  pop.n_ues_max = std::min<int>(pop.n_ues_max, static_cast<int>(config.surrogate.preset_m));
  pop.n_ues_min = std::min(pop.n_ues_min, pop.n_ues_max);
  MobilityConfig mob = config.mobility;
  mob.model = MobilityModel::Static;
  const std::vector<SurrogateExample> examples =
      surrogate_oracle_dataset(topology, config.channel, mob, pop, static_cast<std::size_t>(config.surrogate_samples),
                               config.surrogate.preset_m, config.run.lb, derive_seed(config.seed, {13}));
  std::vector<bool> mask;
  for (std::size_t a = 0; a < topology.size(); ++a) mask.push_back(topology.is_lifi(a));
  return surrogate_train(examples, mask, config.surrogate);
}

std::uint64_t replication_seed(const ExperimentConfig& config, double speed_mps, int n_ues, int replication) {
  return derive_seed(config.seed, {100, static_cast<std::uint64_t>(std::llround(speed_mps * 1000.0)),
                                   static_cast<std::uint64_t>(n_ues), static_cast<std::uint64_t>(replication)});
}

std::map<std::string, SimMetrics> run_schemes(const ExperimentConfig& config, const NetworkTopology& topology,
                                              const Models& models, const std::vector<std::string>& schemes,
                                              double speed_mps, int n_ues, std::uint64_t scenario_seed) {
  const Environment env = environment(config, topology, speed_mps);
  const Scenario scenario =
      make_scenario(topology.room(), env.mobility, config.collection.population, config.channel.wifi, n_ues,
                    scenario_seed);
  const RunConfig& rc = config.run;
  const SimulateConfig& sc = config.simulate;
  auto wants = [&](const char* name) { return std::find(schemes.begin(), schemes.end(), name) != schemes.end(); };
  const bool needs_ms = wants("ms-atcnn") || wants("atcnn-aver") || wants("gt-ideal") || wants("gt-practical");

  std::map<std::string, SimMetrics> out;
  const double atcnn_lag = lag_for(config, sc.atcnn_lag, n_ues);
  if (needs_ms) {
    if (models.bank == nullptr) throw ModelError("MS-ATCNN needs a trained interval bank");
    const MsnnInterval policy(*models.bank);
    out["ms-atcnn"] = run_user_centric(env, scenario, policy,
                                       user_options(config, models, atcnn_lag + lag_for(config, sc.msnn_lag, n_ues)), rc);
  }
  const double mean_interval = needs_ms ? std::max(out["ms-atcnn"].mean_interval_s, rc.tick_s) : rc.tick_s;
  if (wants("atcnn-10ms")) {
    out["atcnn-10ms"] = run_user_centric(env, scenario, ConstantInterval(0.01), user_options(config, models, atcnn_lag), rc);
  }
  if (wants("atcnn-aver")) {
    out["atcnn-aver"] =
        run_user_centric(env, scenario, ConstantInterval(mean_interval), user_options(config, models, atcnn_lag), rc);
  }
  if (wants("atcnn-lr")) {
    out["atcnn-lr"] = run_user_centric(env, scenario, LinearSpeedInterval(), user_options(config, models, atcnn_lag), rc);
  }
  if (wants("gt-ideal")) {
    out["gt-ideal"] = run_network_centric(env, scenario, mean_interval, LagMode::None, 0.0, rc);
  }
  if (wants("gt-practical")) {
    const double lag = sc.gt_lag.at(n_ues);
    if (sc.lag == LagMode::Measured) {
      out["gt-practical"] = run_network_centric(env, scenario, mean_interval, LagMode::Measured, 0.0, rc);
    } else {
      // a solver cannot start again before its previous result is out
      out["gt-practical"] = run_network_centric(env, scenario, std::max(mean_interval, lag), sc.lag, lag, rc);
    }
  }
  if (wants("sss-ttt")) out["sss-ttt"] = run_sss_ttt(env, scenario, sc.ttt_s, rc);
  if (!wants("ms-atcnn")) out.erase("ms-atcnn");
  return out;
}

std::vector<ReportRow> simulate(const ExperimentConfig& config, const NetworkTopology& topology,
                                const Models& models, const std::function<void(const ReportRow&)>& on_row) {
  std::vector<ReportRow> rows;
  const SimulateConfig& sc = config.simulate;
  for (int n_ues : sc.n_ues) {
    for (double speed : sc.speeds_mps) {
      for (int r = 0; r < sc.replications; ++r) {
        const std::uint64_t seed = replication_seed(config, speed, n_ues, r);
        std::map<std::string, SimMetrics> m = run_schemes(config, topology, models, sc.schemes, speed, n_ues, seed);
        for (const std::string& scheme : sc.schemes) {
          rows.push_back(make_row(scheme, n_ues, speed, seed, m.at(scheme)));
          if (on_row) on_row(rows.back());
        }
      }
    }
  }
  return rows;
}

std::vector<AblationRow> ablate(const ExperimentConfig& config, const MsnnDatasets& datasets) {
  struct Variant {
    const char* name;
    std::vector<int> columns;
  };
  const std::vector<Variant> variants{{"baseline", {0, 1, 2}}, {"drop-snr", {1, 2}}, {"drop-theta", {0, 2}},
                                      {"drop-speed", {0, 1}}};
  const double vf = config.msnn.train.validation_fraction;
  std::vector<AblationRow> out;
  for (const Variant& v : variants) {
    BankFit fit = train_bank(config, datasets, v.columns);
    std::vector<std::vector<double>> errs;
    AblationRow row;
    row.variant = v.name;
    for (const auto& [type, rows] : datasets) {
      errs.push_back(validation_errors(fit.bank.at(type), rows, vf));
      const TrainHistory& h = fit.history.at(type);
      row.train_loss += h.train_loss[static_cast<std::size_t>(h.best_epoch)];
      row.val_loss += h.val_loss[static_cast<std::size_t>(h.best_epoch)];
    }
    row.train_loss /= static_cast<double>(datasets.size());
    row.val_loss /= static_cast<double>(datasets.size());
    row.errors = pooled_errors(errs);
    out.push_back(row);
  }
  // one model for every AP type, rows concatenated in type order
  std::vector<MsnnSample> merged;
  for (const auto& [type, rows] : datasets) merged.insert(merged.end(), rows.begin(), rows.end());
  MsnnTrainConfig tc = config.msnn;
  tc.train.seed = derive_seed(config.msnn.train.seed, {99});
  const MsnnFit fit = train_msnn(merged, {0, 1, 2}, tc);
  AblationRow row;
  row.variant = "merged";
  row.errors = error_stats(validation_errors(fit.model, merged, vf));
  row.train_loss = fit.history.train_loss[static_cast<std::size_t>(fit.history.best_epoch)];
  row.val_loss = fit.history.val_loss[static_cast<std::size_t>(fit.history.best_epoch)];
  out.push_back(row);
  return out;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << "variant,error_mean_s,error_variance_s2,ci10_s,ci90_s,count,train_loss,val_loss\n";
  char buf[256];
  for (const AblationRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.10g,%.10g,%zu,%.10g,%.10g\n", r.variant.c_str(), r.errors.mean,
                  r.errors.variance, r.errors.ci_lo, r.errors.ci_hi, r.errors.count, r.train_loss, r.val_loss);
    os << buf;
  }
  return os.str();
}

}  // namespace hlwnet
