// hlwnet: dataset collection, interval-model training, Monte Carlo
// simulation, ablations and report tables.
//
//   hlwnet --scale smoke collect --out runs/smoke/data
//   hlwnet --scale smoke train --data runs/smoke/data --out runs/smoke/models
//   hlwnet --scale smoke simulate --models runs/smoke/models --out runs/smoke/report.csv
//   hlwnet report runs/smoke/report.csv --out runs/smoke/tables

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hlwnet/config.hpp"
#include "hlwnet/error.hpp"
#include "hlwnet/experiment.hpp"
#include "hlwnet/io.hpp"
#include "hlwnet/report.hpp"

namespace fs = std::filesystem;
using namespace hlwnet;
using nlohmann::json;

namespace {

struct Common {
  std::string config_path;
  std::string scale;
  std::optional<std::uint64_t> seed;
  std::string lag;
  bool quiet = false;
};

ExperimentConfig resolve_config(const Common& c) {
  json j = json::object();
  if (!c.config_path.empty()) {
    try {
      j = json::parse(read_file(c.config_path));
    } catch (const json::exception& e) {
      throw ConfigError(c.config_path + ": " + e.what());
    } catch (const FormatError& e) {
      throw ConfigError(e.what());
    }
  }
  if (!c.scale.empty()) j["scale"] = c.scale;
  if (c.seed) j["seed"] = *c.seed;
  if (!c.lag.empty()) j["simulate"]["lag"] = c.lag;
  return config_from_json(j.dump());
}

// Models depend on the collection and on their own training block.
std::string training_hash(const ExperimentConfig& config, const char* block) {
  const json j = json::parse(config_to_json(config));
  return fnv1a_hex(collection_hash(config) + j.at(block).dump());
}

std::string dataset_path(const fs::path& dir, ApTypeId type) {
  return (dir / ("dataset_type_" + type_name(type) + ".csv")).string();
}
std::string model_path(const fs::path& dir, ApTypeId type) {
  return (dir / ("msnn_type_" + type_name(type) + ".model")).string();
}

MsnnDatasets load_datasets(const ExperimentConfig& config, const NetworkTopology& topology, const fs::path& dir) {
  const std::string want = collection_hash(config);
  MsnnDatasets out;
  for (ApTypeId t = 1; t <= topology.type_count(); ++t) {
    const std::string path = dataset_path(dir, t);
    if (!fs::exists(path)) throw ConfigError(path + ": missing dataset (run collect first)");
    DatasetFile f = load_dataset(path);
    if (f.config_hash != want) {
      throw ConfigError(path + ": dataset hash " + f.config_hash + " does not match config hash " + want);
    }
    out[t] = std::move(f.rows);
  }
  return out;
}

MsnnBank load_bank(const ExperimentConfig& config, const NetworkTopology& topology, const fs::path& dir) {
  const std::string want = training_hash(config, "msnn");
  MsnnBank bank;
  for (ApTypeId t = 1; t <= topology.type_count(); ++t) {
    std::string hash;
    const std::string path = model_path(dir, t);
    if (!fs::exists(path)) throw ConfigError(path + ": missing model (run train first)");
    bank.set(t, load_msnn_model(path, &hash));
    if (hash != want) throw ConfigError(path + ": model hash " + hash + " does not match config hash " + want);
  }
  return bank;
}

std::string history_csv(const TrainHistory& h) {
  std::string s = "epoch,train_loss,val_loss\n";
  char buf[96];
  for (std::size_t e = 0; e < h.train_loss.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g\n", e, h.train_loss[e],
                  e < h.val_loss.size() ? h.val_loss[e] : 0.0);
    s += buf;
  }
  return s;
}

// Mean and standard error per (scheme, N_u, speed).
std::string summary_csv(const std::vector<ReportRow>& rows) {
  using Key = std::tuple<std::string, int, double>;
  std::vector<Key> order;
  std::map<Key, std::vector<const ReportRow*>> groups;
  for (const ReportRow& r : rows) {
    Key k{r.scheme, r.n_ues, r.mean_speed_mps};
    if (!groups.count(k)) order.push_back(k);
    groups[k].push_back(&r);
  }
  std::string s = "scheme,n_ues,mean_speed_mps,runs,throughput_mbps,throughput_se_mbps,mean_interval_ms,hho,vho\n";
  char buf[256];
  for (const Key& k : order) {
    const auto& g = groups[k];
    const double n = static_cast<double>(g.size());
    double m = 0, iv = 0, hho = 0, vho = 0;
    for (const ReportRow* r : g) {
      m += r->network_throughput_bps / 1e6;
      iv += r->mean_interval_s * 1e3;
      hho += static_cast<double>(r->hho);
      vho += static_cast<double>(r->vho);
    }
    m /= n;
    double ss = 0;
    for (const ReportRow* r : g) ss += std::pow(r->network_throughput_bps / 1e6 - m, 2);
    const double se = g.size() > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
    std::snprintf(buf, sizeof buf, "%s,%d,%g,%zu,%.6g,%.6g,%.6g,%.4g,%.4g\n", std::get<0>(k).c_str(),
                  std::get<1>(k), std::get<2>(k), g.size(), m, se, iv / n, hho / n, vho / n);
    s += buf;
  }
  return s;
}

void log(const Common& c, const std::string& msg) {
  if (!c.quiet) std::cerr << msg << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid LiFi/WiFi load balancing with mobility-aware update intervals"};
  app.require_subcommand(1);
  Common common;
  app.add_option("-c,--config", common.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--scale", common.scale, "Preset the config is layered on")
      ->check(CLI::IsMember({"smoke", "paper"}));
  app.add_option("--seed", common.seed, "Override the master seed");
  app.add_option("--lag", common.lag, "Decision lag mode")->check(CLI::IsMember({"none", "fixed", "measured"}));
  app.add_flag("-q,--quiet", common.quiet, "No progress output");

  std::string out;
  std::string data_dir;
  std::string models_dir;
  std::vector<std::string> report_files;
  std::string runtime_file;
  bool with_surrogate = false;
  bool with_runtime = false;
  bool dump_config = false;

  CLI::App* collect = app.add_subcommand("collect", "Collect per-type interval datasets");
  collect->add_option("-o,--out", out, "Dataset directory")->required();

  CLI::App* train = app.add_subcommand("train", "Train the interval model bank");
  train->add_option("-d,--data", data_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  train->add_option("-o,--out", out, "Model directory")->required();
  train->add_flag("--surrogate", with_surrogate, "Also train the association surrogate");

  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo comparison of the configured schemes");
  sim->add_option("-m,--models", models_dir, "Model directory")->required()->check(CLI::ExistingDirectory);
  sim->add_option("-o,--out", out, "Report CSV")->required();
  sim->add_flag("--runtime", with_runtime, "Also measure decision runtimes vs N_u");

  CLI::App* abl = app.add_subcommand("ablate", "Input-removal and merged-type ablations");
  abl->add_option("-d,--data", data_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  abl->add_option("-o,--out", out, "Output directory")->required();

  CLI::App* rep = app.add_subcommand("report", "Derived tables from report CSVs");
  rep->add_option("files", report_files, "Report CSVs")->required()->check(CLI::ExistingFile);
  rep->add_option("--runtime", runtime_file, "Runtime CSV to pass through")->check(CLI::ExistingFile);
  rep->add_option("-o,--out", out, "Output directory")->required();

  CLI::App* cfg = app.add_subcommand("config", "Print the resolved config as JSON");
  cfg->add_flag("--hash", dump_config, "Print the config and collection hashes instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // usage problems count as config errors
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*rep) {
      std::vector<ReportRow> rows;
      for (const std::string& f : report_files) {
        std::vector<ReportRow> part = rows_from_csv(read_file(f));
        rows.insert(rows.end(), part.begin(), part.end());
      }
      const fs::path dir(out);
      write_file_atomic((dir / "throughput_vs_speed.csv").string(), throughput_vs_speed(rows));
      write_file_atomic((dir / "throughput_vs_n_ues.csv").string(), throughput_vs_n_ues(rows));
      write_file_atomic((dir / "interval_vs_speed.csv").string(), interval_vs_speed(rows));
      write_file_atomic((dir / "summary.csv").string(), summary_csv(rows));
      if (!runtime_file.empty()) write_file_atomic((dir / "runtime_vs_n_ues.csv").string(), read_file(runtime_file));
      std::cout << interval_vs_speed(rows);
      return 0;
    }

    const ExperimentConfig config = resolve_config(common);
    const NetworkTopology topology = config.topology.build();

    if (*cfg) {
      if (dump_config) {
        std::cout << "config_hash " << config_hash(config) << "\ncollection_hash " << collection_hash(config) << '\n';
      } else {
        std::cout << config_to_json(config) << '\n';
      }
      return 0;
    }

    if (*collect) {
      const fs::path dir(out);
      fs::create_directories(dir);
      const std::string hash = collection_hash(config);
      std::size_t n = 0;
      const std::size_t total = static_cast<std::size_t>(config.collection.samples_per_type) *
                                static_cast<std::size_t>(topology.type_count());
      const MsnnDatasets ds = collect_datasets(config, topology, (dir / "journal.csv").string(), [&](const MsnnSample&) {
        if (++n % 100 == 0) log(common, "collected " + std::to_string(n) + " new samples of " + std::to_string(total));
      });
      json manifest{{"config_hash", config_hash(config)}, {"collection_hash", hash}, {"types", json::object()}};
      for (const auto& [type, rows] : ds) {
        save_dataset(dataset_path(dir, type), type, rows, hash);
        manifest["types"][type_name(type)] = rows.size();
      }
      write_file_atomic((dir / "config.json").string(), config_to_json(config) + "\n");
      write_file_atomic((dir / "manifest.json").string(), manifest.dump(2) + "\n");
      log(common, "wrote " + std::to_string(ds.size()) + " datasets to " + dir.string());
      return 0;
    }

    if (*train) {
      const MsnnDatasets ds = load_datasets(config, topology, data_dir);
      const fs::path dir(out);
      const std::string hash = training_hash(config, "msnn");
      const BankFit fit = train_bank(config, ds);
      json manifest{{"config_hash", config_hash(config)}, {"model_hash", hash}, {"types", json::object()}};
      for (const auto& [type, model] : fit.bank.models()) {
        save_msnn_model(model_path(dir, type), model, type, hash);
        const TrainHistory& h = fit.history.at(type);
        write_file_atomic((dir / ("loss_type_" + type_name(type) + ".csv")).string(), history_csv(h));
        const auto best = static_cast<std::size_t>(h.best_epoch);
        manifest["types"][type_name(type)] = {
            {"best_epoch", h.best_epoch}, {"train_loss", h.train_loss[best]}, {"val_loss", h.val_loss[best]}};
      }
      if (with_surrogate) {
        log(common, "training surrogate");
        const SurrogateFit sf = train_surrogate(config, topology);
        save_surrogate((dir / "surrogate.model").string(), sf.model, training_hash(config, "surrogate"));
        write_file_atomic((dir / "loss_surrogate.csv").string(), history_csv(sf.history));
        manifest["surrogate"] = {{"train_accuracy", sf.train_accuracy}, {"val_accuracy", sf.val_accuracy}};
      }
      write_file_atomic((dir / "manifest.json").string(), manifest.dump(2) + "\n");
      std::cout << manifest.dump(2) << '\n';
      return 0;
    }

    if (*sim) {
      const MsnnBank bank = load_bank(config, topology, models_dir);
      std::optional<SurrogateModel> surrogate;
      const fs::path sp = fs::path(models_dir) / "surrogate.model";
      if (fs::exists(sp)) {
        std::string hash;
        surrogate = load_surrogate(sp.string(), &hash);
        if (hash != training_hash(config, "surrogate")) throw ConfigError(sp.string() + ": surrogate hash mismatch");
      } else if (config.simulate.engine == DecisionEngine::Surrogate) {
        throw ConfigError("engine 'surrogate' needs " + sp.string() + " (train --surrogate)");
      }
      const Models models{&bank, surrogate ? &*surrogate : nullptr};
      const std::vector<ReportRow> rows = simulate(config, topology, models, [&](const ReportRow& r) {
        if (r.scheme == config.simulate.schemes.back()) {
          char buf[128];
          std::snprintf(buf, sizeof buf, "N_u=%d v=%g seed=%llu done", r.n_ues, r.mean_speed_mps,
                        static_cast<unsigned long long>(r.seed));
          log(common, buf);
        }
      });
      write_file_atomic(out, rows_to_csv(rows));
      const fs::path base = fs::path(out).replace_extension();
      write_file_atomic(base.string() + "_summary.csv", summary_csv(rows));
      if (with_runtime) {
        Environment env{&topology, config.channel, config.mobility};
        const std::vector<RuntimeRow> rt =
            measure_runtime(env, config.collection.population, &bank, surrogate ? &*surrogate : nullptr,
                            config.simulate.runtime_sizes, config.simulate.runtime_repetitions, config.run.lb,
                            derive_seed(config.seed, {300}));
        write_file_atomic(base.string() + "_runtime.csv", runtime_vs_n_ues(rt));
      }
      std::cout << summary_csv(rows);
      return 0;
    }

    if (*abl) {
      const MsnnDatasets ds = load_datasets(config, topology, data_dir);
      const std::string csv = ablation_csv(ablate(config, ds));
      write_file_atomic((fs::path(out) / "ablation.csv").string(), csv);
      std::cout << csv;
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
