#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "hlwnet/error.hpp"
#include "hlwnet/experiment.hpp"
#include "hlwnet/io.hpp"

using namespace hlwnet;
using doctest::Approx;

namespace {

std::filesystem::path scratch(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

ExperimentConfig tiny() {
  ExperimentConfig c = preset_config("smoke");
  c.simulate.speeds_mps = {1, 4};
  c.simulate.replications = 1;
  c.run.horizon_s = 1.0;
  return c;
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("config survives a JSON round trip") {
  for (const char* scale : {"paper", "smoke"}) {
    const ExperimentConfig a = preset_config(scale);
    const std::string json = config_to_json(a);
    const ExperimentConfig b = config_from_json(json);
    CHECK(config_to_json(b) == json);
    CHECK(config_hash(a) == config_hash(b));
  }
}

TEST_CASE("config overrides and rejections") {
  const ExperimentConfig c = config_from_json(R"({"scale": "smoke", "seed": 9, "simulate": {"replications": 3}})");
  CHECK(c.seed == 9);
  CHECK(c.simulate.replications == 3);
  CHECK(c.scale == "smoke");
  CHECK(config_hash(c) != config_hash(preset_config("smoke")));
  CHECK_THROWS_AS(config_from_json(R"({"sed": 9})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"channel": {"lifi": {"fov_degrees": 60, "bogus": 1}}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"scale": "huge"})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"run": {"tick_s": -1}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{not json"), ConfigError);
}

TEST_CASE("collection hash ignores simulation settings") {
  ExperimentConfig a = preset_config("smoke");
  ExperimentConfig b = a;
  b.simulate.replications = 99;
  CHECK(collection_hash(a) == collection_hash(b));
  b.collection.degradation = 0.1;
  CHECK(collection_hash(a) != collection_hash(b));
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("report rows survive CSV") {
  std::vector<ReportRow> rows(2);
  rows[0] = {"ms-atcnn", 50, 2.5, 123456789012345ULL, 1.7e9, 0.443, 3, 4, 120, 1.5e-4};
  rows[1] = {"sss-ttt", 10, 1, 7, 4.1e8, 0.001, 0, 2, 0, 0};
  const auto back = rows_from_csv(rows_to_csv(rows));
  REQUIRE(back.size() == 2);
  CHECK(back[0].scheme == "ms-atcnn");
  CHECK(back[0].seed == 123456789012345ULL);
  CHECK(back[0].network_throughput_bps == rows[0].network_throughput_bps);
  CHECK(back[0].mean_interval_s == rows[0].mean_interval_s);
  CHECK(back[1].vho == 2);
  CHECK(rows_to_csv(back) == rows_to_csv(rows));
  CHECK_THROWS_AS(rows_from_csv("scheme,n_ues\nx,1\n"), FormatError);
}

TEST_CASE("atomic writes replace whole files") {
  const auto dir = scratch("hlwnet_io_test");
  const std::string p = (dir / "sub" / "f.txt").string();
  write_file_atomic(p, "one");
  write_file_atomic(p, "two");
  CHECK(read_file(p) == "two");
  CHECK_THROWS_AS(read_file((dir / "missing").string()), FormatError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("interrupted collection resumes to the same datasets") {
  const ExperimentConfig cfg = tiny();
  const NetworkTopology topo = cfg.topology.build();
  const auto dir = scratch("hlwnet_journal_test");
  const std::string journal = (dir / "journal.csv").string();
  const MsnnDatasets full = collect_datasets(cfg, topo, journal);

  // keep the header and a third of the samples, then tear the next line
  std::ifstream in(journal);
  std::string line, cut;
  std::size_t kept = 0, total = 0;
  for (const auto& [t, rows] : full) total += rows.size();
  while (std::getline(in, line)) {
    if (line[0] != '#' && kept++ >= total / 3) {
      cut += line.substr(0, line.size() / 2);
      break;
    }
    cut += line + '\n';
  }
  in.close();
  std::ofstream(journal, std::ios::trunc) << cut;

  std::size_t fresh = 0;
  const MsnnDatasets resumed = collect_datasets(cfg, topo, journal, [&](const MsnnSample&) { ++fresh; });
  CHECK(fresh == total - total / 3);
  for (const auto& [type, rows] : full) {
    REQUIRE(resumed.at(type).size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(sample_to_csv(resumed.at(type)[i]) == sample_to_csv(rows[i]));
    }
  }

  ExperimentConfig other = cfg;
  other.collection.degradation = 0.2;
  CHECK_THROWS_AS(collect_datasets(other, topo, journal), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("smoke pipeline is reproducible") {
  const ExperimentConfig cfg = tiny();
  auto run = [&] {
    const NetworkTopology topo = cfg.topology.build();
    const MsnnDatasets d = collect_datasets(cfg, topo);
    const BankFit fit = train_bank(cfg, d);
    const SurrogateFit surrogate = train_surrogate(cfg, topo);
    std::vector<ReportRow> rows = simulate(cfg, topo, Models{&fit.bank, &surrogate.model});
    for (ReportRow& r : rows) r.decision_runtime_s = 0;  // wall clock
    return rows_to_csv(rows) + ablation_csv(ablate(cfg, d));
  };
  const std::string a = run();
  CHECK(a == run());
  const auto rows = rows_from_csv(a.substr(0, a.find("variant,")));
  CHECK(rows.size() == cfg.simulate.schemes.size() * 2);
  for (const ReportRow& r : rows) CHECK(r.network_throughput_bps > 0);
}

TEST_CASE("simulate needs a bank for MS-ATCNN") {
  const ExperimentConfig cfg = tiny();
  const NetworkTopology topo = cfg.topology.build();
  CHECK_THROWS_AS(simulate(cfg, topo, Models{}), ModelError);
}

}
