#include "hlwnet/config.hpp"

#include <cstdio>

#include "hlwnet/error.hpp"
#include "hlwnet/io.hpp"
#include "json.hpp"

namespace hlwnet {

namespace {

using nlohmann::json;

MobilityModel parse_mobility_model(const std::string& name) {
  for (MobilityModel m : {MobilityModel::Static, MobilityModel::RandomWaypoint, MobilityModel::GaussMarkov,
                          MobilityModel::RandomWalk}) {
    if (name == mobility_model_name(m)) return m;
  }
  throw ConfigError("unknown mobility model: " + name);
}

std::string share_name(ShareRule r) { return r == ShareRule::Equal ? "equal" : "demand"; }

ShareRule parse_share(const std::string& s) {
  if (s == "demand") return ShareRule::DemandWeighted;
  if (s == "equal") return ShareRule::Equal;
  throw ConfigError("unknown share rule: " + s);
}

std::string utility_name(UtilityKind u) { return u == UtilityKind::LogNormalized ? "log_normalized" : "log"; }

UtilityKind parse_utility(const std::string& s) {
  if (s == "log") return UtilityKind::LogThroughput;
  if (s == "log_normalized") return UtilityKind::LogNormalized;
  throw ConfigError("unknown utility: " + s);
}

std::string engine_name(DecisionEngine e) { return e == DecisionEngine::Surrogate ? "surrogate" : "exact"; }

DecisionEngine parse_engine(const std::string& s) {
  if (s == "exact") return DecisionEngine::ExactTarget;
  if (s == "surrogate") return DecisionEngine::Surrogate;
  throw ConfigError("unknown decision engine: " + s);
}

json lag_json(const LagTable& t) {
  json a = json::array();
  for (const auto& [n, s] : t.points) a.push_back({n, s});
  return a;
}

LagTable lag_from(const json& a) {
  LagTable t;
  for (const json& p : a) {
    if (!p.is_array() || p.size() != 2) throw ConfigError("lag table entries are [n_ues, seconds] pairs");
    t.points.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return t;
}

json to_json(const ExperimentConfig& c) {
  const LiFiParams& l = c.channel.lifi;
  const WiFiParams& w = c.channel.wifi;
  const CollectionConfig& k = c.collection;
  const PopulationConfig& p = c.collection.population;
  const TrainConfig& mt = c.msnn.train;
  const TrainConfig& st = c.surrogate.train;
  const SimulateConfig& s = c.simulate;
  json j;
  j["scale"] = c.scale;
  j["seed"] = c.seed;
  j["topology"] = {{"room_length_m", c.topology.room.length_m},
                   {"room_width_m", c.topology.room.width_m},
                   {"room_height_m", c.topology.room.height_m},
                   {"grid_n", c.topology.grid_n},
                   {"separation_m", c.topology.separation_m},
                   {"wifi_height_m", c.topology.wifi_height_m},
                   {"per_ap_types", c.topology.per_ap_types}};
  j["channel"]["lifi"] = {{"bandwidth_hz", l.bandwidth_hz},
                          {"noise_psd_a2_per_hz", l.noise_psd_a2_per_hz},
                          {"responsivity_a_per_w", l.responsivity_a_per_w},
                          {"modulated_power_w", l.modulated_power_w},
                          {"lambertian_order", l.lambertian_order},
                          {"pd_area_m2", l.pd_area_m2},
                          {"fov_semiangle_rad", l.fov_semiangle_rad},
                          {"optics_gain", l.optics_gain},
                          {"nlos_enabled", l.nlos_enabled},
                          {"nlos_gain_fraction", l.nlos_gain_fraction}};
  j["channel"]["wifi"] = {{"bandwidth_hz", w.bandwidth_hz},
                          {"noise_psd_w_per_hz", w.noise_psd_w_per_hz},
                          {"tx_power_w", w.tx_power_w},
                          {"carrier_freq_hz", w.carrier_freq_hz},
                          {"breakpoint_distance_m", w.breakpoint_distance_m},
                          {"pathloss_exp_before", w.pathloss_exp_before},
                          {"pathloss_exp_after", w.pathloss_exp_after},
                          {"shadowing_sigma_db", w.shadowing_sigma_db},
                          {"excess_loss_db", w.excess_loss_db}};
  j["channel"]["snr_floor_db"] = c.channel.snr_floor_db;
  j["mobility"] = {{"model", mobility_model_name(c.mobility.model)},
                   {"gm_randomness", c.mobility.gm_randomness},
                   {"gm_speed_std_mps", c.mobility.gm_speed_std_mps},
                   {"gm_heading_std_rad", c.mobility.gm_heading_std_rad},
                   {"gm_update_period_s", c.mobility.gm_update_period_s},
                   {"rw_flight_length_m", c.mobility.rw_flight_length_m},
                   {"ue_height_m", c.mobility.ue_height_m}};
  j["population"] = {{"n_ues_min", p.n_ues_min},
                     {"n_ues_max", p.n_ues_max},
                     {"mean_rate_bps", p.mean_rate_bps},
                     {"gamma_shape", p.gamma_shape},
                     {"min_rate_bps", p.min_rate_bps}};
  j["lb"] = {{"share", share_name(c.run.lb.share)},
             {"utility", utility_name(c.run.lb.utility)},
             {"floor_bps", c.run.lb.floor_bps}};
  j["collection"] = {{"mean_speed_mps", k.mobility.mean_speed_mps},
                     {"degradation", k.degradation},
                     {"ideal_step_s", k.ideal_step_s},
                     {"sim_tick_s", k.sim_tick_s},
                     {"min_interval_s", k.min_interval_s},
                     {"max_interval_s", k.max_interval_s},
                     {"samples_per_type", k.samples_per_type},
                     {"global_max", k.global_max},
                     {"gt_max_iters", k.gt_max_iters}};
  j["msnn"] = {{"hidden", c.msnn.hidden},
               {"epochs", mt.epochs},
               {"batch_size", mt.batch_size},
               {"learning_rate", mt.learning_rate},
               {"validation_fraction", mt.validation_fraction},
               {"patience", mt.patience},
               {"speed_max_mps", c.msnn.speed_max_mps}};
  j["surrogate"] = {{"preset_m", c.surrogate.preset_m},
                    {"hidden", c.surrogate.hidden},
                    {"snr_floor_db", c.surrogate.snr_floor_db},
                    {"snr_ceiling_db", c.surrogate.snr_ceiling_db},
                    {"rate_scale_bps", c.surrogate.rate_scale_bps},
                    {"epochs", st.epochs},
                    {"batch_size", st.batch_size},
                    {"learning_rate", st.learning_rate},
                    {"validation_fraction", st.validation_fraction},
                    {"patience", st.patience},
                    {"samples", c.surrogate_samples}};
  j["run"] = {{"tick_s", c.run.tick_s},
              {"horizon_s", c.run.horizon_s},
              {"outage_s", c.run.outage_s},
              {"gt_max_iters", c.run.gt_max_iters}};
  j["simulate"] = {{"schemes", s.schemes},
                   {"speeds_mps", s.speeds_mps},
                   {"n_ues", s.n_ues},
                   {"replications", s.replications},
                   {"ttt_s", s.ttt_s},
                   {"lag", lag_mode_name(s.lag)},
                   {"gt_lag_s", lag_json(s.gt_lag)},
                   {"atcnn_lag_s", lag_json(s.atcnn_lag)},
                   {"msnn_lag_s", lag_json(s.msnn_lag)},
                   {"engine", engine_name(s.engine)},
                   {"runtime_sizes", s.runtime_sizes},
                   {"runtime_repetitions", s.runtime_repetitions}};
  return j;
}

ExperimentConfig from_json(const json& j) {
  ExperimentConfig c;
  c.scale = j.at("scale").get<std::string>();
  c.seed = j.at("seed").get<std::uint64_t>();
  const json& t = j.at("topology");
  c.topology.room.length_m = t.at("room_length_m");
  c.topology.room.width_m = t.at("room_width_m");
  c.topology.room.height_m = t.at("room_height_m");
  c.topology.grid_n = t.at("grid_n");
  c.topology.separation_m = t.at("separation_m");
  c.topology.wifi_height_m = t.at("wifi_height_m");
  c.topology.per_ap_types = t.at("per_ap_types");

  const json& l = j.at("channel").at("lifi");
  LiFiParams& lp = c.channel.lifi;
  lp.bandwidth_hz = l.at("bandwidth_hz");
  lp.noise_psd_a2_per_hz = l.at("noise_psd_a2_per_hz");
  lp.responsivity_a_per_w = l.at("responsivity_a_per_w");
  lp.modulated_power_w = l.at("modulated_power_w");
  lp.lambertian_order = l.at("lambertian_order");
  lp.pd_area_m2 = l.at("pd_area_m2");
  lp.fov_semiangle_rad = l.at("fov_semiangle_rad");
  lp.optics_gain = l.at("optics_gain");
  lp.nlos_enabled = l.at("nlos_enabled");
  lp.nlos_gain_fraction = l.at("nlos_gain_fraction");
  const json& w = j.at("channel").at("wifi");
  WiFiParams& wp = c.channel.wifi;
  wp.bandwidth_hz = w.at("bandwidth_hz");
  wp.noise_psd_w_per_hz = w.at("noise_psd_w_per_hz");
  wp.tx_power_w = w.at("tx_power_w");
  wp.carrier_freq_hz = w.at("carrier_freq_hz");
  wp.breakpoint_distance_m = w.at("breakpoint_distance_m");
  wp.pathloss_exp_before = w.at("pathloss_exp_before");
  wp.pathloss_exp_after = w.at("pathloss_exp_after");
  wp.shadowing_sigma_db = w.at("shadowing_sigma_db");
  wp.excess_loss_db = w.at("excess_loss_db");
  c.channel.snr_floor_db = j.at("channel").at("snr_floor_db");

  const json& m = j.at("mobility");
  c.mobility.model = parse_mobility_model(m.at("model"));
  c.mobility.gm_randomness = m.at("gm_randomness");
  c.mobility.gm_speed_std_mps = m.at("gm_speed_std_mps");
  c.mobility.gm_heading_std_rad = m.at("gm_heading_std_rad");
  c.mobility.gm_update_period_s = m.at("gm_update_period_s");
  c.mobility.rw_flight_length_m = m.at("rw_flight_length_m");
  c.mobility.ue_height_m = m.at("ue_height_m");

  LbOptions lb;
  lb.share = parse_share(j.at("lb").at("share"));
  lb.utility = parse_utility(j.at("lb").at("utility"));
  lb.floor_bps = j.at("lb").at("floor_bps");

  const json& p = j.at("population");
  PopulationConfig pop;
  pop.n_ues_min = p.at("n_ues_min");
  pop.n_ues_max = p.at("n_ues_max");
  pop.mean_rate_bps = p.at("mean_rate_bps");
  pop.gamma_shape = p.at("gamma_shape");
  pop.min_rate_bps = p.at("min_rate_bps");

  const json& k = j.at("collection");
  CollectionConfig& cc = c.collection;
  cc.mobility = c.mobility;
  cc.mobility.mean_speed_mps = k.at("mean_speed_mps");
  cc.degradation = k.at("degradation");
  cc.ideal_step_s = k.at("ideal_step_s");
  cc.sim_tick_s = k.at("sim_tick_s");
  cc.min_interval_s = k.at("min_interval_s");
  cc.max_interval_s = k.at("max_interval_s");
  cc.samples_per_type = k.at("samples_per_type");
  cc.global_max = k.at("global_max");
  cc.gt_max_iters = k.at("gt_max_iters");
  cc.population = pop;
  cc.lb = lb;
  cc.seed = c.seed;

  const json& n = j.at("msnn");
  c.msnn.hidden = n.at("hidden").get<std::vector<std::size_t>>();
  c.msnn.train.epochs = n.at("epochs");
  c.msnn.train.batch_size = n.at("batch_size");
  c.msnn.train.learning_rate = n.at("learning_rate");
  c.msnn.train.validation_fraction = n.at("validation_fraction");
  c.msnn.train.patience = n.at("patience");
  c.msnn.train.seed = derive_seed(c.seed, {11});
  c.msnn.speed_max_mps = n.at("speed_max_mps");

  const json& s = j.at("surrogate");
  c.surrogate.preset_m = s.at("preset_m");
  c.surrogate.hidden = s.at("hidden");
  c.surrogate.snr_floor_db = s.at("snr_floor_db");
  c.surrogate.snr_ceiling_db = s.at("snr_ceiling_db");
  c.surrogate.rate_scale_bps = s.at("rate_scale_bps");
  c.surrogate.train.epochs = s.at("epochs");
  c.surrogate.train.batch_size = s.at("batch_size");
  c.surrogate.train.learning_rate = s.at("learning_rate");
  c.surrogate.train.validation_fraction = s.at("validation_fraction");
  c.surrogate.train.patience = s.at("patience");
  c.surrogate.train.seed = derive_seed(c.seed, {12});
  c.surrogate_samples = s.at("samples");

  const json& r = j.at("run");
  c.run.tick_s = r.at("tick_s");
  c.run.horizon_s = r.at("horizon_s");
  c.run.outage_s = r.at("outage_s");
  c.run.gt_max_iters = r.at("gt_max_iters");
  c.run.lb = lb;

  const json& sim = j.at("simulate");
  c.simulate.schemes = sim.at("schemes").get<std::vector<std::string>>();
  c.simulate.speeds_mps = sim.at("speeds_mps").get<std::vector<double>>();
  c.simulate.n_ues = sim.at("n_ues").get<std::vector<int>>();
  c.simulate.replications = sim.at("replications");
  c.simulate.ttt_s = sim.at("ttt_s");
  c.simulate.lag = parse_lag_mode(sim.at("lag"));
  c.simulate.gt_lag = lag_from(sim.at("gt_lag_s"));
  c.simulate.atcnn_lag = lag_from(sim.at("atcnn_lag_s"));
  c.simulate.msnn_lag = lag_from(sim.at("msnn_lag_s"));
  c.simulate.engine = parse_engine(sim.at("engine"));
  c.simulate.runtime_sizes = sim.at("runtime_sizes").get<std::vector<int>>();
  c.simulate.runtime_repetitions = sim.at("runtime_repetitions");
  return c;
}

// Every key of `user` must exist in `schema` (arrays are taken whole).
void check_keys(const json& user, const json& schema, const std::string& path) {
  if (!user.is_object()) return;
  if (!schema.is_object()) throw ConfigError("config key " + path + " must not be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!schema.contains(it.key())) throw ConfigError("unknown config key: " + key);
    check_keys(it.value(), schema.at(it.key()), key);
  }
}

const std::vector<std::string>& known_schemes() {
  static const std::vector<std::string> names{"ms-atcnn", "atcnn-10ms", "atcnn-aver", "atcnn-lr",
                                              "gt-ideal", "gt-practical", "sss-ttt"};
  return names;
}

}  // namespace

NetworkTopology TopologyConfig::build() const {
  return build_grid_topology(room, grid_n, separation_m, wifi_height_m, per_ap_types);
}

void ExperimentConfig::validate() const {
  topology.room.validate();
  if (topology.grid_n < 1) throw ConfigError("topology.grid_n must be at least 1");
  channel.validate();
  mobility.validate();
  collection.validate();
  run.validate();
  if (msnn.hidden.empty()) throw ConfigError("msnn.hidden must list at least one layer");
  if (surrogate.preset_m < 1 || surrogate.hidden < 1) throw ConfigError("surrogate sizes must be positive");
  if (surrogate_samples < 10) throw ConfigError("surrogate.samples must be at least 10");
  if (simulate.replications < 1) throw ConfigError("simulate.replications must be at least 1");
  if (simulate.ttt_s < 0.0) throw ConfigError("simulate.ttt_s must be non-negative");
  if (simulate.runtime_repetitions < 1) throw ConfigError("simulate.runtime_repetitions must be at least 1");
  for (double v : simulate.speeds_mps) {
    if (!(v > 0.0)) throw ConfigError("simulate.speeds_mps entries must be positive");
  }
  for (int n : simulate.n_ues) {
    if (n < 1) throw ConfigError("simulate.n_ues entries must be positive");
  }
  for (const std::string& s : simulate.schemes) {
    bool ok = false;
    for (const std::string& k : known_schemes()) ok = ok || k == s;
    if (!ok) throw ConfigError("unknown scheme: " + s);
  }
  for (const LagTable* t : {&simulate.gt_lag, &simulate.atcnn_lag, &simulate.msnn_lag}) {
    if (t->points.empty()) throw ConfigError("lag tables need at least one point");
    for (const auto& [n, s] : t->points) {
      if (!(n > 0.0) || !(s > 0.0)) throw ConfigError("lag table entries must be positive");
    }
  }
}

ExperimentConfig preset_config(const std::string& scale) {
  ExperimentConfig c;
  c.collection.mobility.mean_speed_mps = 5.0;
  c.collection.seed = c.seed;
  c.msnn.train.seed = derive_seed(c.seed, {11});
  c.surrogate.train.seed = derive_seed(c.seed, {12});
  if (scale == "paper") {
    c.scale = "paper";
    c.surrogate.preset_m = 100;
    return c;
  }
  if (scale == "smoke") {
    c.scale = "smoke";
    c.topology.room = {5.0, 5.0, 3.0};
    c.topology.grid_n = 2;
    c.collection.samples_per_type = 200;
    c.collection.population.n_ues_min = 3;
    c.collection.population.n_ues_max = 25;
    c.surrogate.preset_m = 25;
    c.surrogate_samples = 400;
    c.simulate.n_ues = {12};
    c.simulate.speeds_mps = {1, 3, 5};
    c.simulate.runtime_sizes = {5, 10, 15, 20, 25};
    c.run.horizon_s = 5.0;
    return c;
  }
  throw ConfigError("unknown scale preset: " + scale);
}

ExperimentConfig config_from_json(const std::string& text) {
  json user;
  try {
    user = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  const std::string scale = user.value("scale", std::string("paper"));
  json merged = to_json(preset_config(scale));
  check_keys(user, merged, "");
  merged.merge_patch(user);
  ExperimentConfig c;
  try {
    c = from_json(merged);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(text);
}

std::string config_to_json(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const ExperimentConfig& config) { return fnv1a_hex(to_json(config).dump()); }

std::string collection_hash(const ExperimentConfig& config) {
  const json j = to_json(config);
  json part;
  part["seed"] = j["seed"];
  for (const char* key : {"topology", "channel", "mobility", "population", "lb", "collection"}) part[key] = j[key];
  return fnv1a_hex(part.dump());
}

std::string lag_mode_name(LagMode mode) {
  switch (mode) {
    case LagMode::None: return "none";
    case LagMode::Fixed: return "fixed";
    case LagMode::Measured: return "measured";
  }
  return "?";
}

LagMode parse_lag_mode(const std::string& name) {
  if (name == "none") return LagMode::None;
  if (name == "fixed") return LagMode::Fixed;
  if (name == "measured") return LagMode::Measured;
  throw ConfigError("unknown lag mode: " + name);
}

}  // namespace hlwnet
