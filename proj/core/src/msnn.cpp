#include "hlwnet/msnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "hlwnet/error.hpp"
#include "hlwnet/io.hpp"

namespace hlwnet {

namespace {

double fold_angle(double theta) {
  theta = std::fmod(std::abs(theta), 2.0 * std::numbers::pi);
  return theta > std::numbers::pi ? 2.0 * std::numbers::pi - theta : theta;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("bad " + what + " value '" + s + "'");
  }
}

}  // namespace

void CollectionConfig::validate() const {
  if (!(degradation >= 0.0 && degradation <= 0.05)) {
    throw ConfigError("throughput-degradation budget must lie in [0, 0.05]");
  }
  if (!(sim_tick_s > 0.0) || !(ideal_step_s >= sim_tick_s)) {
    throw ConfigError("need 0 < simulation tick <= reference step");
  }
  const double ratio = ideal_step_s / sim_tick_s;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) throw ConfigError("simulation tick must divide the reference step");
  const double steps = max_interval_s / ideal_step_s;
  if (std::abs(steps - std::round(steps)) > 1e-9 || steps < 1) {
    throw ConfigError("reference step must divide the interval cap");
  }
  const double lo = min_interval_s / ideal_step_s;
  if (std::abs(lo - std::round(lo)) > 1e-9 || lo < 1 || min_interval_s > max_interval_s) {
    throw ConfigError("interval floor must be a positive multiple of the reference step");
  }
  if (samples_per_type < 1) throw ConfigError("samples per AP type must be >= 1");
  if (gt_max_iters < 1) throw ConfigError("GT iteration cap must be >= 1");
  mobility.validate();
  population.validate();
}

int CollectionConfig::grid_points() const {
  return static_cast<int>(std::lround(max_interval_s / ideal_step_s));
}

double riemann_average(const std::function<double(double)>& f, double t0, double t1, double dt) {
  if (!(t1 > t0) || !(dt > 0.0)) throw std::invalid_argument("riemann_average needs t1 > t0 and dt > 0");
  const long long steps = std::llround((t1 - t0) / dt);
  double s = 0.0;
  for (long long i = 0; i < steps; ++i) s += f(t0 + static_cast<double>(i) * dt);
  return s / static_cast<double>(steps);
}

SampleTrace trace_sample(World& world, const Assignment& assignment, std::size_t target,
                         std::size_t decision, const CollectionConfig& config) {
  const int n_grid = config.grid_points();
  const long long ticks = std::llround(config.ideal_step_s / config.sim_tick_s);
  const std::size_t n_aps = world.n_aps();
  std::span<const double> rates = world.rates();

  // Condition UEs stay put, so the target's share on AP b is fixed.
  std::vector<double> others_rate(n_aps, 0.0);
  std::vector<std::size_t> others_count(n_aps, 0);
  for (std::size_t j = 0; j < assignment.size(); ++j) {
    if (j == target) continue;
    others_rate[assignment[j]] += rates[j];
    ++others_count[assignment[j]];
  }
  auto share = [&](std::size_t b) {
    return config.lb.share == ShareRule::Equal ? 1.0 / static_cast<double>(others_count[b] + 1)
                                               : rates[target] / (others_rate[b] + rates[target]);
  };

  Assignment ideal = assignment;
  ideal[target] = decision;
  CapacityMatrix caps;
  SampleTrace trace;
  trace.held.resize(static_cast<std::size_t>(n_grid));
  trace.ideal.resize(static_cast<std::size_t>(n_grid));
  double held_sum = 0.0;
  double ideal_sum = 0.0;
  for (int n = 0; n < n_grid; ++n) {
    if (n > 0) {
      world.fill_capacities(caps);
      ideal[target] = best_response_for(target, ideal, caps, rates, config.lb);
    }
    const double held_share = share(decision);
    const double ideal_share = share(ideal[target]);
    for (long long k = 0; k < ticks; ++k) {
      const LinkRow& row = world.links(target);
      held_sum += held_share * row.capacity[decision];
      ideal_sum += ideal_share * row.capacity[ideal[target]];
      world.advance(config.sim_tick_s);
    }
    const double count = static_cast<double>((n + 1) * ticks);
    trace.held[static_cast<std::size_t>(n)] = held_sum / count;
    trace.ideal[static_cast<std::size_t>(n)] = ideal_sum / count;
  }
  return trace;
}

bool constraint_holds(const SampleTrace& trace, int n, double degradation) {
  const std::size_t i = static_cast<std::size_t>(n - 1);
  const double need = (1.0 - degradation) * trace.ideal[i];
  return trace.held[i] >= need - 1e-12 * std::abs(need);
}

double label_from_trace(const SampleTrace& trace, const CollectionConfig& config) {
  const int n_grid = static_cast<int>(trace.held.size());
  const int n_min = static_cast<int>(std::lround(config.min_interval_s / config.ideal_step_s));
  int best = 0;
  if (config.global_max) {
    for (int n = n_grid; n >= 1; --n) {
      if (constraint_holds(trace, n, config.degradation)) {
        best = n;
        break;
      }
    }
  } else {
    for (int n = 1; n <= n_grid; ++n) {
      if (!constraint_holds(trace, n, config.degradation)) break;
      best = n;
    }
  }
  best = std::max(best, n_min);
  return static_cast<double>(best) * config.ideal_step_s;
}

std::uint64_t collection_scenario_seed(const CollectionConfig& config, std::uint64_t index) {
  return derive_seed(config.seed, {kStreamCollection, index});
}

std::optional<MsnnSample> collect_sample(const NetworkTopology& topology,
                                         const ChannelParams& channel,
                                         const CollectionConfig& config, std::uint64_t index,
                                         const std::vector<ApTypeId>& wanted) {
  const std::uint64_t seed = collection_scenario_seed(config, index);
  Rng rng = make_rng(seed, {kStreamCollection});
  std::uniform_int_distribution<int> count(config.population.n_ues_min, config.population.n_ues_max);
  const int n_ues = count(rng);
  World world(topology, channel, config.mobility,
              make_scenario(topology.room(), config.mobility, config.population, channel.wifi, n_ues, seed));
  CapacityMatrix caps;
  world.fill_capacities(caps);
  Assignment init(world.n_ues());
  for (std::size_t j = 0; j < init.size(); ++j) init[j] = world.sss_choice(j);
  const Assignment assignment =
      gt_best_response_solve(caps, world.rates(), init, config.gt_max_iters, config.lb).assignment;

  std::vector<std::size_t> order(world.n_ues());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t target : order) {
    const std::size_t decision = best_response_for(target, assignment, caps, world.rates(), config.lb);
    const ApTypeId type = topology.ap(decision).type;
    if (std::find(wanted.begin(), wanted.end(), type) == wanted.end()) continue;
    MsnnSample s;
    s.scenario = index;
    s.type = type;
    s.host = decision;
    s.input.snr_db = world.snr_db(target, decision);
    s.input.theta_rad = heading_angle_to_ap(world.motion(target), topology.ap(decision).position);
    s.input.speed_mps = world.motion(target).speed;
    const SampleTrace trace = trace_sample(world, assignment, target, decision, config);
    s.label_s = label_from_trace(trace, config);
    return s;
  }
  return std::nullopt;
}

MsnnDatasets build_datasets(const NetworkTopology& topology, const ChannelParams& channel,
                            const CollectionConfig& config, const std::vector<MsnnSample>& resume,
                            const std::function<void(const MsnnSample&)>& on_sample) {
  config.validate();
  MsnnDatasets data;
  for (int t = 1; t <= topology.type_count(); ++t) data[t];
  std::uint64_t next = 0;
  for (const MsnnSample& s : resume) {
    if (s.scenario < next && !data[s.type].empty()) {
      throw FormatError("resumed samples must have ascending scenario indices");
    }
    if (static_cast<int>(data[s.type].size()) < config.samples_per_type) data[s.type].push_back(s);
    next = s.scenario + 1;
  }
  const std::uint64_t limit =
      next + 1000ULL * static_cast<std::uint64_t>(config.samples_per_type) * data.size();
  for (std::uint64_t index = next;; ++index) {
    std::vector<ApTypeId> wanted;
    for (const auto& [type, rows] : data) {
      if (static_cast<int>(rows.size()) < config.samples_per_type) wanted.push_back(type);
    }
    if (wanted.empty()) break;
    if (index >= limit) {
      throw std::runtime_error("collection could not fill every AP type; type " +
                               type_name(wanted.front()) + " is rarely selected");
    }
    std::optional<MsnnSample> s = collect_sample(topology, channel, config, index, wanted);
    if (!s) continue;
    data[s->type].push_back(*s);
    if (on_sample) on_sample(*s);
  }
  return data;
}

std::vector<double> msnn_features(const MsnnInput& in, const std::vector<int>& columns) {
  std::vector<double> out;
  out.reserve(columns.size());
  for (int c : columns) {
    switch (c) {
      case 0: out.push_back(in.snr_db); break;
      case 1: out.push_back(fold_angle(in.theta_rad)); break;
      case 2: out.push_back(in.speed_mps); break;
      default: throw std::invalid_argument("MSNN input column must be 0, 1 or 2");
    }
  }
  return out;
}

double normalize_label(double label_s) { return (label_s - kMinIntervalS) / (kMaxIntervalS - kMinIntervalS); }
double denormalize_label(double y) { return kMinIntervalS + y * (kMaxIntervalS - kMinIntervalS); }

double predict_interval(const MsnnModel& model, const MsnnInput& input) {
  std::vector<double> x = msnn_features(input, model.columns);
  for (std::size_t c = 0; c < x.size(); ++c) {
    x[c] = std::clamp(model.input_norm.normalize(c, x[c]), 0.0, 1.0);
  }
  const double y = model.mlp.forward(x)[0];
  return std::clamp(denormalize_label(y), kMinIntervalS, kMaxIntervalS);
}

const MsnnModel& MsnnBank::at(ApTypeId type) const {
  auto it = models_.find(type);
  if (it == models_.end()) throw ModelError("no MSNN model for AP type " + type_name(type));
  return it->second;
}

Normalizer msnn_input_normalizer(const std::vector<MsnnSample>& rows, const std::vector<int>& columns,
                                 double speed_max_mps) {
  Normalizer norm;
  for (int c : columns) {
    if (c == 0) {
      double lo = rows.empty() ? 0.0 : rows.front().input.snr_db;
      double hi = lo;
      for (const MsnnSample& s : rows) {
        lo = std::min(lo, s.input.snr_db);
        hi = std::max(hi, s.input.snr_db);
      }
      norm.lo.push_back(lo);
      norm.hi.push_back(hi);
    } else if (c == 1) {
      norm.lo.push_back(0.0);
      norm.hi.push_back(std::numbers::pi);
    } else {
      norm.lo.push_back(0.0);
      norm.hi.push_back(speed_max_mps);
    }
  }
  return norm;
}

MsnnFit train_msnn(const std::vector<MsnnSample>& rows, const std::vector<int>& columns,
                   const MsnnTrainConfig& config) {
  if (rows.empty()) throw std::invalid_argument("cannot train an MSNN model on an empty dataset");
  MsnnFit fit;
  fit.model.columns = columns;
  fit.model.input_norm = msnn_input_normalizer(rows, columns, config.speed_max_mps);
  MlpSpec spec;
  spec.widths.push_back(columns.size());
  for (std::size_t h : config.hidden) {
    spec.widths.push_back(h);
    spec.activations.push_back(Activation::ReLU);
  }
  spec.widths.push_back(1);
  spec.activations.push_back(Activation::Sigmoid);
  spec.loss = LossKind::MSE;
  fit.model.mlp = Mlp(spec, config.train.seed);

  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> y;
  for (const MsnnSample& s : rows) {
    x.push_back(fit.model.input_norm.normalize(msnn_features(s.input, columns)));
    y.push_back({normalize_label(s.label_s)});
  }
  fit.history = train(fit.model.mlp, x, y, config.train);
  return fit;
}

ErrorStats error_stats(const std::vector<double>& errors) {
  ErrorStats st;
  st.count = errors.size();
  if (errors.empty()) return st;
  for (double e : errors) st.mean += e;
  st.mean /= static_cast<double>(errors.size());
  for (double e : errors) st.variance += (e - st.mean) * (e - st.mean);
  st.variance /= static_cast<double>(errors.size());
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t i = static_cast<std::size_t>(std::floor(pos));
    const std::size_t k = std::min(i + 1, sorted.size() - 1);
    return sorted[i] + (pos - static_cast<double>(i)) * (sorted[k] - sorted[i]);
  };
  st.ci_lo = quantile(0.1);
  st.ci_hi = quantile(0.9);
  return st;
}

std::vector<double> validation_errors(const MsnnModel& model, const std::vector<MsnnSample>& rows,
                                      double validation_fraction) {
  const std::size_t n_val =
      static_cast<std::size_t>(std::floor(static_cast<double>(rows.size()) * validation_fraction));
  std::vector<double> out;
  for (std::size_t i = rows.size() - n_val; i < rows.size(); ++i) {
    out.push_back(predict_interval(model, rows[i].input) - rows[i].label_s);
  }
  return out;
}

std::string sample_to_csv(const MsnnSample& s) {
  std::ostringstream os;
  os << s.type << ',' << fmt(s.input.snr_db) << ',' << fmt(s.input.theta_rad) << ',' << fmt(s.input.speed_mps)
     << ',' << fmt(s.label_s) << ',' << s.scenario << ',' << (s.host + 1);
  return os.str();
}

MsnnSample sample_from_csv(const std::string& line) {
  const std::vector<std::string> f = split(line, ',');
  if (f.size() != 7) throw FormatError("row with " + std::to_string(f.size()) + " fields");
  MsnnSample s;
  s.type = static_cast<ApTypeId>(to_double(f[0], "ap_type"));
  s.input.snr_db = to_double(f[1], "snr_db");
  s.input.theta_rad = to_double(f[2], "theta_rad");
  s.input.speed_mps = to_double(f[3], "speed_mps");
  s.label_s = to_double(f[4], "label_s");
  s.scenario = static_cast<std::uint64_t>(to_double(f[5], "scenario"));
  const double host = to_double(f[6], "host_ap");
  if (host < 1) throw FormatError("host AP ids are 1-based");
  s.host = static_cast<std::size_t>(host) - 1;
  if (s.label_s < kMinIntervalS - 1e-12 || s.label_s > kMaxIntervalS + 1e-12) {
    throw FormatError("label outside [0.01, 2] s");
  }
  return s;
}

void save_dataset(const std::string& path, ApTypeId type, const std::vector<MsnnSample>& rows,
                  const std::string& config_hash) {
  std::ostringstream os;
  os << "# hlwnet-msnn-dataset 1\n";
  os << "# config_hash " << config_hash << '\n';
  os << "# ap_type " << type << '\n';
  os << "# label_bounds_s " << fmt(kMinIntervalS) << ' ' << fmt(kMaxIntervalS) << '\n';
  os << "# theta_bounds_rad 0 " << fmt(std::numbers::pi) << '\n';
  os << "ap_type,snr_db,theta_rad,speed_mps,label_s,scenario,host_ap\n";
  for (const MsnnSample& s : rows) os << sample_to_csv(s) << '\n';
  write_file_atomic(path, os.str());
}

DatasetFile load_dataset(const std::string& path) {
  std::istringstream is(read_file(path));
  DatasetFile file;
  std::string line;
  if (!std::getline(is, line) || line != "# hlwnet-msnn-dataset 1") {
    throw FormatError(path + ": not an MSNN dataset file");
  }
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key;
      ls >> key;
      if (key == "config_hash") ls >> file.config_hash;
      if (key == "ap_type") ls >> file.type;
      continue;
    }
    if (!header) {
      if (line != "ap_type,snr_db,theta_rad,speed_mps,label_s,scenario,host_ap") {
        throw FormatError(path + ": unexpected column header");
      }
      header = true;
      continue;
    }
    MsnnSample s;
    try {
      s = sample_from_csv(line);
    } catch (const FormatError& e) {
      throw FormatError(path + ": " + e.what());
    }
    file.rows.push_back(s);
  }
  if (!header) throw FormatError(path + ": missing column header");
  return file;
}

void save_msnn_model(const std::string& path, const MsnnModel& model, ApTypeId type,
                     const std::string& config_hash) {
  ModelFile file;
  file.model = model.mlp;
  file.input_norm = model.input_norm;
  file.meta["ap_type"] = std::to_string(type);
  file.meta["config_hash"] = config_hash.empty() ? "none" : config_hash;
  std::string cols;
  for (int c : model.columns) cols += (cols.empty() ? "" : "+") + std::to_string(c);
  file.meta["columns"] = cols;
  save_model(path, file);
}

MsnnModel load_msnn_model(const std::string& path, std::string* config_hash) {
  ModelFile file = load_model(path);
  MsnnModel model;
  model.mlp = std::move(file.model);
  if (!file.input_norm) throw FormatError(path + ": MSNN model lacks input bounds");
  model.input_norm = *file.input_norm;
  model.columns.clear();
  auto it = file.meta.find("columns");
  if (it == file.meta.end()) throw FormatError(path + ": MSNN model lacks column list");
  for (const std::string& c : split(it->second, '+')) model.columns.push_back(static_cast<int>(to_double(c, "column")));
  if (model.columns.size() != model.mlp.input_width()) throw FormatError(path + ": column list does not match model");
  if (config_hash) {
    auto h = file.meta.find("config_hash");
    *config_hash = h == file.meta.end() ? "" : h->second;
  }
  return model;
}

}  // namespace hlwnet
