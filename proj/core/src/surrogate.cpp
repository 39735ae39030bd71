#include "hlwnet/surrogate.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hlwnet/error.hpp"
#include "hlwnet/io.hpp"

namespace hlwnet {

namespace {

double best_snr(const UeFeatures& u) { return *std::max_element(u.snr_db.begin(), u.snr_db.end()); }

constexpr std::size_t kTargetWidth = 4;
constexpr std::size_t kConditionWidth = 6;
constexpr double kSplitDb = 5.0;

void softmax_in_place(std::vector<double>& z) {
  const double peak = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - peak);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

MlpSpec dense_spec(std::size_t in, std::size_t hidden, std::size_t out, Activation last, LossKind loss) {
  MlpSpec s;
  s.widths = {in, hidden, out};
  s.activations = {Activation::ReLU, last};
  s.loss = loss;
  return s;
}

}  // namespace

std::vector<UeFeatures> map_to_preset_count(std::vector<UeFeatures> condition, std::size_t preset_m,
                                            std::size_t n_aps, double floor_db) {
  if (preset_m < 1 || condition.size() + 1 > preset_m) {
    throw CapacityError("UE count " + std::to_string(condition.size() + 1) + " exceeds preset capacity " +
                        std::to_string(preset_m));
  }
  for (const UeFeatures& u : condition) {
    if (u.snr_db.size() != n_aps) throw std::invalid_argument("condition UE has wrong SNR width");
  }
  std::sort(condition.begin(), condition.end(), [](const UeFeatures& a, const UeFeatures& b) {
    const double ba = best_snr(a);
    const double bb = best_snr(b);
    if (ba != bb) return ba > bb;
    if (a.snr_db != b.snr_db) return a.snr_db < b.snr_db;
    return a.rate_bps < b.rate_bps;
  });
  UeFeatures sentinel;
  sentinel.snr_db.assign(n_aps, floor_db);
  sentinel.rate_bps = 0.0;
  condition.resize(preset_m - 1, sentinel);
  return condition;
}

SurrogateModel::SurrogateModel(std::vector<bool> lifi_mask, const SurrogateConfig& config,
                               std::uint64_t seed)
    : lifi_mask_(std::move(lifi_mask)), config_(config) {
  if (lifi_mask_.empty()) throw ConfigError("surrogate needs at least one AP");
  if (config.preset_m < 1) throw ConfigError("surrogate preset capacity must be >= 1");
  const std::size_t h = config.hidden;
  target_enc_ = Mlp(dense_spec(kTargetWidth, h, h, Activation::ReLU, LossKind::MSE), derive_seed(seed, {1}));
  cond_enc_ = Mlp(dense_spec(kConditionWidth, h, h, Activation::ReLU, LossKind::MSE), derive_seed(seed, {2}));
  head_ = Mlp(dense_spec(2 * h, h, 1, Activation::Identity, LossKind::MSE), derive_seed(seed, {3}));
}

std::vector<std::vector<double>> SurrogateModel::target_input(const UeFeatures& target) const {
  const double span = config_.snr_ceiling_db - config_.snr_floor_db;
  const double rate = target.rate_bps / config_.rate_scale_bps;
  const double log_rate = std::log(std::max(target.rate_bps, 1.0) / config_.rate_scale_bps);
  std::vector<std::vector<double>> x(n_aps());
  for (std::size_t a = 0; a < n_aps(); ++a) {
    const double db = std::clamp(target.snr_db[a], config_.snr_floor_db, config_.snr_ceiling_db);
    x[a] = {(db - config_.snr_floor_db) / span, lifi_mask_[a] ? 1.0 : 0.0, rate, log_rate};
  }
  return x;
}

std::vector<std::vector<double>> SurrogateModel::condition_input(const std::vector<UeFeatures>& padded) const {
  const std::size_t n = n_aps();
  const double span = config_.snr_ceiling_db - config_.snr_floor_db;
  const double m = static_cast<double>(config_.preset_m);
  std::vector<double> load(n, 0.0), count(n, 0.0), quality(n, 0.0);
  double real = 0.0;
  for (const UeFeatures& u : padded) {
    if (u.rate_bps <= 0.0) continue;  // sentinel
    real += 1.0;
    std::size_t best = n;
    double best_other = config_.snr_floor_db;
    for (std::size_t a = 0; a < n; ++a) {
      if (lifi_mask_[a] && (best == n || u.snr_db[a] > u.snr_db[best])) best = a;
      if (!lifi_mask_[a]) best_other = std::max(best_other, u.snr_db[a]);
    }
    // Soft split between the strongest LiFi AP and the WiFi side.
    const double w = best == n ? 0.0 : 1.0 / (1.0 + std::exp(-(u.snr_db[best] - best_other) / kSplitDb));
    for (std::size_t a = 0; a < n; ++a) {
      if (a != best && lifi_mask_[a]) continue;
      const double share = lifi_mask_[a] ? w : 1.0 - w;
      load[a] += share * u.rate_bps;
      count[a] += share;
      quality[a] += share * (std::clamp(u.snr_db[a], config_.snr_floor_db, config_.snr_ceiling_db) - config_.snr_floor_db) / span;
    }
  }
  std::vector<std::vector<double>> x(n);
  for (std::size_t a = 0; a < n; ++a) {
    const double scale = lifi_mask_[a] ? 4.0 : m;
    x[a] = {load[a] / (config_.rate_scale_bps * scale), count[a] / scale,
            count[a] > 0.0 ? quality[a] / count[a] : 0.0, real / m, 0.0, 0.0};
  }
  return x;
}

void SurrogateModel::add_join_cost(const UeFeatures& target, std::vector<std::vector<double>>& cond) const {
  // Log-utility change of joining AP a if the attributed load were exact, with
  // log2(1 + snr) standing in for the capacity.
  const double r = std::max(target.rate_bps, 1.0) / config_.rate_scale_bps;
  for (std::size_t a = 0; a < n_aps(); ++a) {
    const double scale = lifi_mask_[a] ? 4.0 : static_cast<double>(config_.preset_m);
    const double load = cond[a][0] * scale;
    const double count = cond[a][1] * scale;
    const double cap = std::log2(1.0 + std::pow(10.0, std::clamp(target.snr_db[a], config_.snr_floor_db, config_.snr_ceiling_db) / 10.0));
    double gain = std::log(r * std::max(cap, 1e-3)) - std::log(load + r);
    if (load > 0.0) gain -= count * std::log((load + r) / load);
    cond[a][4] = gain / 10.0;
    cond[a][5] = std::log(std::max(cap, 1e-3)) / 5.0;
  }
}

std::vector<double> SurrogateModel::forward_inputs(const std::vector<std::vector<double>>& t,
                                                   const std::vector<std::vector<double>>& c) const {
  std::vector<double> scores(n_aps());
  for (std::size_t a = 0; a < n_aps(); ++a) {
    std::vector<double> joint = target_enc_.forward(t[a]);
    const std::vector<double> hc = cond_enc_.forward(c[a]);
    joint.insert(joint.end(), hc.begin(), hc.end());
    scores[a] = head_.forward(joint)[0];
  }
  softmax_in_place(scores);
  return scores;
}

std::vector<double> SurrogateModel::probabilities(const UeFeatures& target,
                                                  const std::vector<UeFeatures>& condition) const {
  if (!trained_) throw ModelError("surrogate model is not trained");
  if (target.snr_db.size() != n_aps()) throw ModelError("target SNR width does not match the model");
  const std::vector<UeFeatures> padded =
      map_to_preset_count(condition, config_.preset_m, n_aps(), config_.snr_floor_db);
  std::vector<std::vector<double>> c = condition_input(padded);
  add_join_cost(target, c);
  return forward_inputs(target_input(target), c);
}

std::size_t SurrogateModel::infer(const UeFeatures& target, const std::vector<UeFeatures>& condition) const {
  const std::vector<double> p = probabilities(target, condition);
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

double surrogate_accuracy(const SurrogateModel& model, const std::vector<SurrogateExample>& examples,
                          std::size_t begin, std::size_t end) {
  if (end <= begin) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = begin; i < end; ++i) hit += model.infer(examples[i].target, examples[i].condition) == examples[i].label;
  return static_cast<double>(hit) / static_cast<double>(end - begin);
}

SurrogateFit surrogate_train(const std::vector<SurrogateExample>& examples,
                             const std::vector<bool>& lifi_mask, const SurrogateConfig& config) {
  if (examples.empty()) throw std::invalid_argument("cannot train the surrogate on an empty dataset");
  SurrogateFit fit;
  fit.model = SurrogateModel(lifi_mask, config, config.train.seed);
  SurrogateModel& model = fit.model;
  const std::size_t n_aps = lifi_mask.size();
  const std::size_t h = config.hidden;

  std::vector<std::vector<std::vector<double>>> tx, cx;
  std::vector<std::size_t> y;
  for (const SurrogateExample& e : examples) {
    if (e.label >= n_aps) throw std::invalid_argument("oracle label out of range");
    tx.push_back(model.target_input(e.target));
    cx.push_back(model.condition_input(map_to_preset_count(e.condition, config.preset_m, n_aps, config.snr_floor_db)));
    model.add_join_cost(e.target, cx.back());
    y.push_back(e.label);
  }
  const std::size_t n = examples.size();
  std::size_t n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * config.train.validation_fraction));
  if (n_val >= n) n_val = n - 1;
  const std::size_t n_train = n - n_val;

  Mlp& te = model.target_encoder();
  Mlp& ce = model.condition_encoder();
  Mlp& hd = model.head();
  const AdamConfig ac{config.train.learning_rate};
  Adam at(te, ac), acd(ce, ac), ah(hd, ac);
  Gradients gt = te.make_gradients(), gc = ce.make_gradients(), gh = hd.make_gradients();
  std::vector<Mlp::Cache> ct(n_aps), cc(n_aps), ch(n_aps);
  std::vector<double> scores(n_aps), joint, gjoint;

  // Forward pass for example i; leaves per-AP caches and probabilities.
  auto forward = [&](std::size_t i) {
    for (std::size_t a = 0; a < n_aps; ++a) {
      te.forward_cached(tx[i][a], ct[a]);
      ce.forward_cached(cx[i][a], cc[a]);
      joint = ct[a].act.back();
      joint.insert(joint.end(), cc[a].act.back().begin(), cc[a].act.back().end());
      hd.forward_cached(joint, ch[a]);
      scores[a] = ch[a].act.back()[0];
    }
    softmax_in_place(scores);
    return -std::log(std::max(scores[y[i]], 1e-300));
  };
  auto loss_over = [&](std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += forward(i);
    return e > b ? s / static_cast<double>(e - b) : 0.0;
  };

  Rng rng(derive_seed(config.train.seed, {0x7375727267}));
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  double best_val = std::numeric_limits<double>::infinity();
  Mlp best_te = te, best_ce = ce, best_hd = hd;
  int since_best = 0;
  for (int epoch = 0; epoch < config.train.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n_train; start += config.train.batch_size) {
      const std::size_t stop = std::min(n_train, start + config.train.batch_size);
      gt.zero();
      gc.zero();
      gh.zero();
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t i = order[k];
        forward(i);
        for (std::size_t a = 0; a < n_aps; ++a) {
          const double g = scores[a] - (a == y[i] ? 1.0 : 0.0);
          hd.backward_from_output(ch[a], std::span<const double>(&g, 1), gh, &gjoint);
          te.backward_from_output(ct[a], std::span<const double>(gjoint.data(), h), gt);
          ce.backward_from_output(cc[a], std::span<const double>(gjoint.data() + h, h), gc);
        }
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      gt.scale(inv);
      gc.scale(inv);
      gh.scale(inv);
      at.step(te, gt);
      acd.step(ce, gc);
      ah.step(hd, gh);
    }
    const double tl = loss_over(0, n_train);
    const double vl = n_val > 0 ? loss_over(n_train, n) : tl;
    fit.history.train_loss.push_back(tl);
    fit.history.val_loss.push_back(vl);
    if (vl < best_val) {
      best_val = vl;
      best_te = te;
      best_ce = ce;
      best_hd = hd;
      fit.history.best_epoch = epoch;
      since_best = 0;
    } else if (config.train.patience > 0 && ++since_best >= config.train.patience) {
      break;
    }
  }
  te = best_te;
  ce = best_ce;
  hd = best_hd;
  model.mark_trained();
  fit.train_accuracy = surrogate_accuracy(model, examples, 0, n_train);
  fit.val_accuracy = surrogate_accuracy(model, examples, n_train, n);
  return fit;
}

UeFeatures ue_features(World& world, std::size_t ue) {
  UeFeatures f;
  const LinkRow& row = world.links(ue);
  f.snr_db.resize(row.quality.size());
  for (std::size_t a = 0; a < row.quality.size(); ++a) f.snr_db[a] = row.snr_db(a, world.channel().snr_floor_db);
  f.rate_bps = world.rates()[ue];
  return f;
}

std::vector<SurrogateExample> surrogate_oracle_dataset(const NetworkTopology& topology,
                                                       const ChannelParams& channel,
                                                       const MobilityConfig& mobility,
                                                       const PopulationConfig& population,
                                                       std::size_t count, std::size_t preset_m,
                                                       const LbOptions& lb, std::uint64_t seed) {
  std::vector<SurrogateExample> out;
  const int max_ues = std::min<int>(population.n_ues_max, static_cast<int>(preset_m));
  const int min_ues = std::min(population.n_ues_min, max_ues);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t s = derive_seed(seed, {0x6f7261636c65, i});
    Rng rng = make_rng(s, {0});
    const int n_ues = std::uniform_int_distribution<int>(min_ues, max_ues)(rng);
    World world(topology, channel, mobility,
                make_scenario(topology.room(), mobility, population, channel.wifi, n_ues, s));
    const SolveResult solved = initial_solve(world, lb, 100);
    const std::size_t target = std::uniform_int_distribution<std::size_t>(0, world.n_ues() - 1)(rng);
    SurrogateExample e;
    e.target = ue_features(world, target);
    for (std::size_t j = 0; j < world.n_ues(); ++j) {
      if (j != target) e.condition.push_back(ue_features(world, j));
    }
    e.label = solved.assignment[target];
    out.push_back(std::move(e));
  }
  return out;
}

void save_surrogate(const std::string& path, const SurrogateModel& model, const std::string& config_hash) {
  if (!model.trained()) throw ModelError("refusing to save an untrained surrogate");
  const SurrogateConfig& c = model.config();
  std::ostringstream os;
  os << "hlwnet-surrogate 1\n";
  os << "config_hash " << (config_hash.empty() ? "none" : config_hash) << '\n';
  os << "mask " << model.n_aps();
  for (bool b : model.lifi_mask()) os << ' ' << (b ? 1 : 0);
  os << "\nsizes " << c.preset_m << ' ' << c.hidden << '\n';
  char buf[128];
  std::snprintf(buf, sizeof buf, "scales %a %a %a\n", c.snr_floor_db, c.snr_ceiling_db, c.rate_scale_bps);
  os << buf;
  for (const Mlp* m : {&model.target_encoder(), &model.condition_encoder(), &model.head()}) {
    ModelFile f;
    f.model = *m;
    write_model(os, f);
  }
  write_file_atomic(path, os.str());
}

SurrogateModel load_surrogate(const std::string& path, std::string* config_hash) {
  std::istringstream is(read_file(path));
  auto token = [&]() {
    std::string t;
    if (!(is >> t)) throw FormatError(path + ": truncated surrogate file");
    return t;
  };
  auto expect = [&](const std::string& want) {
    if (token() != want) throw FormatError(path + ": expected '" + want + "'");
  };
  auto number = [&]() {
    const std::string t = token();
    try {
      std::size_t pos = 0;
      const double v = std::stod(t, &pos);
      if (pos != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw FormatError(path + ": bad number '" + t + "'");
    }
  };
  expect("hlwnet-surrogate");
  expect("1");
  expect("config_hash");
  const std::string hash = token();
  expect("mask");
  const double n = number();
  if (n < 1 || n > 4096) throw FormatError(path + ": bad AP count");
  std::vector<bool> mask;
  for (int i = 0; i < static_cast<int>(n); ++i) mask.push_back(number() != 0.0);
  SurrogateConfig c;
  expect("sizes");
  c.preset_m = static_cast<std::size_t>(number());
  c.hidden = static_cast<std::size_t>(number());
  expect("scales");
  c.snr_floor_db = number();
  c.snr_ceiling_db = number();
  c.rate_scale_bps = number();
  SurrogateModel model(mask, c, 0);
  try {
    for (Mlp* m : {&model.target_encoder(), &model.condition_encoder(), &model.head()}) {
      ModelFile f = read_model(is);
      if (f.model.spec().widths != m->spec().widths) throw FormatError("network shape does not match sizes");
      *m = std::move(f.model);
    }
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
  model.mark_trained();
  if (config_hash) *config_hash = hash == "none" ? "" : hash;
  return model;
}

}  // namespace hlwnet
