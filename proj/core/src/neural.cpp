#include "hlwnet/neural.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hlwnet/error.hpp"
#include "hlwnet/io.hpp"
#include "hlwnet/rng.hpp"

namespace hlwnet {

namespace {

void apply_activation(Activation act, std::vector<double>& z) {
  switch (act) {
    case Activation::Identity: break;
    case Activation::ReLU:
      for (double& v : z) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::Sigmoid:
      for (double& v : z) v = 1.0 / (1.0 + std::exp(-v));
      break;
    case Activation::Softmax: {
      const double peak = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (double& v : z) {
        v = std::exp(v - peak);
        sum += v;
      }
      for (double& v : z) v /= sum;
      break;
    }
  }
}

// dL/dz from dL/da, with a = act(z).
std::vector<double> activation_backward(Activation act, const std::vector<double>& a,
                                        std::vector<double> g) {
  switch (act) {
    case Activation::Identity: break;
    case Activation::ReLU:
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = a[i] > 0.0 ? g[i] : 0.0;
      break;
    case Activation::Sigmoid:
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= a[i] * (1.0 - a[i]);
      break;
    case Activation::Softmax: {
      double dot = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * a[i];
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = a[i] * (g[i] - dot);
      break;
    }
  }
  return g;
}

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_double(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') throw FormatError("bad number '" + tok + "' in model file");
  return v;
}

std::string next_token(std::istream& is) {
  std::string tok;
  if (!(is >> tok)) throw FormatError("truncated model file");
  return tok;
}

void expect(std::istream& is, const std::string& word) {
  const std::string tok = next_token(is);
  if (tok != word) throw FormatError("model file: expected '" + word + "', got '" + tok + "'");
}

std::size_t parse_size(const std::string& tok) {
  const double v = parse_double(tok);
  if (v < 0 || v != std::floor(v) || v > 1e9) throw FormatError("bad count '" + tok + "' in model file");
  return static_cast<std::size_t>(v);
}

}  // namespace

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::ReLU: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Softmax: return "softmax";
  }
  return "?";
}

Activation parse_activation(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "relu") return Activation::ReLU;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "softmax") return Activation::Softmax;
  throw FormatError("unknown activation '" + name + "'");
}

void MlpSpec::validate() const {
  if (widths.size() < 2) throw ConfigError("MLP needs at least input and output widths");
  for (std::size_t w : widths) {
    if (w < 1) throw ConfigError("MLP layer widths must be >= 1");
  }
  if (activations.size() != widths.size() - 1) {
    throw ConfigError("MLP needs one activation per layer");
  }
  for (std::size_t l = 0; l + 1 < activations.size(); ++l) {
    if (activations[l] == Activation::Softmax) throw ConfigError("softmax is only allowed on the output layer");
  }
  if (loss == LossKind::CrossEntropy && activations.back() != Activation::Softmax) {
    throw ConfigError("cross-entropy loss requires a softmax output");
  }
}

void Gradients::zero() {
  for (auto& v : dw) std::fill(v.begin(), v.end(), 0.0);
  for (auto& v : db) std::fill(v.begin(), v.end(), 0.0);
}

void Gradients::scale(double factor) {
  for (auto& v : dw) for (double& x : v) x *= factor;
  for (auto& v : db) for (double& x : v) x *= factor;
}

Mlp Mlp::zeros(MlpSpec spec) {
  spec.validate();
  Mlp m;
  m.spec_ = std::move(spec);
  for (std::size_t l = 0; l < m.spec_.layers(); ++l) {
    DenseLayer layer;
    layer.in = m.spec_.widths[l];
    layer.out = m.spec_.widths[l + 1];
    layer.w.assign(layer.in * layer.out, 0.0);
    layer.b.assign(layer.out, 0.0);
    m.layers_.push_back(std::move(layer));
  }
  return m;
}

Mlp::Mlp(MlpSpec spec, std::uint64_t seed) {
  *this = zeros(std::move(spec));
  Rng rng(derive_seed(seed, {0x6d6c70}));
  for (DenseLayer& layer : layers_) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& w : layer.w) w = u(rng);
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers_) n += l.w.size() + l.b.size();
  return n;
}

double& Mlp::parameter(std::size_t index) {
  for (DenseLayer& l : layers_) {
    if (index < l.w.size()) return l.w[index];
    index -= l.w.size();
    if (index < l.b.size()) return l.b[index];
    index -= l.b.size();
  }
  throw std::out_of_range("parameter index");
}

Gradients Mlp::make_gradients() const {
  Gradients g;
  for (const DenseLayer& l : layers_) {
    g.dw.emplace_back(l.w.size(), 0.0);
    g.db.emplace_back(l.b.size(), 0.0);
  }
  return g;
}

void Mlp::forward_cached(std::span<const double> input, Cache& cache) const {
  if (layers_.empty()) throw ModelError("model has no layers");
  if (input.size() != input_width()) {
    throw ModelError("input width " + std::to_string(input.size()) + " does not match model width " +
                     std::to_string(input_width()));
  }
  cache.act.resize(layers_.size() + 1);
  cache.act[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    const std::vector<double>& x = cache.act[l];
    std::vector<double>& z = cache.act[l + 1];
    z.assign(layer.b.begin(), layer.b.end());
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* row = layer.w.data() + o * layer.in;
      double s = 0.0;
      for (std::size_t i = 0; i < layer.in; ++i) s += row[i] * x[i];
      z[o] += s;
    }
    apply_activation(spec_.activations[l], z);
  }
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  Cache cache;
  forward_cached(input, cache);
  return std::move(cache.act.back());
}

void Mlp::backprop(const Cache& cache, std::vector<double> delta, Gradients& grads,
                   std::vector<double>* grad_input) const {
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const DenseLayer& layer = layers_[l];
    const std::vector<double>& x = cache.act[l];
    std::vector<double>& dw = grads.dw[l];
    std::vector<double>& db = grads.db[l];
    for (std::size_t o = 0; o < layer.out; ++o) {
      db[o] += delta[o];
      double* row = dw.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) row[i] += delta[o] * x[i];
    }
    if (l == 0 && grad_input == nullptr) break;
    std::vector<double> da(layer.in, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* row = layer.w.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) da[i] += row[i] * delta[o];
    }
    if (l == 0) {
      *grad_input = std::move(da);
      break;
    }
    delta = activation_backward(spec_.activations[l - 1], x, std::move(da));
  }
}

double Mlp::backward(const Cache& cache, std::span<const double> label, Gradients& grads,
                     std::vector<double>* grad_input) const {
  const std::vector<double>& out = cache.act.back();
  if (label.size() != out.size()) throw ModelError("label width does not match model output");
  const double loss = sample_loss(spec_.loss, out, label);
  std::vector<double> delta(out.size());
  if (spec_.loss == LossKind::CrossEntropy) {
    for (std::size_t i = 0; i < out.size(); ++i) delta[i] = out[i] - label[i];
  } else {
    const double k = 2.0 / static_cast<double>(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) delta[i] = k * (out[i] - label[i]);
    delta = activation_backward(spec_.activations.back(), out, std::move(delta));
  }
  backprop(cache, std::move(delta), grads, grad_input);
  return loss;
}

void Mlp::backward_from_output(const Cache& cache, std::span<const double> grad_output,
                               Gradients& grads, std::vector<double>* grad_input) const {
  const std::vector<double>& out = cache.act.back();
  if (grad_output.size() != out.size()) throw ModelError("output gradient width mismatch");
  std::vector<double> g(grad_output.begin(), grad_output.end());
  backprop(cache, activation_backward(spec_.activations.back(), out, std::move(g)), grads, grad_input);
}

double mse_loss(std::span<const double> predictions, std::span<const double> labels) {
  if (predictions.empty()) throw std::invalid_argument("mse_loss on empty input");
  if (predictions.size() != labels.size()) throw std::invalid_argument("mse_loss size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - labels[i];
    s += d * d;
  }
  return s / static_cast<double>(predictions.size());
}

double sample_loss(LossKind kind, std::span<const double> output, std::span<const double> label) {
  if (kind == LossKind::MSE) return mse_loss(output, label);
  double s = 0.0;
  for (std::size_t i = 0; i < output.size(); ++i) {
    if (label[i] != 0.0) s -= label[i] * std::log(std::max(output[i], 1e-300));
  }
  return s;
}

Adam::Adam(const Mlp& model, AdamConfig config)
    : cfg_(config), m_(model.make_gradients()), v_(model.make_gradients()) {}

void Adam::step(Mlp& model, const Gradients& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mh = m[i] / c1;
      const double vh = v[i] / c2;
      p[i] -= cfg_.learning_rate * mh / (std::sqrt(vh) + cfg_.epsilon);
    }
  };
  auto& layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].w, grads.dw[l], m_.dw[l], v_.dw[l]);
    update(layers[l].b, grads.db[l], m_.db[l], v_.db[l]);
  }
}

Normalizer Normalizer::fit(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("cannot fit a normalizer on no rows");
  Normalizer n;
  n.lo = rows.front();
  n.hi = rows.front();
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      n.lo[c] = std::min(n.lo[c], r[c]);
      n.hi[c] = std::max(n.hi[c], r[c]);
    }
  }
  return n;
}

double Normalizer::normalize(std::size_t col, double x) const {
  const double span = hi[col] - lo[col];
  return span > 0.0 ? (x - lo[col]) / span : 0.0;
}

double Normalizer::denormalize(std::size_t col, double x) const {
  return lo[col] + x * (hi[col] - lo[col]);
}

std::vector<double> Normalizer::normalize(std::span<const double> x) const {
  std::vector<double> out(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) out[c] = normalize(c, x[c]);
  return out;
}

std::vector<double> Normalizer::denormalize(std::span<const double> x) const {
  std::vector<double> out(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) out[c] = denormalize(c, x[c]);
  return out;
}

double dataset_loss(const Mlp& model, const std::vector<std::vector<double>>& inputs,
                    const std::vector<std::vector<double>>& labels, std::size_t begin,
                    std::size_t end) {
  if (end <= begin) return 0.0;
  Mlp::Cache cache;
  double s = 0.0;
  for (std::size_t r = begin; r < end; ++r) {
    model.forward_cached(inputs[r], cache);
    s += sample_loss(model.spec().loss, cache.act.back(), labels[r]);
  }
  return s / static_cast<double>(end - begin);
}

TrainHistory train(Mlp& model, const std::vector<std::vector<double>>& inputs,
                   const std::vector<std::vector<double>>& labels, const TrainConfig& config) {
  if (inputs.empty()) throw std::invalid_argument("empty training set");
  if (inputs.size() != labels.size()) throw std::invalid_argument("inputs and labels differ in rows");
  if (config.batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (!(config.validation_fraction >= 0.0 && config.validation_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in [0, 1)");
  }
  const std::size_t n = inputs.size();
  std::size_t n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * config.validation_fraction));
  if (n_val >= n) n_val = n - 1;
  const std::size_t n_train = n - n_val;

  Adam adam(model, AdamConfig{config.learning_rate});
  Gradients grads = model.make_gradients();
  Mlp::Cache cache;
  Rng rng(derive_seed(config.seed, {0x747261696e}));
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);

  TrainHistory hist;
  Mlp best = model;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n_train; start += config.batch_size) {
      const std::size_t stop = std::min(n_train, start + config.batch_size);
      grads.zero();
      for (std::size_t i = start; i < stop; ++i) {
        model.forward_cached(inputs[order[i]], cache);
        model.backward(cache, labels[order[i]], grads);
      }
      grads.scale(1.0 / static_cast<double>(stop - start));
      adam.step(model, grads);
    }
    const double tl = dataset_loss(model, inputs, labels, 0, n_train);
    const double vl = n_val > 0 ? dataset_loss(model, inputs, labels, n_train, n) : tl;
    hist.train_loss.push_back(tl);
    hist.val_loss.push_back(vl);
    if (vl < best_val) {
      best_val = vl;
      best = model;
      hist.best_epoch = epoch;
      since_best = 0;
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      break;
    }
  }
  if (hist.best_epoch >= 0) model = std::move(best);
  return hist;
}

void write_model(std::ostream& os, const ModelFile& file) {
  const MlpSpec& spec = file.model.spec();
  os << "hlwnet-mlp 1\n";
  os << "widths " << spec.widths.size();
  for (std::size_t w : spec.widths) os << ' ' << w;
  os << "\nactivations";
  for (Activation a : spec.activations) os << ' ' << activation_name(a);
  os << "\nloss " << (spec.loss == LossKind::MSE ? "mse" : "cross_entropy") << '\n';
  os << "meta " << file.meta.size() << '\n';
  for (const auto& [k, v] : file.meta) {
    if (k.find_first_of(" \t\n") != std::string::npos || v.find_first_of(" \t\n") != std::string::npos ||
        k.empty() || v.empty()) {
      throw std::invalid_argument("model metadata must be non-empty and whitespace-free");
    }
    os << k << ' ' << v << '\n';
  }
  if (file.input_norm) {
    os << "normalizer " << file.input_norm->lo.size();
    for (std::size_t c = 0; c < file.input_norm->lo.size(); ++c) {
      os << ' ' << hex(file.input_norm->lo[c]) << ' ' << hex(file.input_norm->hi[c]);
    }
    os << '\n';
  } else {
    os << "normalizer 0\n";
  }
  for (std::size_t l = 0; l < file.model.layers().size(); ++l) {
    const DenseLayer& layer = file.model.layers()[l];
    os << "layer " << l << ' ' << layer.out << ' ' << layer.in << '\n';
    for (std::size_t o = 0; o < layer.out; ++o) {
      for (std::size_t i = 0; i < layer.in; ++i) os << (i ? " " : "") << hex(layer.w[o * layer.in + i]);
      os << '\n';
    }
    for (std::size_t o = 0; o < layer.out; ++o) os << (o ? " " : "") << hex(layer.b[o]);
    os << '\n';
  }
  os << "end\n";
}

ModelFile read_model(std::istream& is) {
  expect(is, "hlwnet-mlp");
  if (next_token(is) != "1") throw FormatError("unsupported model file version");
  MlpSpec spec;
  expect(is, "widths");
  const std::size_t n_widths = parse_size(next_token(is));
  if (n_widths < 2 || n_widths > 64) throw FormatError("bad layer count in model file");
  for (std::size_t i = 0; i < n_widths; ++i) spec.widths.push_back(parse_size(next_token(is)));
  expect(is, "activations");
  for (std::size_t i = 0; i + 1 < n_widths; ++i) spec.activations.push_back(parse_activation(next_token(is)));
  expect(is, "loss");
  const std::string loss = next_token(is);
  if (loss == "mse") {
    spec.loss = LossKind::MSE;
  } else if (loss == "cross_entropy") {
    spec.loss = LossKind::CrossEntropy;
  } else {
    throw FormatError("unknown loss '" + loss + "'");
  }
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
  ModelFile file;
  expect(is, "meta");
  const std::size_t n_meta = parse_size(next_token(is));
  for (std::size_t i = 0; i < n_meta; ++i) {
    std::string k = next_token(is);
    file.meta[k] = next_token(is);
  }
  expect(is, "normalizer");
  const std::size_t n_norm = parse_size(next_token(is));
  if (n_norm > 0) {
    if (n_norm != spec.widths.front()) throw FormatError("normalizer width does not match model input");
    Normalizer norm;
    for (std::size_t c = 0; c < n_norm; ++c) {
      norm.lo.push_back(parse_double(next_token(is)));
      norm.hi.push_back(parse_double(next_token(is)));
    }
    file.input_norm = std::move(norm);
  }
  file.model = Mlp::zeros(spec);
  for (std::size_t l = 0; l < file.model.layers().size(); ++l) {
    DenseLayer& layer = file.model.layers()[l];
    expect(is, "layer");
    if (parse_size(next_token(is)) != l || parse_size(next_token(is)) != layer.out ||
        parse_size(next_token(is)) != layer.in) {
      throw FormatError("layer header does not match model spec");
    }
    for (double& w : layer.w) w = parse_double(next_token(is));
    for (double& b : layer.b) b = parse_double(next_token(is));
  }
  expect(is, "end");
  return file;
}

void save_model(const std::string& path, const ModelFile& file) {
  std::ostringstream os;
  write_model(os, file);
  write_file_atomic(path, os.str());
}

ModelFile load_model(const std::string& path) {
  std::istringstream is(read_file(path));
  return read_model(is);
}

}  // namespace hlwnet
