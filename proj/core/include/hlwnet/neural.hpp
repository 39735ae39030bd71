#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hlwnet {

enum class Activation { Identity, ReLU, Sigmoid, Softmax };
enum class LossKind { MSE, CrossEntropy };

struct MlpSpec {
  std::vector<std::size_t> widths;       // input, hidden..., output
  std::vector<Activation> activations;   // one per layer (widths.size() - 1)
  LossKind loss = LossKind::MSE;

  std::size_t layers() const noexcept { return widths.empty() ? 0 : widths.size() - 1; }
  void validate() const;
};

/// Row-major dense layer: y = act(W x + b), W is out x in.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> w;
  std::vector<double> b;
};

struct Gradients {
  std::vector<std::vector<double>> dw;
  std::vector<std::vector<double>> db;

  void zero();
  void scale(double factor);
};

class Mlp {
 public:
  Mlp() = default;
  /// He-style uniform init, U(-sqrt(6/fan_in), sqrt(6/fan_in)); biases 0.
  Mlp(MlpSpec spec, std::uint64_t seed);
  static Mlp zeros(MlpSpec spec);

  const MlpSpec& spec() const noexcept { return spec_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::size_t input_width() const { return spec_.widths.front(); }
  std::size_t output_width() const { return spec_.widths.back(); }
  std::size_t parameter_count() const;
  /// Flat view over all parameters: layer by layer, W then b.
  double& parameter(std::size_t index);

  std::vector<double> forward(std::span<const double> input) const;

  /// Activations of every layer, input first.
  struct Cache {
    std::vector<std::vector<double>> act;
  };
  void forward_cached(std::span<const double> input, Cache& cache) const;

  /// Accumulates dLoss/dParams of one sample into `grads` (sample loss as in
  /// sample_loss). Returns the sample loss.
  double backward(const Cache& cache, std::span<const double> label, Gradients& grads,
                  std::vector<double>* grad_input = nullptr) const;

  /// Accumulates gradients for an externally supplied dLoss/dOutput. When
  /// `grad_input` is non-null it receives dLoss/dInput.
  void backward_from_output(const Cache& cache, std::span<const double> grad_output,
                            Gradients& grads, std::vector<double>* grad_input = nullptr) const;

  Gradients make_gradients() const;

 private:
  void backprop(const Cache& cache, std::vector<double> delta, Gradients& grads,
                std::vector<double>* grad_input) const;

  MlpSpec spec_;
  std::vector<DenseLayer> layers_;
};

/// (1/N) sum (p - y)^2; throws on empty or mismatched input.
double mse_loss(std::span<const double> predictions, std::span<const double> labels);

/// Loss of one sample: MSE averaged over outputs, or -sum y log p.
double sample_loss(LossKind kind, std::span<const double> output, std::span<const double> label);

struct AdamConfig {
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(const Mlp& model, AdamConfig config);
  void step(Mlp& model, const Gradients& grads);
  long long steps() const noexcept { return t_; }
  const AdamConfig& config() const noexcept { return cfg_; }

 private:
  AdamConfig cfg_;
  long long t_ = 0;
  Gradients m_;
  Gradients v_;
};

/// Per-column linear map of [lo, hi] onto [0, 1].
struct Normalizer {
  std::vector<double> lo;
  std::vector<double> hi;

  static Normalizer fit(const std::vector<std::vector<double>>& rows);
  double normalize(std::size_t col, double x) const;
  double denormalize(std::size_t col, double x) const;
  std::vector<double> normalize(std::span<const double> x) const;
  std::vector<double> denormalize(std::span<const double> x) const;
};

struct TrainConfig {
  int epochs = 200;
  std::size_t batch_size = 1;
  double learning_rate = 1e-5;
  double validation_fraction = 0.2;  // trailing rows held out
  int patience = 30;                  // early stop on validation loss; 0 disables
  std::uint64_t seed = 1;
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int best_epoch = -1;  // 0-based; weights are restored from this epoch
};

/// Mini-batch Adam. The last `validation_fraction` of rows form the
/// validation split; training rows are reshuffled every epoch.
TrainHistory train(Mlp& model, const std::vector<std::vector<double>>& inputs,
                   const std::vector<std::vector<double>>& labels, const TrainConfig& config);

double dataset_loss(const Mlp& model, const std::vector<std::vector<double>>& inputs,
                    const std::vector<std::vector<double>>& labels, std::size_t begin,
                    std::size_t end);

struct ModelFile {
  Mlp model;
  std::optional<Normalizer> input_norm;
  std::map<std::string, std::string> meta;
};

void write_model(std::ostream& os, const ModelFile& file);
ModelFile read_model(std::istream& is);
void save_model(const std::string& path, const ModelFile& file);
ModelFile load_model(const std::string& path);

const char* activation_name(Activation a);
Activation parse_activation(const std::string& name);

}  // namespace hlwnet
