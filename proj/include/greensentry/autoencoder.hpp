#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "greensentry/execution.hpp"
#include "greensentry/preprocess.hpp"

namespace greensentry {

enum class Activation { relu, tanh, sigmoid, linear };
std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

/// Layer widths input -> hidden... -> input. The default funnel for node
/// size n is n, n/2, n/4 (encoder), n/8 (bottleneck), n/4, n/2, n (decoder).
struct ModelConfig {
  int input_dim = static_cast<int>(kFeatureCount);
  int node_size = 256;
  std::vector<int> hidden = {256, 128, 64, 32, 64, 128, 256};
  Activation hidden_activation = Activation::relu;
  Activation output_activation = Activation::sigmoid;

  static ModelConfig funnel(int node_size = 256, int input_dim = static_cast<int>(kFeatureCount));
  /// Arbitrary hidden widths (toy networks, gradient checks).
  static ModelConfig custom(int input_dim, std::vector<int> hidden, Activation hidden_activation,
                            Activation output_activation);

  std::vector<int> widths() const;
  /// Throws UsageError on non-positive widths.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Weights are row-major fan_out x fan_in.
struct DenseLayer {
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double& w(std::size_t out, std::size_t in) { return weights[out * fan_in + in]; }
  double w(std::size_t out, std::size_t in) const { return weights[out * fan_in + in]; }
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct Parameters {
  ModelConfig config;
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return layers.front().fan_in; }
  std::size_t parameter_count() const;
  /// Zero-filled layers with this network's shapes (gradient storage).
  Parameters zeros_like() const;
  friend bool operator==(const Parameters&, const Parameters&) = default;
};

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
Parameters init(const ModelConfig& config, std::uint64_t seed);

struct ForwardCache {
  std::vector<std::vector<double>> pre;   // affine outputs per layer
  std::vector<std::vector<double>> post;  // post[0] is the input itself
};

struct ForwardResult {
  std::vector<double> reconstruction;
  ForwardCache cache;
};

/// Throws NumericalError("numerical overflow in layer k") on non-finite
/// intermediates.
ForwardResult forward(const Parameters& params, std::span<const double> x);

/// Mean of squared component differences.
double loss(std::span<const double> x, std::span<const double> xhat);

/// Gradient of the mean batch loss; batch is row-major, input_dim per row.
Parameters gradients(const Parameters& params, std::span<const double> batch);

enum class Optimizer { sgd, adam };
std::string_view optimizer_name(Optimizer o);
Optimizer parse_optimizer(std::string_view name);

struct TrainConfig {
  int epochs = 60;
  int batch_size = 8;
  double learning_rate = 1e-6;
  Optimizer optimizer = Optimizer::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  /// Throws UsageError on epochs < 1, batch_size < 1, learning_rate <= 0.
  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// First/second moment state for Adam; unused by SGD.
class OptimizerState {
 public:
  OptimizerState(const Parameters& shape, const TrainConfig& config);
  /// Applies one update in place.
  void step(Parameters& params, const Parameters& grads);
  long steps() const { return t_; }

 private:
  TrainConfig config_;
  Parameters m_;
  Parameters v_;
  long t_ = 0;
};

struct TrainReport {
  std::vector<double> train_loss;       // per-epoch mean, measured before each update
  std::vector<double> validation_loss;  // per-epoch mean after the epoch
  double wall_time_seconds = 0.0;
};

struct TrainResult {
  Parameters params;
  TrainReport report;
};

/// Mini-batch training with a per-epoch shuffle drawn from config.seed.
/// Throws DataError if `train` carries anomaly flags, NumericalError on a
/// non-finite loss (message names epoch and batch).
TrainResult train(Parameters params, const FeatureMatrix& train, const FeatureMatrix& validation,
                  const TrainConfig& config);

/// One MSE per row, order preserved. Both execution paths give identical
/// bits.
std::vector<double> reconstruction_losses(const Parameters& params, const FeatureMatrix& m,
                                          Execution exec = Execution::parallel);

/// Reconstructions for every row (same numerics as reconstruction_losses).
FeatureMatrix reconstruct(const Parameters& params, const FeatureMatrix& m, Execution exec = Execution::parallel);

}  // namespace greensentry
