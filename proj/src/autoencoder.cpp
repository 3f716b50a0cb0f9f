#include "greensentry/autoencoder.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <cmath>
#include <numeric>
#include <string>

#include "greensentry/error.hpp"
#include "greensentry/kernels.hpp"
#include "greensentry/rng.hpp"

namespace greensentry {
namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::tanh: return std::tanh(z);
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::linear: return z;
  }
  return z;
}

// d activation / dz, from the pre-activation z and output y
double derivative(Activation a, double z, double y) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: return 1.0 - y * y;
    case Activation::sigmoid: return y * (1.0 - y);
    case Activation::linear: return 1.0;
  }
  return 1.0;
}

Activation layer_activation(const Parameters& p, std::size_t layer) {
  return layer + 1 == p.layers.size() ? p.config.output_activation : p.config.hidden_activation;
}

// Activations for a batch of samples, reused across batches.
struct Workspace {
  std::size_t batch = 0;
  std::vector<std::vector<double>> pre;    // [layer+1]: batch x fan_out
  std::vector<std::vector<double>> post;   // [0] input, [layer+1] output
  std::vector<std::vector<double>> delta;  // [layer+1]: dLoss/dpre

  void reserve(const Parameters& p, std::size_t b) {
    batch = b;
    const std::size_t n = p.layers.size();
    pre.resize(n + 1);
    post.resize(n + 1);
    delta.resize(n + 1);
    post[0].resize(b * p.layers.front().fan_in);
    for (std::size_t l = 0; l < n; ++l) {
      pre[l + 1].resize(b * p.layers[l].fan_out);
      post[l + 1].resize(b * p.layers[l].fan_out);
      delta[l + 1].resize(b * p.layers[l].fan_out);
    }
  }
};

// post[0] must hold `b` input rows.
void batch_forward(const Parameters& p, Workspace& ws, std::size_t b) {
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& layer = p.layers[l];
    const Activation act = layer_activation(p, l);
    kernels::dense_forward(layer.weights, layer.bias, layer.fan_in, layer.fan_out, ws.post[l].data(),
                           ws.pre[l + 1].data(), b);
    const std::size_t count = b * layer.fan_out;
    const double* z = ws.pre[l + 1].data();
    double* y = ws.post[l + 1].data();
    bool finite = true;
    for (std::size_t i = 0; i < count; ++i) {
      y[i] = activate(act, z[i]);
      finite &= std::isfinite(z[i]) && std::isfinite(y[i]);
    }
    if (!finite) throw NumericalError("numerical overflow in layer " + std::to_string(l + 1));
  }
}

// Accumulates the gradient of (1/b) sum_s mse(x_s, xhat_s) into grads.
void batch_backward(const Parameters& p, Workspace& ws, std::size_t b, Parameters& grads) {
  const std::size_t n = p.layers.size();
  const std::size_t dim = p.layers.front().fan_in;
  const double scale = 2.0 / (static_cast<double>(b) * static_cast<double>(dim));
  {
    const Activation act = layer_activation(p, n - 1);
    const double* x = ws.post[0].data();
    const double* z = ws.pre[n].data();
    const double* y = ws.post[n].data();
    double* d = ws.delta[n].data();
    for (std::size_t i = 0; i < b * dim; ++i) d[i] = scale * (y[i] - x[i]) * derivative(act, z[i], y[i]);
  }
  for (std::size_t l = n; l-- > 0;) {
    const auto& layer = p.layers[l];
    auto& g = grads.layers[l];
    const double* d = ws.delta[l + 1].data();
    const double* a = ws.post[l].data();
    for (std::size_t j = 0; j < layer.fan_out; ++j) {
      double* grow = g.weights.data() + j * layer.fan_in;
      for (std::size_t s = 0; s < b; ++s) {
        const double dj = d[s * layer.fan_out + j];
        kernels::axpy(dj, a + s * layer.fan_in, grow, layer.fan_in);
        g.bias[j] += dj;
      }
    }
    if (l == 0) break;
    const Activation act = layer_activation(p, l - 1);
    double* dprev = ws.delta[l].data();
    const double* zprev = ws.pre[l].data();
    const double* yprev = ws.post[l].data();
    for (std::size_t s = 0; s < b; ++s) {
      double* out = dprev + s * layer.fan_in;
      std::fill(out, out + layer.fan_in, 0.0);
      for (std::size_t j = 0; j < layer.fan_out; ++j) {
        kernels::axpy(d[s * layer.fan_out + j], layer.weights.data() + j * layer.fan_in, out, layer.fan_in);
      }
      for (std::size_t i = 0; i < layer.fan_in; ++i) {
        const std::size_t k = s * layer.fan_in + i;
        out[i] *= derivative(act, zprev[k], yprev[k]);
      }
    }
  }
}

void zero(Parameters& p) {
  for (auto& l : p.layers) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
}

void load_rows(Workspace& ws, const FeatureMatrix& m, const std::size_t* idx, std::size_t b) {
  for (std::size_t s = 0; s < b; ++s) {
    const auto& row = m.rows[idx ? idx[s] : s];
    std::copy(row.begin(), row.end(), ws.post[0].begin() + static_cast<std::ptrdiff_t>(s * kFeatureCount));
  }
}

void require_feature_input(const Parameters& p) {
  if (p.layers.empty() || p.layers.front().fan_in != kFeatureCount) {
    throw DataError("model input width " + std::to_string(p.layers.empty() ? 0 : p.layers.front().fan_in) +
                    " does not match the " + std::to_string(kFeatureCount) + " sensor features");
  }
}

// Runs `fn(row_offset, rows, workspace)` over fixed 64-row blocks.
template <typename BlockFn>
void for_blocks(const Parameters& p, std::size_t n, Execution exec, BlockFn fn) {
  constexpr std::size_t kBlock = 64;
  const auto blocks = static_cast<std::ptrdiff_t>((n + kBlock - 1) / kBlock);
  auto run = [&](std::ptrdiff_t blk, Workspace& ws) {
    const std::size_t begin = static_cast<std::size_t>(blk) * kBlock;
    fn(begin, std::min(kBlock, n - begin), ws);
  };
  if (exec == Execution::parallel) {
    std::exception_ptr failure;
#pragma omp parallel
    {
      const kernels::ScopedFlushToZero ftz;
      Workspace ws;
      ws.reserve(p, kBlock);
#pragma omp for schedule(static)
      for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
        try {
          run(blk, ws);
        } catch (...) {
#pragma omp critical
          if (!failure) failure = std::current_exception();
        }
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    const kernels::ScopedFlushToZero ftz;
    Workspace ws;
    ws.reserve(p, kBlock);
    for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) run(blk, ws);
  }
}

}  // namespace

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::linear: return "linear";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "linear") return Activation::linear;
  throw UsageError("unknown activation '" + std::string(name) + "'");
}

std::string_view optimizer_name(Optimizer o) { return o == Optimizer::sgd ? "sgd" : "adam"; }

Optimizer parse_optimizer(std::string_view name) {
  if (name == "sgd") return Optimizer::sgd;
  if (name == "adam") return Optimizer::adam;
  throw UsageError("unknown optimizer '" + std::string(name) + "'");
}

ModelConfig ModelConfig::funnel(int node_size, int input_dim) {
  ModelConfig c;
  c.input_dim = input_dim;
  c.node_size = node_size;
  c.hidden = {node_size, node_size / 2, node_size / 4, node_size / 8, node_size / 4, node_size / 2, node_size};
  return c;
}

ModelConfig ModelConfig::custom(int input_dim, std::vector<int> hidden, Activation hidden_activation,
                                Activation output_activation) {
  ModelConfig c;
  c.input_dim = input_dim;
  c.node_size = hidden.empty() ? 0 : hidden.front();
  c.hidden = std::move(hidden);
  c.hidden_activation = hidden_activation;
  c.output_activation = output_activation;
  return c;
}

std::vector<int> ModelConfig::widths() const {
  std::vector<int> w;
  w.push_back(input_dim);
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(input_dim);
  return w;
}

void ModelConfig::validate() const {
  if (input_dim < 1) throw UsageError("model: input_dim must be >= 1");
  for (int h : hidden) {
    if (h < 1) throw UsageError("model: every layer width must be >= 1 (node_size too small?)");
  }
}

std::size_t Parameters::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

Parameters Parameters::zeros_like() const {
  Parameters z;
  z.config = config;
  z.layers.reserve(layers.size());
  for (const auto& l : layers) {
    z.layers.push_back({l.fan_in, l.fan_out, std::vector<double>(l.weights.size(), 0.0),
                        std::vector<double>(l.bias.size(), 0.0)});
  }
  return z;
}

Parameters init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  Parameters p;
  p.config = config;
  const auto w = config.widths();
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    DenseLayer layer;
    layer.fan_in = static_cast<std::size_t>(w[l]);
    layer.fan_out = static_cast<std::size_t>(w[l + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.fan_in + layer.fan_out));
    layer.weights.resize(layer.fan_in * layer.fan_out);
    for (auto& x : layer.weights) x = rng.uniform(-limit, limit);
    layer.bias.assign(layer.fan_out, 0.0);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

ForwardResult forward(const Parameters& params, std::span<const double> x) {
  if (x.size() != params.input_dim()) throw DataError("forward: input has wrong width");
  for (double v : x) {
    if (!std::isfinite(v)) throw NumericalError("forward: non-finite input");
  }
  Workspace ws;
  ws.reserve(params, 1);
  std::copy(x.begin(), x.end(), ws.post[0].begin());
  batch_forward(params, ws, 1);
  ForwardResult r;
  r.reconstruction = ws.post.back();
  r.cache.pre = std::move(ws.pre);
  r.cache.post = std::move(ws.post);
  r.cache.pre.erase(r.cache.pre.begin());
  return r;
}

double loss(std::span<const double> x, std::span<const double> xhat) {
  if (x.size() != xhat.size() || x.empty()) throw DataError("loss: vectors must be non-empty and equal length");
  return kernels::mean_squared_error(x.data(), xhat.data(), x.size());
}

Parameters gradients(const Parameters& params, std::span<const double> batch) {
  const std::size_t dim = params.input_dim();
  if (batch.empty() || batch.size() % dim != 0) throw DataError("gradients: batch must hold whole rows");
  const std::size_t b = batch.size() / dim;
  Workspace ws;
  ws.reserve(params, b);
  std::copy(batch.begin(), batch.end(), ws.post[0].begin());
  batch_forward(params, ws, b);
  Parameters grads = params.zeros_like();
  batch_backward(params, ws, b, grads);
  return grads;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw UsageError("train: epochs must be >= 1");
  if (batch_size < 1) throw UsageError("train: batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw UsageError("train: learning_rate must be > 0");
  if (optimizer == Optimizer::adam &&
      !(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0)) {
    throw UsageError("train: adam needs 0 <= beta < 1 and epsilon > 0");
  }
}

OptimizerState::OptimizerState(const Parameters& shape, const TrainConfig& config)
    : config_(config), m_(shape.zeros_like()), v_(shape.zeros_like()) {}

void OptimizerState::step(Parameters& params, const Parameters& grads) {
  ++t_;
  const double lr = config_.learning_rate;
  if (config_.optimizer == Optimizer::sgd) {
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      kernels::axpy(-lr, grads.layers[l].weights.data(), params.layers[l].weights.data(),
                    params.layers[l].weights.size());
      kernels::axpy(-lr, grads.layers[l].bias.data(), params.layers[l].bias.data(), params.layers[l].bias.size());
    }
    return;
  }
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double eps = config_.epsilon;
  auto update = [&](std::vector<double>& w, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    update(params.layers[l].weights, grads.layers[l].weights, m_.layers[l].weights, v_.layers[l].weights);
    update(params.layers[l].bias, grads.layers[l].bias, m_.layers[l].bias, v_.layers[l].bias);
  }
}

TrainResult train(Parameters params, const FeatureMatrix& train_rows, const FeatureMatrix& validation,
                  const TrainConfig& config) {
  config.validate();
  require_feature_input(params);
  if (train_rows.empty()) throw DataError("train: empty training matrix");
  for (char flag : train_rows.anomalous) {
    if (flag) throw DataError("train: training data contains labeled anomalies (scrub it first)");
  }
  const auto started = std::chrono::steady_clock::now();
  const kernels::ScopedFlushToZero ftz;

  const std::size_t n = train_rows.size();
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  Workspace ws;
  ws.reserve(params, std::min(batch, n));
  Parameters grads = params.zeros_like();
  OptimizerState optimizer(params, config);
  std::vector<std::size_t> order(n);

  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = Rng::derive(config.seed, static_cast<std::uint64_t>(epoch));
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < n; begin += batch, ++batch_index) {
      const std::size_t b = std::min(batch, n - begin);
      load_rows(ws, train_rows, order.data() + begin, b);
      try {
        batch_forward(params, ws, b);
      } catch (const NumericalError& e) {
        throw NumericalError("train: epoch " + std::to_string(epoch + 1) + " batch " +
                             std::to_string(batch_index + 1) + ": " + e.what());
      }
      double batch_loss = 0.0;
      for (std::size_t s = 0; s < b; ++s) {
        batch_loss += kernels::mean_squared_error(ws.post[0].data() + s * kFeatureCount,
                                                  ws.post.back().data() + s * kFeatureCount, kFeatureCount);
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch + 1) + " batch " +
                             std::to_string(batch_index + 1));
      }
      epoch_loss += batch_loss;
      zero(grads);
      batch_backward(params, ws, b, grads);
      optimizer.step(params, grads);
    }
    result.report.train_loss.push_back(epoch_loss / static_cast<double>(n));

    double val = 0.0;
    if (!validation.empty()) {
      const auto losses = reconstruction_losses(params, validation);
      for (double l : losses) val += l;
      val /= static_cast<double>(losses.size());
    }
    if (!std::isfinite(val)) {
      throw NumericalError("train: non-finite validation loss at epoch " + std::to_string(epoch + 1));
    }
    result.report.validation_loss.push_back(val);
  }
  result.report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  result.params = std::move(params);
  return result;
}

std::vector<double> reconstruction_losses(const Parameters& params, const FeatureMatrix& m, Execution exec) {
  require_feature_input(params);
  std::vector<double> out(m.size());
  for_blocks(params, m.size(), exec, [&](std::size_t begin, std::size_t rows, Workspace& ws) {
    for (std::size_t s = 0; s < rows; ++s) {
      const auto& row = m.rows[begin + s];
      std::copy(row.begin(), row.end(), ws.post[0].begin() + static_cast<std::ptrdiff_t>(s * kFeatureCount));
    }
    batch_forward(params, ws, rows);
    for (std::size_t s = 0; s < rows; ++s) {
      out[begin + s] = kernels::mean_squared_error(ws.post[0].data() + s * kFeatureCount,
                                                   ws.post.back().data() + s * kFeatureCount, kFeatureCount);
    }
  });
  return out;
}

FeatureMatrix reconstruct(const Parameters& params, const FeatureMatrix& m, Execution exec) {
  require_feature_input(params);
  FeatureMatrix out;
  out.keys = m.keys;
  out.anomalous = m.anomalous;
  out.rows.resize(m.size());
  for_blocks(params, m.size(), exec, [&](std::size_t begin, std::size_t rows, Workspace& ws) {
    for (std::size_t s = 0; s < rows; ++s) {
      const auto& row = m.rows[begin + s];
      std::copy(row.begin(), row.end(), ws.post[0].begin() + static_cast<std::ptrdiff_t>(s * kFeatureCount));
    }
    batch_forward(params, ws, rows);
    for (std::size_t s = 0; s < rows; ++s) {
      std::copy_n(ws.post.back().begin() + static_cast<std::ptrdiff_t>(s * kFeatureCount), kFeatureCount,
                  out.rows[begin + s].begin());
    }
  });
  return out;
}

}  // namespace greensentry
