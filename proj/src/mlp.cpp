#include "instobj/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "instobj/errors.hpp"
#include "instobj/simd/kernels.hpp"

namespace instobj {

namespace {

constexpr std::size_t kEvalChunk = 2048;

struct Workspace {
  std::vector<Matrix> pre;  // pre-activations per layer
  std::vector<Matrix> act;  // act[0] = input, act[l + 1] = output of layer l
  Matrix delta;
  Matrix delta_prev;
};

void check_input(const Mlp& mlp, const Matrix& input) {
  if (mlp.layers.empty()) throw UsageError("network has no layers");
  if (input.cols != static_cast<std::size_t>(mlp.layers.front().in)) {
    throw UsageError("input has " + std::to_string(input.cols) + " columns, network expects " +
                     std::to_string(mlp.layers.front().in));
  }
}

void forward_into(const Mlp& mlp, const Matrix& input, Workspace& ws) {
  const auto& k = simd::active_kernels();
  const std::size_t n_layers = mlp.layers.size();
  ws.pre.resize(n_layers);
  ws.act.resize(n_layers + 1);
  ws.act[0] = input;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = mlp.layers[l];
    Matrix& z = ws.pre[l];
    z = Matrix(input.rows, static_cast<std::size_t>(layer.out));
    k.gemm_nt(input.rows, layer.out, layer.in, ws.act[l].data.data(), layer.weight.data(),
              layer.bias.data(), z.data.data());
    ws.act[l + 1] = z;
    if (l + 1 < n_layers) k.relu(z.data.size(), ws.act[l + 1].data.data());
  }
}

}  // namespace

Matrix gather_rows(const Matrix& src, std::span<const std::size_t> indices) {
  Matrix out(indices.size(), src.cols);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::copy_n(src.data.begin() + static_cast<std::ptrdiff_t>(indices[i] * src.cols), src.cols,
                out.data.begin() + static_cast<std::ptrdiff_t>(i * src.cols));
  }
  return out;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<int> paper_layer_sizes() { return {9, 600, 2000, 2000, 2000, 100}; }
std::vector<int> small_layer_sizes() { return {9, 64, 64, 100}; }

Mlp init_mlp(std::span<const int> sizes, std::uint64_t seed) {
  if (sizes.size() < 2) throw ShapeError("a network needs at least two layer sizes");
  for (int s : sizes) {
    if (s <= 0) throw ShapeError("layer sizes must be positive");
  }
  Mlp mlp;
  mlp.sizes.assign(sizes.begin(), sizes.end());
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    layer.in = sizes[l];
    layer.out = sizes[l + 1];
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / layer.in));
    layer.weight.resize(static_cast<std::size_t>(layer.in) * layer.out);
    for (double& w : layer.weight) w = dist(rng);
    layer.bias.assign(static_cast<std::size_t>(layer.out), 0.0);
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

Matrix forward(const Mlp& mlp, const Matrix& input, bool clamp_output) {
  check_input(mlp, input);
  Matrix out(input.rows, static_cast<std::size_t>(mlp.layers.back().out));
  Workspace ws;
  for (std::size_t start = 0; start < input.rows; start += kEvalChunk) {
    const std::size_t count = std::min(kEvalChunk, input.rows - start);
    Matrix chunk(count, input.cols);
    std::copy_n(input.data.begin() + static_cast<std::ptrdiff_t>(start * input.cols),
                count * input.cols, chunk.data.begin());
    forward_into(mlp, chunk, ws);
    std::copy(ws.act.back().data.begin(), ws.act.back().data.end(),
              out.data.begin() + static_cast<std::ptrdiff_t>(start * out.cols));
  }
  if (clamp_output) {
    for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

double mse_loss(const Matrix& pred, const Matrix& target) {
  if (pred.rows != target.rows || pred.cols != target.cols) {
    throw UsageError("prediction and target shapes differ");
  }
  if (pred.data.empty()) throw UsageError("empty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const double d = pred.data[i] - target.data[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.data.size());
}

Gradients zero_gradients(const Mlp& mlp) {
  Gradients g;
  for (const auto& l : mlp.layers) {
    g.weight.emplace_back(l.weight.size(), 0.0);
    g.bias.emplace_back(l.bias.size(), 0.0);
  }
  return g;
}

namespace {

double loss_and_gradients_ws(const Mlp& mlp, const Matrix& input, const Matrix& target,
                             Gradients& grads, Workspace& ws) {
  check_input(mlp, input);
  forward_into(mlp, input, ws);
  const Matrix& pred = ws.act.back();
  const double loss = mse_loss(pred, target);

  const auto& k = simd::active_kernels();
  const std::size_t batch = input.rows;
  const double scale = 2.0 / static_cast<double>(pred.data.size());
  ws.delta = Matrix(batch, pred.cols);
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    ws.delta.data[i] = scale * (pred.data[i] - target.data[i]);
  }

  if (grads.weight.size() != mlp.layers.size()) grads = zero_gradients(mlp);
  for (std::size_t l = mlp.layers.size(); l-- > 0;) {
    const auto& layer = mlp.layers[l];
    k.gemm_tn(layer.out, layer.in, batch, ws.delta.data.data(), ws.act[l].data.data(),
              grads.weight[l].data());
    k.column_sums(batch, layer.out, ws.delta.data.data(), grads.bias[l].data());
    if (l == 0) break;
    ws.delta_prev = Matrix(batch, static_cast<std::size_t>(layer.in));
    k.gemm_nn(batch, layer.in, layer.out, ws.delta.data.data(), layer.weight.data(),
              ws.delta_prev.data.data());
    k.relu_backward(ws.delta_prev.data.size(), ws.pre[l - 1].data.data(),
                    ws.delta_prev.data.data());
    std::swap(ws.delta, ws.delta_prev);
  }
  return loss;
}

double evaluate_loss(const Mlp& mlp, const Matrix& x, const Matrix& y) {
  return mse_loss(forward(mlp, x, false), y);
}

}  // namespace

double loss_and_gradients(const Mlp& mlp, const Matrix& input, const Matrix& target,
                          Gradients& grads) {
  Workspace ws;
  return loss_and_gradients_ws(mlp, input, target, grads, ws);
}

TrainResult train(Mlp mlp, const Matrix& x_train, const Matrix& y_train, const Matrix& x_val,
                  const Matrix& y_val, const TrainConfig& config) {
  if (x_train.rows == 0 || x_train.rows != y_train.rows || x_val.rows != y_val.rows) {
    throw UsageError("training inputs and targets must be non-empty and aligned");
  }
  if (!(config.learning_rate > 0.0)) throw UsageError("learning rate must be positive");
  if (config.batch_size < 1 || static_cast<std::size_t>(config.batch_size) > x_train.rows) {
    throw UsageError("batch size must lie in [1, training-set size]");
  }
  if (config.max_epochs < 0) throw UsageError("max_epochs must be non-negative");

  const bool has_val = x_val.rows > 0;
  const auto& k = simd::active_kernels();
  TrainResult result;
  auto val_loss = [&](const Mlp& m) {
    return has_val ? evaluate_loss(m, x_val, y_val) : evaluate_loss(m, x_train, y_train);
  };

  const double initial_val = val_loss(mlp);
  result.log.push_back({0, evaluate_loss(mlp, x_train, y_train), initial_val});
  result.best = mlp;
  result.best_epoch = 0;
  result.best_val_loss = initial_val;

  Gradients grads = zero_gradients(mlp);
  Gradients m1 = zero_gradients(mlp);
  Gradients m2 = zero_gradients(mlp);
  std::vector<std::size_t> order(x_train.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(config.seed);
  Workspace ws;
  long step = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t count =
          std::min(static_cast<std::size_t>(config.batch_size), order.size() - start);
      const std::span<const std::size_t> idx(order.data() + start, count);
      const Matrix xb = gather_rows(x_train, idx);
      const Matrix yb = gather_rows(y_train, idx);
      const double loss = loss_and_gradients_ws(mlp, xb, yb, grads, ws);
      if (!std::isfinite(loss)) throw TrainingError(epoch, "non-finite training loss");
      loss_sum += loss * static_cast<double>(count);

      ++step;
      if (config.optimizer == Optimizer::Adam) {
        simd::AdamCoeffs c{config.learning_rate,
                           config.beta1,
                           config.beta2,
                           config.eps,
                           1.0 - std::pow(config.beta1, static_cast<double>(step)),
                           1.0 - std::pow(config.beta2, static_cast<double>(step))};
        for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
          auto& layer = mlp.layers[l];
          k.adam(layer.weight.size(), layer.weight.data(), grads.weight[l].data(),
                 m1.weight[l].data(), m2.weight[l].data(), c);
          k.adam(layer.bias.size(), layer.bias.data(), grads.bias[l].data(), m1.bias[l].data(),
                 m2.bias[l].data(), c);
        }
      } else {
        for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
          auto& layer = mlp.layers[l];
          for (std::size_t i = 0; i < layer.weight.size(); ++i) {
            layer.weight[i] -= config.learning_rate * grads.weight[l][i];
          }
          for (std::size_t i = 0; i < layer.bias.size(); ++i) {
            layer.bias[i] -= config.learning_rate * grads.bias[l][i];
          }
        }
      }
    }
    const double vl = val_loss(mlp);
    if (!std::isfinite(vl)) throw TrainingError(epoch, "non-finite validation loss");
    result.log.push_back({epoch, loss_sum / static_cast<double>(order.size()), vl});
    if (vl < result.best_val_loss) {
      result.best_val_loss = vl;
      result.best_epoch = epoch;
      result.best = mlp;
    }
  }
  return result;
}

}  // namespace instobj
