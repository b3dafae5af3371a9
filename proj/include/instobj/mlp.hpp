#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace instobj {

/// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Rows `indices` of `src`, in that order.
Matrix gather_rows(const Matrix& src, std::span<const std::size_t> indices);

struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weight;  // out x in, row-major
  std::vector<double> bias;    // out

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Fully connected network: ReLU on hidden layers, identity output.
struct Mlp {
  std::vector<int> sizes;
  std::vector<DenseLayer> layers;

  std::size_t parameter_count() const;
  friend bool operator==(const Mlp&, const Mlp&) = default;
};

/// 9 -> 600 -> 2000 -> 2000 -> 2000 -> 100.
std::vector<int> paper_layer_sizes();
/// 9 -> 64 -> 64 -> 100, for quick runs.
std::vector<int> small_layer_sizes();

/// He-normal weights (sd = sqrt(2 / fan_in)), zero biases. Throws ShapeError
/// for fewer than two sizes or a non-positive size.
Mlp init_mlp(std::span<const int> sizes, std::uint64_t seed);

/// Batched forward pass. With `clamp_output` the outputs are limited to
/// [0, 1] (inference); training uses the raw outputs.
Matrix forward(const Mlp& mlp, const Matrix& input, bool clamp_output = false);

/// Mean squared error over every element. Throws UsageError on shape mismatch.
double mse_loss(const Matrix& pred, const Matrix& target);

struct Gradients {
  std::vector<std::vector<double>> weight;
  std::vector<std::vector<double>> bias;
};

Gradients zero_gradients(const Mlp& mlp);

/// Forward + backpropagation of the MSE loss on one batch; fills `grads` and
/// returns the batch loss.
double loss_and_gradients(const Mlp& mlp, const Matrix& input, const Matrix& target,
                          Gradients& grads);

enum class Optimizer { Adam, Sgd };

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 2000;
  int max_epochs = 200;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct EpochLog {
  int epoch = 0;  // 0 = before the first update
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  Mlp best;  // parameters at the epoch with the lowest validation loss
  int best_epoch = 0;
  double best_val_loss = 0.0;
  std::vector<EpochLog> log;
};

/// Minibatch training with per-epoch shuffling from a stream seeded by
/// config.seed. Throws TrainingError on a non-finite loss and UsageError on
/// inconsistent inputs.
TrainResult train(Mlp mlp, const Matrix& x_train, const Matrix& y_train, const Matrix& x_val,
                  const Matrix& y_val, const TrainConfig& config);

}  // namespace instobj
