#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "zsl/core.hpp"
#include "zsl/objective.hpp"

namespace zsl {

struct TrainConfig {
  std::size_t batch_size = 100;
  double momentum = 0.9;
  std::size_t epochs = 20;
  double learning_rate = 1e-5;
  std::size_t embed_dim = 64;
  LossConfig loss;
  std::uint64_t seed = 1;
  // Zeroes the wall-clock field so reports compare bit-for-bit.
  bool deterministic = true;
};

struct TrainReport {
  std::vector<double> epoch_objective;  // sum of minibatch objectives per epoch
  std::vector<double> epoch_val_top1;   // empty when the split has no val classes
  double wall_clock_seconds = 0.0;
  ModelParams params;

  bool operator==(const TrainReport&) const = default;
};

// Projections uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
ModelParams init_params(const ModelDims& dims, std::uint64_t seed);

// Seed-deterministic partition of `images` into consecutive minibatches of
// at most batch_size entries.
std::vector<Batch> epoch_batches(const std::vector<std::size_t>& images, std::size_t batch_size,
                                 std::uint64_t seed, std::size_t epoch);

// One momentum update: velocity <- mu * velocity - lr * grad; params += velocity.
void momentum_step(ModelParams& params, ModelParams& velocity, const ParamGradients& grad, double momentum,
                   double learning_rate);

// Minibatch SGD with momentum over the images of `classes`.
TrainReport train(const Dataset& d, const TrainConfig& cfg, const std::set<ClassId>& classes);
// Trains on the split's train classes.
TrainReport train(const Dataset& d, const TrainConfig& cfg);

struct Grid {
  std::vector<double> margin_delta = {0.1, 0.5, 1.0};
  std::vector<double> learning_rate = {1e-3, 1e-2, 1e-1};
  std::vector<std::size_t> embed_dim = {64, 128, 256};
};

struct GridPoint {
  TrainConfig config;
  double val_top1 = 0.0;
};

struct GridResult {
  TrainConfig best;
  std::vector<GridPoint> points;  // grid order: margin, then rate, then dimension
};

// Trains one model per grid point on the train classes and keeps the
// first point with the highest validation Top-1.
GridResult validate_grid(const Dataset& d, const Grid& grid, const TrainConfig& base);

}  // namespace zsl
