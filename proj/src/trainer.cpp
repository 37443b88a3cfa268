#include "zsl/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "zsl/error.hpp"
#include "zsl/metrics.hpp"

namespace zsl {

ModelParams init_params(const ModelDims& dims, std::uint64_t seed) {
  if (dims.visual_dim == 0 || dims.embed_dim == 0) throw ConfigError("model dimensions must be positive");
  std::mt19937_64 rng(seed);
  auto fill = [&rng](Matrix& w) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = dist(rng);
  };
  const auto e = static_cast<Eigen::Index>(dims.embed_dim);
  ModelParams m;
  for (const auto& [mod, dim] : dims.modality_dims) {
    if (dim == 0) throw ConfigError("modality '" + mod + "' has zero dimension");
    Matrix w(e, static_cast<Eigen::Index>(dim));
    fill(w);
    m.lang_proj.emplace(mod, std::move(w));
  }
  m.lang_bias = Vector::Zero(e);
  m.vis_proj.resize(e, static_cast<Eigen::Index>(dims.visual_dim));
  fill(m.vis_proj);
  m.vis_bias = Vector::Zero(e);
  return m;
}

std::vector<Batch> epoch_batches(const std::vector<std::size_t>& images, std::size_t batch_size,
                                 std::uint64_t seed, std::size_t epoch) {
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  std::vector<std::size_t> order = images;
  std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ull * (epoch + 1)));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const auto end = std::min(order.size(), start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

void momentum_step(ModelParams& params, ModelParams& velocity, const ParamGradients& grad, double momentum,
                   double learning_rate) {
  for (auto& [mod, v] : velocity.lang_proj) {
    v = momentum * v - learning_rate * grad.lang_proj.at(mod);
    params.lang_proj.at(mod) += v;
  }
  velocity.lang_bias = momentum * velocity.lang_bias - learning_rate * grad.lang_bias;
  params.lang_bias += velocity.lang_bias;
  velocity.vis_proj = momentum * velocity.vis_proj - learning_rate * grad.vis_proj;
  params.vis_proj += velocity.vis_proj;
  velocity.vis_bias = momentum * velocity.vis_bias - learning_rate * grad.vis_bias;
  params.vis_bias += velocity.vis_bias;
}

namespace {

void check_config(const TrainConfig& cfg) {
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (cfg.epochs == 0) throw ConfigError("epochs must be at least 1");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate))
    throw ConfigError("learning_rate must be finite and non-negative");
  if (cfg.embed_dim == 0) throw ConfigError("embed_dim must be positive");
  if (!(cfg.loss.margin_delta > 0.0)) throw ConfigError("margin_delta must be positive");
  if (!(cfg.loss.reg_alpha >= 0.0)) throw ConfigError("reg_alpha must be non-negative");
  if (!(cfg.loss.rank_beta >= 0.0)) throw ConfigError("rank_beta must be non-negative");
}

}  // namespace

TrainReport train(const Dataset& d, const TrainConfig& cfg, const std::set<ClassId>& classes) {
  check_config(cfg);
  const auto violations = validate_dataset(d);
  if (!violations.empty())
    throw DataError("dataset is invalid: " + violations.front().entity + ": " + violations.front().message);
  const auto images = d.images_of(classes);
  if (images.empty()) throw DataError("no training images");

  // Ranking against the full universe must see every training class.
  LossConfig loss = cfg.loss;
  Dataset scoped;
  const Dataset* data = &d;
  if (loss.full_universe_negatives && classes != d.split.train_classes) {
    scoped = d;
    scoped.split.train_classes = classes;
    data = &scoped;
  }

  const auto start = std::chrono::steady_clock::now();
  ModelDims dims{d.visual_dim(), cfg.embed_dim, d.modality_dims()};
  TrainReport report;
  report.params = init_params(dims, cfg.seed);
  ModelParams velocity = ModelParams::zeros_like(report.params);
  ParamGradients grad;

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_total = 0.0;
    for (const auto& batch : epoch_batches(images, cfg.batch_size, cfg.seed, epoch)) {
      const auto terms = objective_and_gradient(batch, *data, report.params, loss, grad);
      if (!std::isfinite(terms.total))
        throw TrainingError("non-finite objective at epoch " + std::to_string(epoch + 1) + ", step " +
                            std::to_string(step + 1));
      epoch_total += terms.total;
      momentum_step(report.params, velocity, grad, cfg.momentum, cfg.learning_rate);
      ++step;
    }
    if (!report.params.all_finite())
      throw TrainingError("non-finite parameters after epoch " + std::to_string(epoch + 1) + ", step " +
                          std::to_string(step));
    report.epoch_objective.push_back(epoch_total);
    if (!d.split.val_classes.empty() && !d.images_of(d.split.val_classes).empty())
      report.epoch_val_top1.push_back(top1_on(d, report.params, d.split.val_classes));
  }
  if (!cfg.deterministic)
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

TrainReport train(const Dataset& d, const TrainConfig& cfg) { return train(d, cfg, d.split.train_classes); }

GridResult validate_grid(const Dataset& d, const Grid& grid, const TrainConfig& base) {
  if (grid.margin_delta.empty() || grid.learning_rate.empty() || grid.embed_dim.empty())
    throw ConfigError("validation grid is empty");
  if (d.split.val_classes.empty()) throw DataError("validation split is empty");
  GridResult result;
  bool have_best = false;
  double best_score = 0.0;
  for (double margin : grid.margin_delta)
    for (double lr : grid.learning_rate)
      for (std::size_t dim : grid.embed_dim) {
        TrainConfig cfg = base;
        cfg.loss.margin_delta = margin;
        cfg.learning_rate = lr;
        cfg.embed_dim = dim;
        const TrainReport report = train(d, cfg);
        const double score = top1_on(d, report.params, d.split.val_classes);
        result.points.push_back({cfg, score});
        if (!have_best || score > best_score) {
          have_best = true;
          best_score = score;
          result.best = cfg;
        }
      }
  return result;
}

}  // namespace zsl
