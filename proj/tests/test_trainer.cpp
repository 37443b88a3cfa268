#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "zsl/error.hpp"
#include "zsl/metrics.hpp"
#include "zsl/oracle.hpp"
#include "zsl/trainer.hpp"

using namespace zsl;

namespace {

oracle::SynthData small_synth() {
  oracle::SynthSpec spec;
  spec.n_train_classes = 6;
  spec.n_val_classes = 3;
  spec.n_test_classes = 3;
  spec.images_per_class = 6;
  spec.visual_dim = 12;
  spec.token_dim = 8;
  return oracle::generate(spec);
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 10;
  cfg.embed_dim = 8;
  return cfg;
}

}  // namespace

TEST_CASE("initialization") {
  const ModelDims dims{4, 6, {{"a", 4}, {"b", 9}}};
  const ModelParams m = init_params(dims, 5);
  CHECK(m == init_params(dims, 5));
  for (std::uint64_t seed = 0; seed < 100; ++seed) CHECK_FALSE(init_params(dims, seed) == init_params(dims, seed + 100));
  CHECK(m.vis_proj.rows() == 6);
  CHECK(m.vis_proj.cols() == 4);
  CHECK(m.vis_proj.cwiseAbs().maxCoeff() <= 0.5);
  CHECK(m.lang_proj.at("a").cwiseAbs().maxCoeff() <= 0.5);
  CHECK(m.lang_proj.at("b").cwiseAbs().maxCoeff() <= 1.0 / 3.0);
  CHECK(m.vis_bias == Vector::Zero(6));
  CHECK(m.lang_bias == Vector::Zero(6));
  CHECK_THROWS_AS(init_params(ModelDims{0, 6, {}}, 1), ConfigError);
  CHECK_THROWS_AS(init_params(ModelDims{3, 6, {{"a", 0}}}, 1), ConfigError);
}

TEST_CASE("initial projections fill their range") {
  const ModelParams m = init_params(ModelDims{4, 256, {}}, 1);
  CHECK(m.vis_proj.maxCoeff() > 0.45);
  CHECK(m.vis_proj.minCoeff() < -0.45);
  CHECK(std::abs(m.vis_proj.mean()) < 0.05);
}

TEST_CASE("epoch batches partition the images") {
  std::vector<std::size_t> images(237);
  for (std::size_t i = 0; i < images.size(); ++i) images[i] = 3 * i + 1;
  const auto batches = epoch_batches(images, 100, 9, 0);
  REQUIRE(batches.size() == 3);
  CHECK(batches[0].size() == 100);
  CHECK(batches[1].size() == 100);
  CHECK(batches[2].size() == 37);
  std::vector<std::size_t> all;
  for (const auto& b : batches) all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  CHECK(all == images);
  CHECK(epoch_batches(images, 100, 9, 0) == batches);
  CHECK_FALSE(epoch_batches(images, 100, 9, 1) == batches);
  CHECK_THROWS_AS(epoch_batches(images, 0, 9, 0), ConfigError);
}

TEST_CASE("momentum step") {
  std::mt19937_64 rng(12);
  const ModelParams start = fixtures::random_params(rng, 3, 4, {{"a", 2}});
  ParamGradients g = ParamGradients::zeros_like(start);
  g.vis_proj = fixtures::random_matrix(rng, 3, 4);
  g.vis_bias = fixtures::random_vector(rng, 3);
  g.lang_proj["a"] = fixtures::random_matrix(rng, 3, 2);
  g.lang_bias = fixtures::random_vector(rng, 3);

  SUBCASE("zero momentum is plain gradient descent") {
    ModelParams p = start, vel = ModelParams::zeros_like(start);
    momentum_step(p, vel, g, 0.0, 0.1);
    momentum_step(p, vel, g, 0.0, 0.1);
    CHECK((p.vis_proj - (start.vis_proj - 0.2 * g.vis_proj)).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((p.lang_proj.at("a") - (start.lang_proj.at("a") - 0.2 * g.lang_proj.at("a"))).cwiseAbs().maxCoeff() <=
          1e-14);
  }
  SUBCASE("heavy ball recursion") {
    ModelParams p = start, vel = ModelParams::zeros_like(start);
    momentum_step(p, vel, g, 0.9, 0.1);
    momentum_step(p, vel, g, 0.9, 0.1);
    // v1 = -0.1 g, v2 = 0.9 v1 - 0.1 g, theta2 = theta0 + v1 + v2 = theta0 - 0.29 g
    CHECK((p.vis_bias - (start.vis_bias - 0.29 * g.vis_bias)).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((p.lang_bias - (start.lang_bias - 0.29 * g.lang_bias)).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("zero learning rate leaves parameters unchanged") {
    ModelParams p = start, vel = ModelParams::zeros_like(start);
    momentum_step(p, vel, g, 0.9, 0.0);
    CHECK(p == start);
  }
}

TEST_CASE("training with zero learning rate returns the initialization") {
  const auto data = small_synth();
  TrainConfig cfg = small_config();
  cfg.learning_rate = 0.0;
  const TrainReport r = train(data.dataset, cfg);
  CHECK(r.params == init_params(ModelDims{data.dataset.visual_dim(), 8, data.dataset.modality_dims()}, cfg.seed));
  REQUIRE(r.epoch_objective.size() == 3);
  CHECK(r.epoch_val_top1.size() == 3);
  CHECK(r.wall_clock_seconds == 0.0);
}

TEST_CASE("training is deterministic") {
  const auto data = small_synth();
  const TrainConfig cfg = small_config();
  const TrainReport a = train(data.dataset, cfg);
  const TrainReport b = train(data.dataset, cfg);
  CHECK(a == b);
  TrainConfig other = cfg;
  other.seed = 2;
  CHECK_FALSE(train(data.dataset, other).params == a.params);
}

TEST_CASE("training lowers the objective at a small rate") {
  const auto data = small_synth();
  TrainConfig cfg = small_config();
  cfg.learning_rate = 1e-3;
  cfg.epochs = 10;
  const TrainReport r = train(data.dataset, cfg);
  CHECK(r.epoch_objective.back() < r.epoch_objective.front());
}

TEST_CASE("divergence raises a training error") {
  const auto data = small_synth();
  TrainConfig cfg = small_config();
  cfg.learning_rate = 1e200;
  CHECK_THROWS_AS(train(data.dataset, cfg), TrainingError);
}

TEST_CASE("invalid configurations are rejected") {
  const auto data = small_synth();
  TrainConfig cfg = small_config();
  SUBCASE("momentum") { cfg.momentum = 1.0; }
  SUBCASE("epochs") { cfg.epochs = 0; }
  SUBCASE("rate") { cfg.learning_rate = -1.0; }
  SUBCASE("margin") { cfg.loss.margin_delta = 0.0; }
  CHECK_THROWS_AS(train(data.dataset, cfg), ConfigError);
}

TEST_CASE("invalid datasets are rejected") {
  auto data = small_synth();
  data.dataset.images[0].image.parts.clear();
  CHECK_THROWS_AS(train(data.dataset, small_config()), DataError);
}

TEST_CASE("grid validation") {
  const auto data = small_synth();
  const TrainConfig base = small_config();

  SUBCASE("singleton grid") {
    Grid g{{0.5}, {1e-3}, {8}};
    const GridResult r = validate_grid(data.dataset, g, base);
    REQUIRE(r.points.size() == 1);
    CHECK(r.best.learning_rate == 1e-3);
    TrainConfig expected = base;
    expected.learning_rate = 1e-3;
    expected.loss.margin_delta = 0.5;
    CHECK(r.points[0].val_top1 ==
          top1_on(data.dataset, train(data.dataset, expected).params, data.dataset.split.val_classes));
  }
  SUBCASE("grid order and best point") {
    Grid g{{0.1, 1.0}, {0.0, 1e-3}, {4, 8}};
    const GridResult r = validate_grid(data.dataset, g, base);
    REQUIRE(r.points.size() == 8);
    CHECK(r.points[0].config.loss.margin_delta == 0.1);
    CHECK(r.points[1].config.embed_dim == 8);
    CHECK(r.points[2].config.learning_rate == 1e-3);
    CHECK(r.points[4].config.loss.margin_delta == 1.0);
    double best = -1.0;
    std::size_t first = 0;
    for (std::size_t i = 0; i < r.points.size(); ++i)
      if (r.points[i].val_top1 > best) best = r.points[i].val_top1, first = i;
    const auto& chosen = r.points[first].config;
    CHECK(r.best.learning_rate == chosen.learning_rate);
    CHECK(r.best.embed_dim == chosen.embed_dim);
    CHECK(r.best.loss.margin_delta == chosen.loss.margin_delta);
  }
  SUBCASE("ties keep the first point") {
    Grid g{{0.1, 0.5}, {0.0}, {8}};
    const GridResult r = validate_grid(data.dataset, g, base);
    REQUIRE(r.points.size() == 2);
    CHECK(r.points[0].val_top1 == r.points[1].val_top1);
    CHECK(r.best.loss.margin_delta == 0.1);
  }
  SUBCASE("empty grid") {
    Grid g{{}, {1e-3}, {8}};
    CHECK_THROWS_AS(validate_grid(data.dataset, g, base), ConfigError);
  }
}
