#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "zsl/embedder.hpp"
#include "zsl/error.hpp"
#include "zsl/oracle.hpp"

using namespace zsl;
using fixtures::vec;

namespace {

ModelParams identity_params(const std::vector<std::string>& modalities, Eigen::Index dim) {
  ModelParams m;
  for (const auto& mod : modalities) m.lang_proj[mod] = Matrix::Identity(dim, dim);
  m.lang_bias = Vector::Zero(dim);
  m.vis_proj = Matrix::Identity(dim, dim);
  m.vis_bias = Vector::Zero(dim);
  return m;
}

// Scalar-loop ReLU(sum_m W_m l_m + b).
Vector scalar_language(const LanguagePart& p, const ModelParams& m) {
  Vector out(m.lang_bias.size());
  for (Eigen::Index r = 0; r < out.size(); ++r) {
    double s = m.lang_bias(r);
    for (const auto& [mod, tok] : p.tokens)
      for (Eigen::Index c = 0; c < tok.size(); ++c) s += m.lang_proj.at(mod)(r, c) * tok(c);
    out(r) = s > 0.0 ? s : 0.0;
  }
  return out;
}

}  // namespace

TEST_CASE("language part embedding") {
  SUBCASE("zero projections give the zero vector") {
    ModelParams m = identity_params({"a"}, 2);
    m.lang_proj["a"].setZero();
    LanguagePart p;
    p.tokens["a"] = vec({3, -4});
    CHECK(embed_language_part(p, m) == Vector::Zero(2));
  }
  SUBCASE("ReLU clamps negatives") {
    const ModelParams m = identity_params({"a"}, 2);
    LanguagePart p;
    p.tokens["a"] = vec({-1, 2});
    CHECK(embed_language_part(p, m) == vec({0, 2}));
  }
  SUBCASE("modalities are summed before the ReLU") {
    ModelParams m = identity_params({"a", "b"}, 2);
    m.lang_bias = vec({0.5, 0.5});
    LanguagePart p;
    p.tokens["a"] = vec({1, -3});
    p.tokens["b"] = vec({-2, 5});
    const Vector expected = scalar_language(p, m);
    CHECK(expected == vec({0, 2.5}));
    CHECK(embed_language_part(p, m) == expected);
  }
  SUBCASE("unknown modality is a configuration error") {
    const ModelParams m = identity_params({"a"}, 2);
    LanguagePart p;
    p.tokens["nope"] = vec({1, 1});
    CHECK_THROWS_AS(embed_language_part(p, m), ConfigError);
  }
}

TEST_CASE("visual part embedding") {
  SUBCASE("zero projection returns the bias") {
    ModelParams m = identity_params({}, 2);
    m.vis_proj.setZero();
    m.vis_bias = vec({4, -1});
    CHECK(embed_visual_part(vec({9, 9}), m) == vec({4, -1}));
  }
  SUBCASE("identity leaves features unchanged") {
    const ModelParams m = identity_params({}, 3);
    CHECK(embed_visual_part(vec({1, -2, 3}), m) == vec({1, -2, 3}));
  }
  SUBCASE("hand example") {
    ModelParams m = identity_params({}, 2);
    m.vis_proj << 1, 1, 0, -1;
    m.vis_bias = vec({1, 0});
    CHECK(embed_visual_part(vec({2, 3}), m) == vec({6, -3}));
  }
  SUBCASE("dimension mismatch is a data error") {
    const ModelParams m = identity_params({}, 2);
    CHECK_THROWS_AS(embed_visual_part(vec({1, 2, 3}), m), DataError);
  }
}

TEST_CASE("compatibility examples") {
  CHECK(compatibility(std::vector<Vector>{vec({1, 2})}, std::vector<Vector>{vec({0, 0}), vec({0, 0})}) == 0.0);
  CHECK(compatibility(std::vector<Vector>{vec({1, 0})}, std::vector<Vector>{vec({1, 0})}) == 1.0);
  const std::vector<Vector> x = {vec({1, -1}), vec({0, 2})};
  const std::vector<Vector> y = {vec({1, 1}), vec({2, 0})};
  CHECK(oracle::naive_compatibility(x, y) == 1.0);
  CHECK(compatibility(x, y) == 1.0);
  CHECK_THROWS_AS(compatibility(std::vector<Vector>{}, y), DataError);
  CHECK_THROWS_AS(compatibility(x, std::vector<Vector>{vec({1, 2, 3})}), DataError);
}

TEST_CASE("compatibility properties on random inputs") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> count(1, 5);
  std::uniform_real_distribution<double> positive(0.1, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index e = count(rng) + 1;
    std::vector<Vector> x, y;
    for (int i = count(rng); i > 0; --i) x.push_back(fixtures::random_vector(rng, e));
    for (int j = count(rng); j > 0; --j) y.push_back(fixtures::random_vector(rng, e).cwiseMax(0.0));
    const double f = compatibility(x, y);
    CHECK(f >= 0.0);
    CHECK(std::abs(f - oracle::naive_compatibility(x, y)) <= 1e-10);

    auto xs = x, ys = y;
    std::shuffle(xs.begin(), xs.end(), rng);
    std::shuffle(ys.begin(), ys.end(), rng);
    CHECK(compatibility(xs, ys) == doctest::Approx(f).epsilon(1e-12));

    const double lambda = positive(rng);
    for (auto& v : xs) v *= lambda;
    CHECK(compatibility(xs, ys) == doctest::Approx(lambda * f).epsilon(1e-12));
  }
}

TEST_CASE("language embeddings are non-negative") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const ModelParams m = fixtures::random_params(rng, 6, 3, {{"a", 4}, {"b", 2}});
    LanguagePart p;
    p.tokens["a"] = fixtures::random_vector(rng, 4);
    p.tokens["b"] = fixtures::random_vector(rng, 2);
    const Vector s = embed_language_part(p, m);
    CHECK(s.minCoeff() >= 0.0);
    CHECK((s - scalar_language(p, m)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("prediction and ranking") {
  Dataset d = fixtures::toy_dataset();
  ModelParams m = identity_params({"attr"}, 2);
  const auto& img = d.images[0].image;

  SUBCASE("singleton candidate") { CHECK(predict(img, {"b"}, d, m) == "b"); }
  SUBCASE("higher score wins") {
    d.classes["a"].parts[0].tokens["attr"] = vec({0, 0});
    d.classes["b"].parts[0].tokens["attr"] = vec({1, 0});
    // image part 0 is (1, -1), part 1 is (0, 1): F(b) = (1 + 0) / 2, F(a) = 0
    CHECK(oracle::naive_compatibility(img, d.classes["b"], m) == 0.5);
    CHECK(oracle::naive_compatibility(img, d.classes["a"], m) == 0.0);
    CHECK(predict(img, {"a", "b"}, d, m) == "b");
  }
  SUBCASE("ties go to the smaller class id") {
    d.classes["c"].parts = d.classes["b"].parts;
    CHECK(predict(img, {"c", "b"}, d, m) == "b");
  }
  SUBCASE("empty candidate set is a usage error") {
    CHECK_THROWS_AS(predict(img, {}, d, m), UsageError);
  }
  SUBCASE("ranking is sorted with deterministic ties") {
    d.classes["c"].parts = d.classes["a"].parts;
    const ClassEmbeddings cache(d, m, {"a", "b", "c"});
    const auto ranked = rank_classes(embed_visual(img, m), cache, {"a", "b", "c"});
    REQUIRE(ranked.size() == 3);
    for (std::size_t i = 1; i < ranked.size(); ++i) {
      CHECK(ranked[i - 1].second >= ranked[i].second);
      if (ranked[i - 1].second == ranked[i].second) CHECK(ranked[i - 1].first < ranked[i].first);
    }
  }
}

TEST_CASE("predict is invariant under positive visual scaling") {
  std::mt19937_64 rng(9);
  const auto data = oracle::generate(oracle::SynthSpec{});
  const Dataset& d = data.dataset;
  ModelParams m = fixtures::random_params(rng, 6, static_cast<Eigen::Index>(d.visual_dim()),
                                          {{oracle::kSynthModality, static_cast<Eigen::Index>(d.modality_dims().at(oracle::kSynthModality))}});
  ModelParams scaled = m;
  scaled.vis_proj *= 3.5;
  scaled.vis_bias *= 3.5;
  for (std::size_t i = 0; i < d.images.size(); i += 17)
    CHECK(predict(d.images[i].image, d.split.test_classes, d, m) ==
          predict(d.images[i].image, d.split.test_classes, d, scaled));
}
