#include <doctest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "zsl/core.hpp"
#include "zsl/oracle.hpp"

using namespace zsl;
using fixtures::vec;

TEST_CASE("well-formed toy dataset has no violations") {
  CHECK(validate_dataset(fixtures::toy_dataset()).empty());
}

TEST_CASE("image of a class outside every partition is named") {
  Dataset d = fixtures::toy_dataset();
  d.classes["z"] = LanguagePartSet{"z", d.classes.at("a").parts};
  d.images[0].class_id = "z";
  const auto v = validate_dataset(d);
  REQUIRE(v.size() == 1);
  CHECK(v[0].entity.find(d.images[0].image.image_id) != std::string::npos);
}

TEST_CASE("visual dimension mismatch names both images") {
  auto data = oracle::generate(oracle::SynthSpec{});
  Dataset& d = data.dataset;
  const std::string first = d.images[0].image.image_id;
  const std::string bad = d.images[7].image.image_id;
  d.images[7].image.parts[1] = Vector::Zero(5);
  const auto v = validate_dataset(d);
  REQUIRE(v.size() == 1);
  CHECK(v[0].entity.find(bad) != std::string::npos);
  CHECK(v[0].entity.find(first) != std::string::npos);
}

TEST_CASE("each invariant breach is reported") {
  SUBCASE("empty partition") {
    Dataset d = fixtures::toy_dataset();
    d.split.val_classes.clear();
    d.images.erase(d.images.begin() + 2, d.images.begin() + 4);
    d.classes.erase("b");
    CHECK(validate_dataset(d).size() == 1);
  }
  SUBCASE("overlapping partitions") {
    Dataset d = fixtures::toy_dataset();
    d.split.test_classes.insert("a");
    const auto v = validate_dataset(d);
    CHECK(v.size() == 3);  // the overlap plus two images in two partitions
  }
  SUBCASE("image without parts") {
    Dataset d = fixtures::toy_dataset();
    d.images[1].image.parts.clear();
    CHECK(validate_dataset(d).size() == 1);
  }
  SUBCASE("non-finite feature") {
    Dataset d = fixtures::toy_dataset();
    d.images[1].image.parts[0](0) = std::numeric_limits<double>::quiet_NaN();
    CHECK(validate_dataset(d).size() == 1);
  }
  SUBCASE("class without language parts") {
    Dataset d = fixtures::toy_dataset();
    d.classes.erase("c");
    CHECK(validate_dataset(d).size() == 3);  // the split entry and both images
  }
  SUBCASE("empty language part set") {
    Dataset d = fixtures::toy_dataset();
    d.classes["b"].parts.clear();
    CHECK(validate_dataset(d).size() == 1);
  }
  SUBCASE("modality dimension drift") {
    Dataset d = fixtures::toy_dataset();
    d.classes["c"].parts[0].tokens["attr"] = vec({1, 2, 3});
    CHECK(validate_dataset(d).size() == 1);
  }
}

TEST_CASE("validate_dataset is pure") {
  Dataset d = fixtures::toy_dataset();
  d.images[3].image.parts[0] = vec({1});
  d.split.val_classes.insert("a");
  const auto first = validate_dataset(d);
  const auto second = validate_dataset(d);
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].entity == second[i].entity);
    CHECK(first[i].message == second[i].message);
  }
}

TEST_CASE("split bookkeeping") {
  const Dataset d = fixtures::toy_dataset();
  CHECK(d.split.partition_of("a") == "train");
  CHECK(d.split.partition_of("b") == "val");
  CHECK(d.split.partition_of("c") == "test");
  CHECK(d.split.partition_of("q").empty());
  CHECK(d.visual_dim() == 2);
  CHECK(d.modality_dims().at("attr") == 2);
  CHECK(d.images_of({"b"}) == std::vector<std::size_t>{2, 3});
}

TEST_CASE("restrict_parts keeps the leading parts") {
  const Dataset d = fixtures::toy_dataset();
  const Dataset r = restrict_parts(d, 1);
  for (std::size_t i = 0; i < d.images.size(); ++i) {
    REQUIRE(r.images[i].image.parts.size() == 1);
    CHECK(r.images[i].image.parts[0] == d.images[i].image.parts[0]);
  }
}

TEST_CASE("model parameter helpers") {
  std::mt19937_64 rng(3);
  const ModelParams m = fixtures::random_params(rng, 3, 4, {{"x", 2}, {"y", 5}});
  CHECK(m.embed_dim() == 3);
  CHECK(m.visual_dim() == 4);
  CHECK(m.size() == 3 * 2 + 3 * 5 + 3 + 3 * 4 + 3);
  double squares = m.vis_proj.squaredNorm();
  for (const auto& [mod, w] : m.lang_proj) squares += w.squaredNorm();
  CHECK(m.projection_squared_norm() == doctest::Approx(squares).epsilon(1e-14));
  const ModelParams z = ModelParams::zeros_like(m);
  CHECK(z.projection_squared_norm() == 0.0);
  CHECK(dims_of(z).modality_dims == dims_of(m).modality_dims);
  ModelParams bad = m;
  bad.vis_bias(0) = std::numeric_limits<double>::infinity();
  CHECK(m.all_finite());
  CHECK_FALSE(bad.all_finite());
}
