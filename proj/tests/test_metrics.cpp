#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "zsl/error.hpp"
#include "zsl/metrics.hpp"
#include "zsl/oracle.hpp"
#include "zsl/trainer.hpp"

using namespace zsl;

namespace {

// Images "i0".."i{n-1}" in the given order; `positive[k]` marks whether the
// k-th retrieved image belongs to class "c".
std::pair<ClassRanking, std::map<ImageId, ClassId>> ranking_of(const std::vector<bool>& positive) {
  ClassRanking r{"c", {}};
  std::map<ImageId, ClassId> truths;
  for (std::size_t k = 0; k < positive.size(); ++k) {
    const std::string id = "i" + std::to_string(k);
    r.ranking.emplace_back(id, static_cast<double>(positive.size() - k));
    truths[id] = positive[k] ? "c" : "other";
  }
  return {r, truths};
}

// Trapezoid over positive ranks r_1 < ... < r_P with precision k / r_k and
// the curve starting flat at the first positive's precision.
double oracle_auc(const std::vector<bool>& positive) {
  std::vector<double> precision;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < positive.size(); ++k)
    if (positive[k]) precision.push_back(static_cast<double>(++tp) / static_cast<double>(k + 1));
  double area = 0.0;
  for (std::size_t k = 0; k < precision.size(); ++k) {
    const double before = k == 0 ? precision[0] : precision[k - 1];
    area += 0.5 * (before + precision[k]) / static_cast<double>(precision.size());
  }
  return area;
}

}  // namespace

TEST_CASE("per-class top-1") {
  const std::vector<Prediction> preds = {{"x1", "A", "A"}, {"x2", "B", "A"}, {"x3", "B", "B"}};
  CHECK(top1_per_class(preds) == 75.0);
  auto shuffled = preds;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(top1_per_class(shuffled) == 75.0);
  CHECK_THROWS_AS(top1_per_class({}), UsageError);
}

TEST_CASE("recall at k") {
  const std::vector<RankedPrediction> ranked = {
      {"x1", {{"b", 3}, {"a", 2}, {"c", 1}}},
      {"x2", {{"a", 3}, {"b", 2}, {"c", 1}}},
      {"x3", {{"a", 3}, {"c", 2}, {"b", 1}}},
  };
  const std::map<ImageId, ClassId> truths = {{"x1", "a"}, {"x2", "a"}, {"x3", "b"}};
  CHECK(recall_at_k(ranked, truths, 1) == 25.0);
  CHECK(recall_at_k(ranked, truths, 1, RecallAveraging::PerImage) == doctest::Approx(100.0 / 3.0));
  CHECK(recall_at_k(ranked, truths, 2) == 50.0);
  CHECK(recall_at_k(ranked, truths, 3) == 100.0);
  CHECK(recall_at_k(ranked, truths, 10) == 100.0);
  CHECK_THROWS_AS(recall_at_k(ranked, truths, 0), UsageError);
  CHECK_THROWS_AS(recall_at_k(ranked, {{"x1", "a"}}, 1), DataError);

  // Recall never decreases with k.
  double prev = 0.0;
  for (std::size_t k = 1; k <= 4; ++k) {
    const double r = recall_at_k(ranked, truths, k);
    CHECK(r >= prev);
    prev = r;
  }
}

TEST_CASE("label recall at k") {
  const std::map<ImageId, ClassId> truths = {{"x1", "a"}, {"x2", "b"}, {"x3", "b"}};
  const std::vector<ClassRanking> rankings = {
      {"a", {{"x2", 3}, {"x1", 2}, {"x3", 1}}},
      {"b", {{"x2", 3}, {"x1", 2}, {"x3", 1}}},
  };
  CHECK(label_recall_at_k(rankings, truths, 1) == 50.0);
  CHECK(label_recall_at_k(rankings, truths, 2) == 100.0);
}

TEST_CASE("precision-recall area") {
  SUBCASE("single positive ranked last") {
    const auto [r, truths] = ranking_of({false, false, false, true});
    CHECK(pr_auc(r, truths) == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("perfect ranking") {
    const auto [r, truths] = ranking_of({true, true, true, false, false});
    CHECK(pr_auc(r, truths) == 1.0);
  }
  SUBCASE("no positives") {
    const auto [r, truths] = ranking_of({false, false});
    CHECK_THROWS_AS(pr_auc(r, truths), DataError);
  }
  SUBCASE("matches the oracle on random rankings") {
    std::mt19937_64 rng(17);
    std::bernoulli_distribution coin(0.3);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<bool> pos(1 + trial % 25);
      for (auto&& p : pos) p = coin(rng);
      pos[static_cast<std::size_t>(trial) % pos.size()] = true;
      const auto [r, truths] = ranking_of(pos);
      const double auc = pr_auc(r, truths);
      CHECK(std::abs(auc - oracle_auc(pos)) <= 1e-12);
      CHECK(auc > 0.0);
      CHECK(auc <= 1.0);
    }
  }
}

TEST_CASE("promoting a positive never lowers the area") {
  std::mt19937_64 rng(19);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<bool> pos(12);
    for (auto&& p : pos) p = coin(rng);
    pos[11] = true;
    const auto [r, truths] = ranking_of(pos);
    const double before = pr_auc(r, truths);
    for (std::size_t k = 1; k < pos.size(); ++k)
      if (pos[k] && !pos[k - 1]) {
        auto swapped = pos;
        std::swap(swapped[k], swapped[k - 1]);
        const auto [r2, t2] = ranking_of(swapped);
        CHECK(pr_auc(r2, t2) >= before - 1e-15);
      }
  }
}

TEST_CASE("random scorer area tracks prevalence") {
  std::mt19937_64 rng(23);
  std::vector<bool> pos(400, false);
  std::fill(pos.begin(), pos.begin() + 100, true);
  double sum = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::shuffle(pos.begin(), pos.end(), rng);
    const auto [r, truths] = ranking_of(pos);
    sum += pr_auc(r, truths);
  }
  CHECK(std::abs(sum / 200.0 - 0.25) <= 0.05);
}

TEST_CASE("mean area") {
  const auto [r, truths] = ranking_of({true, false});
  CHECK(mean_auc({r}, truths) == 1.0);
  CHECK_THROWS_AS(mean_auc({}, truths), UsageError);
}

TEST_CASE("first-part and all-part evaluation agree on single-part images") {
  oracle::SynthSpec spec;
  spec.parts_per_image = 1;
  spec.images_per_class = 8;
  const auto data = oracle::generate(spec);
  std::mt19937_64 rng(3);
  const ModelParams m = init_params(ModelDims{data.dataset.visual_dim(), 16, data.dataset.modality_dims()}, 4);
  EvalOptions first, all;
  first.part_mode = PartMode::FirstPart;
  all.part_mode = PartMode::AllParts;
  CHECK(evaluate(data.dataset, m, first) == evaluate(data.dataset, m, all));
}

TEST_CASE("reference parameters score perfectly on noiseless data") {
  oracle::SynthSpec spec;
  spec.noise_sigma = 0.0;
  const auto data = oracle::generate(spec);
  const MetricReport r = evaluate(data.dataset, oracle::reference_params(data.truth));
  CHECK(r.top1_per_class == 100.0);
  CHECK(r.recall_at.at(1) == 100.0);
  CHECK(r.mauc == 1.0);
  CHECK(r.images == 5 * spec.images_per_class);
  CHECK(r.classes == 5);

  EvalOptions by_label;
  by_label.retrieval = RetrievalDirection::ImagesPerLabel;
  CHECK(evaluate(data.dataset, oracle::reference_params(data.truth), by_label).recall_at.at(1) == 100.0);
}

TEST_CASE("untrained parameters sit near chance") {
  const auto data = oracle::generate(oracle::SynthSpec{});
  const Dataset& d = data.dataset;
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ModelParams m = init_params(ModelDims{d.visual_dim(), 64, d.modality_dims()}, seed);
    sum += top1_on(d, m, d.split.test_classes);
  }
  const double chance = 100.0 / static_cast<double>(d.split.test_classes.size());
  CHECK(std::abs(sum / 20.0 - chance) <= 10.0);
}

TEST_CASE("evaluation needs classes and images") {
  const Dataset d = fixtures::toy_dataset();
  std::mt19937_64 rng(1);
  const ModelParams m = fixtures::random_params(rng, 2, 2, {{"attr", 2}});
  CHECK_THROWS_AS(evaluate_on(d, m, {}), UsageError);
  CHECK_THROWS_AS(evaluate_on(d, m, {"nope"}), DataError);
  CHECK(evaluate_on(d, m, {"a", "b", "c"}).images == 6);
}
