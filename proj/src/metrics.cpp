#include "zsl/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "zsl/embedder.hpp"
#include "zsl/error.hpp"

namespace zsl {

namespace {

// Mean of per-class hit rates, in percent.
double per_class_rate(const std::map<ClassId, std::pair<std::size_t, std::size_t>>& hits_totals) {
  double sum = 0.0;
  for (const auto& [c, ht] : hits_totals) sum += static_cast<double>(ht.first) / static_cast<double>(ht.second);
  return 100.0 * sum / static_cast<double>(hits_totals.size());
}

}  // namespace

double top1_per_class(const std::vector<Prediction>& preds) {
  if (preds.empty()) throw UsageError("top-1 accuracy of an empty prediction list");
  std::map<ClassId, std::pair<std::size_t, std::size_t>> per_class;
  for (const auto& p : preds) {
    auto& [hits, total] = per_class[p.truth];
    hits += p.predicted == p.truth ? 1 : 0;
    ++total;
  }
  return per_class_rate(per_class);
}

double recall_at_k(const std::vector<RankedPrediction>& ranked, const std::map<ImageId, ClassId>& truths,
                   std::size_t k, RecallAveraging averaging) {
  if (k == 0) throw UsageError("recall@k needs k >= 1");
  if (ranked.empty()) throw UsageError("recall@k of an empty prediction list");
  std::map<ClassId, std::pair<std::size_t, std::size_t>> per_class;
  std::size_t hits_all = 0;
  for (const auto& r : ranked) {
    auto t = truths.find(r.image_id);
    if (t == truths.end()) throw DataError("image '" + r.image_id + "' has no ground-truth class");
    const std::size_t depth = std::min(k, r.ranking.size());
    const bool hit = std::any_of(r.ranking.begin(), r.ranking.begin() + static_cast<std::ptrdiff_t>(depth),
                                 [&](const auto& e) { return e.first == t->second; });
    auto& [hits, total] = per_class[t->second];
    hits += hit ? 1 : 0;
    ++total;
    hits_all += hit ? 1 : 0;
  }
  if (averaging == RecallAveraging::PerImage)
    return 100.0 * static_cast<double>(hits_all) / static_cast<double>(ranked.size());
  return per_class_rate(per_class);
}

double label_recall_at_k(const std::vector<ClassRanking>& rankings, const std::map<ImageId, ClassId>& truths,
                         std::size_t k) {
  if (k == 0) throw UsageError("recall@k needs k >= 1");
  if (rankings.empty()) throw UsageError("recall@k of an empty ranking list");
  std::size_t hits = 0;
  for (const auto& r : rankings) {
    const std::size_t depth = std::min(k, r.ranking.size());
    for (std::size_t i = 0; i < depth; ++i) {
      auto t = truths.find(r.ranking[i].first);
      if (t == truths.end()) throw DataError("image '" + r.ranking[i].first + "' has no ground-truth class");
      if (t->second == r.class_id) {
        ++hits;
        break;
      }
    }
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(rankings.size());
}

double pr_auc(const ClassRanking& r, const std::map<ImageId, ClassId>& truths) {
  std::size_t positives = 0;
  for (const auto& [img, score] : r.ranking) {
    auto t = truths.find(img);
    if (t == truths.end()) throw DataError("image '" + img + "' has no ground-truth class");
    positives += t->second == r.class_id ? 1 : 0;
  }
  if (positives == 0) throw DataError("class '" + r.class_id + "' has no positive images");

  const double n_pos = static_cast<double>(positives);
  double area = 0.0;
  double prev_recall = 0.0;
  double prev_precision = -1.0;
  std::size_t tp = 0;
  for (std::size_t cut = 1; cut <= r.ranking.size(); ++cut) {
    if (truths.at(r.ranking[cut - 1].first) != r.class_id) continue;
    ++tp;
    const double recall = static_cast<double>(tp) / n_pos;
    const double precision = static_cast<double>(tp) / static_cast<double>(cut);
    if (prev_precision < 0.0) prev_precision = precision;
    area += (recall - prev_recall) * 0.5 * (precision + prev_precision);
    prev_recall = recall;
    prev_precision = precision;
  }
  return area;
}

double mean_auc(const std::vector<ClassRanking>& rankings, const std::map<ImageId, ClassId>& truths) {
  if (rankings.empty()) throw UsageError("mean AUC over zero classes");
  double sum = 0.0;
  for (const auto& r : rankings) sum += pr_auc(r, truths);
  return sum / static_cast<double>(rankings.size());
}

namespace {

Matrix embed_for_mode(const VisualPartSet& x, const ModelParams& m, PartMode mode) {
  if (mode == PartMode::FirstPart && x.parts.size() > 1) {
    VisualPartSet first{x.image_id, {x.parts.front()}};
    return embed_visual(first, m);
  }
  return embed_visual(x, m);
}

}  // namespace

MetricReport evaluate_on(const Dataset& d, const ModelParams& m, const std::set<ClassId>& classes,
                         const EvalOptions& options) {
  if (classes.empty()) throw UsageError("evaluation needs at least one candidate class");
  const auto idx = d.images_of(classes);
  if (idx.empty()) throw DataError("no images belong to the evaluation classes");

  const ClassEmbeddings cache(d, m, classes);
  std::vector<Prediction> preds;
  std::vector<RankedPrediction> ranked;
  std::map<ImageId, ClassId> truths;
  std::map<ClassId, ClassRanking> per_class;
  for (const auto& c : classes) per_class[c].class_id = c;

  for (auto n : idx) {
    const auto& img = d.images[n];
    const Matrix v = embed_for_mode(img.image, m, options.part_mode);
    auto scored = rank_classes(v, cache, classes);
    preds.push_back({img.image.image_id, scored.front().first, img.class_id});
    truths[img.image.image_id] = img.class_id;
    for (const auto& [c, s] : scored) per_class[c].ranking.emplace_back(img.image.image_id, s);
    ranked.push_back({img.image.image_id, std::move(scored)});
  }

  std::vector<ClassRanking> rankings;
  for (auto& [c, r] : per_class) {
    std::sort(r.ranking.begin(), r.ranking.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    rankings.push_back(std::move(r));
  }

  MetricReport report;
  report.images = idx.size();
  report.classes = classes.size();
  report.top1_per_class = top1_per_class(preds);
  for (auto k : options.recall_ks) {
    if (options.retrieval == RetrievalDirection::ImagesPerLabel) {
      report.recall_at[k] = label_recall_at_k(rankings, truths, k);
      report.recall_at_per_image[k] = report.recall_at[k];
    } else {
      report.recall_at[k] = recall_at_k(ranked, truths, k, RecallAveraging::PerClass);
      report.recall_at_per_image[k] = recall_at_k(ranked, truths, k, RecallAveraging::PerImage);
    }
  }
  report.mauc = mean_auc(rankings, truths);
  return report;
}

MetricReport evaluate(const Dataset& d, const ModelParams& m, const EvalOptions& options) {
  return evaluate_on(d, m, d.split.test_classes, options);
}

double top1_on(const Dataset& d, const ModelParams& m, const std::set<ClassId>& classes, PartMode part_mode) {
  if (classes.empty()) throw UsageError("evaluation needs at least one candidate class");
  const auto idx = d.images_of(classes);
  if (idx.empty()) throw DataError("no images belong to the evaluation classes");
  const ClassEmbeddings cache(d, m, classes);
  std::vector<Prediction> preds;
  preds.reserve(idx.size());
  for (auto n : idx) {
    const auto& img = d.images[n];
    const Matrix v = embed_for_mode(img.image, m, part_mode);
    preds.push_back({img.image.image_id, rank_classes(v, cache, classes).front().first, img.class_id});
  }
  return top1_per_class(preds);
}

}  // namespace zsl
