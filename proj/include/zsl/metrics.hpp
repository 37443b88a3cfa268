#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "zsl/core.hpp"

namespace zsl {

struct Prediction {
  ImageId image_id;
  ClassId predicted;
  ClassId truth;
};

// Labels ranked for one image, descending score, ties by class id.
struct RankedPrediction {
  ImageId image_id;
  std::vector<std::pair<ClassId, double>> ranking;
};

// Test images ranked for one class, descending score, ties by image id.
struct ClassRanking {
  ClassId class_id;
  std::vector<std::pair<ImageId, double>> ranking;
};

enum class RecallAveraging { PerClass, PerImage };

// Which side is the query when computing R@K.
enum class RetrievalDirection {
  LabelsPerImage,  // each image ranks the candidate labels
  ImagesPerLabel,  // each label ranks the test images
};

// Per-class Top-1 accuracy averaged over classes, in percent.
double top1_per_class(const std::vector<Prediction>& preds);

// Percentage of images whose true class is within the first k labels.
double recall_at_k(const std::vector<RankedPrediction>& ranked, const std::map<ImageId, ClassId>& truths,
                   std::size_t k, RecallAveraging averaging = RecallAveraging::PerClass);

// Percentage of labels with at least one of their own images within the
// first k retrieved images.
double label_recall_at_k(const std::vector<ClassRanking>& rankings, const std::map<ImageId, ClassId>& truths,
                         std::size_t k);

// Area under one class's precision-recall curve (trapezoidal in recall,
// anchored at the precision of the first retrieved positive).
double pr_auc(const ClassRanking& ranking, const std::map<ImageId, ClassId>& truths);

// Mean of pr_auc over classes, in [0, 1].
double mean_auc(const std::vector<ClassRanking>& rankings, const std::map<ImageId, ClassId>& truths);

enum class PartMode { FirstPart, AllParts };

struct EvalOptions {
  PartMode part_mode = PartMode::AllParts;
  RetrievalDirection retrieval = RetrievalDirection::LabelsPerImage;
  std::vector<std::size_t> recall_ks = {1, 5, 10};
};

struct MetricReport {
  double top1_per_class = 0.0;
  std::map<std::size_t, double> recall_at;            // per-class averaged
  std::map<std::size_t, double> recall_at_per_image;  // per-image averaged
  double mauc = 0.0;
  std::size_t images = 0;
  std::size_t classes = 0;

  bool operator==(const MetricReport&) const = default;
};

// Scores every image of `classes` against exactly those classes.
MetricReport evaluate_on(const Dataset& d, const ModelParams& m, const std::set<ClassId>& classes,
                         const EvalOptions& options = {});

// evaluate_on over the unseen test classes.
MetricReport evaluate(const Dataset& d, const ModelParams& m, const EvalOptions& options = {});

// Top-1 only; used for validation during training.
double top1_on(const Dataset& d, const ModelParams& m, const std::set<ClassId>& classes,
               PartMode part_mode = PartMode::AllParts);

}  // namespace zsl
