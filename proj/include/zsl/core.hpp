#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace zsl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using ClassId = std::string;
using ImageId = std::string;
using ModalityId = std::string;

// Bag of precomputed part descriptors for one image. Part 0 is the whole
// image by convention; the remaining parts carry no order.
struct VisualPartSet {
  ImageId image_id;
  std::vector<Vector> parts;
};

// One language part: a token vector per modality. The encoder sums the
// per-modality projections before the nonlinearity.
struct LanguagePart {
  std::map<ModalityId, Vector> tokens;
};

struct LanguagePartSet {
  ClassId class_id;
  std::vector<LanguagePart> parts;
};

// Learnable encoders. Matrices are embed_dim x input_dim.
struct ModelParams {
  std::map<ModalityId, Matrix> lang_proj;
  Vector lang_bias;
  Matrix vis_proj;
  Vector vis_bias;

  std::size_t embed_dim() const { return static_cast<std::size_t>(vis_proj.rows()); }
  std::size_t visual_dim() const { return static_cast<std::size_t>(vis_proj.cols()); }

  // Zero-valued parameters with the same shapes as `like`.
  static ModelParams zeros_like(const ModelParams& like);
  // Sum of squares of all projection entries (biases excluded).
  double projection_squared_norm() const;
  bool all_finite() const;
  // Number of scalar entries across all fields.
  std::size_t size() const;

  bool operator==(const ModelParams&) const = default;
};

// Shapes that define a model.
struct ModelDims {
  std::size_t visual_dim = 0;
  std::size_t embed_dim = 0;
  std::map<ModalityId, std::size_t> modality_dims;
};

ModelDims dims_of(const ModelParams& m);

struct ZeroShotSplit {
  std::set<ClassId> train_classes;
  std::set<ClassId> val_classes;
  std::set<ClassId> test_classes;

  // Which partition holds the class: "train", "val", "test" or "" if none.
  std::string partition_of(const ClassId& c) const;
};

struct LabeledImage {
  VisualPartSet image;
  ClassId class_id;
};

struct Dataset {
  std::vector<LabeledImage> images;
  std::map<ClassId, LanguagePartSet> classes;
  ZeroShotSplit split;

  // Feature dimension of the first visual part, 0 if there is none.
  std::size_t visual_dim() const;
  // Modality dimensions as first declared by the language parts.
  std::map<ModalityId, std::size_t> modality_dims() const;
  // Indices of images whose class is in `classes`.
  std::vector<std::size_t> images_of(const std::set<ClassId>& classes) const;
};

struct Violation {
  std::string entity;
  std::string message;
};

// Checks every invariant of the dataset model. Returns one entry per
// violation; an empty result means the dataset is well formed.
std::vector<Violation> validate_dataset(const Dataset& d);

// Copy of `d` with every image restricted to its first `max_parts` parts.
Dataset restrict_parts(const Dataset& d, std::size_t max_parts);

}  // namespace zsl
