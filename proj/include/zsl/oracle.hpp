#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "zsl/core.hpp"
#include "zsl/langparts.hpp"
#include "zsl/objective.hpp"

namespace zsl::oracle {

struct SynthSpec {
  std::size_t n_train_classes = 15;
  std::size_t n_val_classes = 5;
  std::size_t n_test_classes = 5;
  std::size_t parts_per_image = 4;
  std::size_t visual_dim = 32;
  std::size_t token_dim = 16;
  std::size_t images_per_class = 20;
  // Length of each class's latent binary code.
  std::size_t code_bits = 8;
  // Width of the cyclic window of code bits each visual part observes;
  // widened when the windows would not cover the code.
  std::size_t bits_per_part = 6;
  double noise_sigma = 0.5;
  std::uint64_t seed = 7;
};

// Hidden generator state. Tests may read it; the trainer never does.
struct SynthTruth {
  std::map<ClassId, Vector> codes;         // {0,1}^code_bits per class
  Matrix token_map;                        // token_dim x code_bits, entries >= 0
  Matrix visual_map;                       // visual_dim x code_bits
  std::vector<std::vector<int>> blocks;    // code bits observed by each visual part
};

struct SynthData {
  Dataset dataset;
  SynthTruth truth;
};

// Language modality used by generated datasets.
inline constexpr const char* kSynthModality = "attributes";

// Draws distinct binary codes per class. The language part is the noiseless
// token_map * code; visual part p observes a window of bits_per_part code
// bits starting at p * code_bits / parts, through visual_map plus Gaussian
// noise. Deterministic given spec.seed.
SynthData generate(const SynthSpec& spec);

// Text-side inputs matching a generated dataset, so the file-based pipeline
// runs offline: an attribute table holding the class tokens (scaled to
// [0, 100]), word vectors for class and attribute names, and one article
// per class whose words reflect the class code.
struct SynthResources {
  AttributeTable attributes;
  WordVectorTable word_vectors;
  std::map<ClassId, std::string> corpus;
};

SynthResources make_resources(const SynthData& data, std::uint64_t seed);

// Parameters built from the hidden truth. With noise_sigma = 0 they rank the
// true class strictly first for every image.
ModelParams reference_params(const SynthTruth& truth);

// Scalar double loop over pre-embedded parts.
double naive_compatibility(const std::vector<Vector>& x, const std::vector<Vector>& y);
// Embeds with scalar loops, then scores. No batching, no caching.
double naive_compatibility(const VisualPartSet& x, const LanguagePartSet& y, const ModelParams& m);

struct FdGradient {
  ParamGradients grad;
  ParamGradients skipped;  // 1.0 where a kink lies within 10h, else 0.0
  std::size_t n_skipped = 0;
  std::size_t n_coordinates = 0;
};

// Central differences of total_objective, one coordinate at a time.
FdGradient fd_gradient(const Batch& batch, const Dataset& d, const ModelParams& m, const LossConfig& cfg,
                       double h);

// Every hinge, ReLU and label-switch argument of the objective, computed
// with scalar loops in a fixed order.
std::vector<double> kink_arguments(const Batch& batch, const Dataset& d, const ModelParams& m,
                                   const LossConfig& cfg);

// Visits every scalar of a parameter-shaped object in a fixed order.
std::vector<double*> coordinates(ModelParams& m);
std::vector<const double*> coordinates(const ParamGradients& g);
std::vector<std::string> coordinate_names(const ModelParams& m);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_coordinate;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  bool passed = false;
};

// Relative error |a - f| / max(|a|, |f|, floor) over non-kink coordinates.
inline constexpr double kRelErrorFloor = 1e-3;

GradCheckResult check_gradient(const Batch& batch, const Dataset& d, const ModelParams& m, const LossConfig& cfg,
                               double h = 1e-5, double tolerance = 1e-4);

struct GradCheckInstance {
  Dataset dataset;
  ModelParams params;
  LossConfig loss;
  Batch batch;
};

// Small random problem: embed_dim <= 8, <= 4 classes, <= 3 parts, two
// language modalities.
GradCheckInstance random_gradcheck_instance(std::uint64_t seed);

}  // namespace zsl::oracle
