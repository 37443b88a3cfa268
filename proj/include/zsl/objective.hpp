#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <vector>

#include "zsl/core.hpp"

namespace zsl {

// y_ij in {+1, -1} over (visual part i, language part j).
struct AlignmentLabels {
  Eigen::MatrixXi values;
};

struct LossConfig {
  double margin_delta = 0.5;
  double reg_alpha = 1e-4;
  double rank_beta = 1.0;
  // Rank each image against every training class instead of only the
  // classes present in its minibatch.
  bool full_universe_negatives = false;
};

// Same fields and shapes as ModelParams, holding d objective / d field.
struct ParamGradients {
  std::map<ModalityId, Matrix> lang_proj;
  Vector lang_bias;
  Matrix vis_proj;
  Vector vis_bias;

  static ParamGradients zeros_like(const ModelParams& m);
  double max_abs() const;
};

// Indices into Dataset::images.
using Batch = std::vector<std::size_t>;

// Labels from the sign of each part-pair score. Non-matching pairs are all
// -1; matching pairs use sign(v.s) with sign(0) = -1 and force the largest
// score to +1 when no entry is positive.
AlignmentLabels alignment_labels(const Matrix& dots, bool matching);
AlignmentLabels alignment_labels(const std::vector<Vector>& v, const std::vector<Vector>& s, bool matching);

// sum_ij max(0, 1 - y_ij v_i.s_j). Throws UsageError on a shape mismatch.
double alignment_loss(const Matrix& dots, const AlignmentLabels& labels);
double alignment_loss(const std::vector<Vector>& v, const std::vector<Vector>& s, const AlignmentLabels& labels);

// Classes each batch image is ranked against: the batch's own classes, or
// all training classes when full_universe_negatives is set.
std::set<ClassId> negative_universe(const Batch& batch, const Dataset& d, const LossConfig& cfg);

// sum_n sum_{y != y_n} max(0, delta + F(x_n, y) - F(x_n, y_n)) over y in
// `universe`. Throws UsageError when an image's true class is missing.
double ranking_penalty(const Batch& batch, const std::set<ClassId>& universe, const Dataset& d,
                       const ModelParams& m, const LossConfig& cfg);

struct ObjectiveTerms {
  double alignment = 0.0;       // C_P over all image-class pairs of the batch
  double ranking = 0.0;         // unweighted ranking penalty
  double regularization = 0.0;  // squared norm of the projections, unweighted
  double total = 0.0;           // alignment + beta * ranking + alpha * regularization
};

ObjectiveTerms objective_terms(const Batch& batch, const Dataset& d, const ModelParams& m,
                               const LossConfig& cfg);

double total_objective(const Batch& batch, const Dataset& d, const ModelParams& m, const LossConfig& cfg);

// Subgradient of total_objective with labels and hinge active sets held at
// their current values; kinks take the zero-derivative side.
ParamGradients gradient(const Batch& batch, const Dataset& d, const ModelParams& m, const LossConfig& cfg);

// Objective value and gradient from a single pass.
ObjectiveTerms objective_and_gradient(const Batch& batch, const Dataset& d, const ModelParams& m,
                                      const LossConfig& cfg, ParamGradients& grad);

}  // namespace zsl
