#include "zsl/objective.hpp"

#include <algorithm>
#include <cmath>

#include "zsl/embedder.hpp"
#include "zsl/error.hpp"

namespace zsl {

ParamGradients ParamGradients::zeros_like(const ModelParams& m) {
  ParamGradients g;
  for (const auto& [id, w] : m.lang_proj) g.lang_proj[id] = Matrix::Zero(w.rows(), w.cols());
  g.lang_bias = Vector::Zero(m.lang_bias.size());
  g.vis_proj = Matrix::Zero(m.vis_proj.rows(), m.vis_proj.cols());
  g.vis_bias = Vector::Zero(m.vis_bias.size());
  return g;
}

double ParamGradients::max_abs() const {
  double r = 0.0;
  auto take = [&r](const auto& x) {
    if (x.size() > 0) r = std::max(r, x.cwiseAbs().maxCoeff());
  };
  for (const auto& [id, w] : lang_proj) take(w);
  take(lang_bias);
  take(vis_proj);
  take(vis_bias);
  return r;
}

AlignmentLabels alignment_labels(const Matrix& dots, bool matching) {
  AlignmentLabels labels{Eigen::MatrixXi::Constant(dots.rows(), dots.cols(), -1)};
  if (!matching || dots.size() == 0) return labels;
  bool any_positive = false;
  for (Eigen::Index i = 0; i < dots.rows(); ++i)
    for (Eigen::Index j = 0; j < dots.cols(); ++j)
      if (dots(i, j) > 0.0) {
        labels.values(i, j) = 1;
        any_positive = true;
      }
  if (!any_positive) {
    // Row-major scan with strict comparison keeps the first maximum.
    Eigen::Index bi = 0, bj = 0;
    for (Eigen::Index i = 0; i < dots.rows(); ++i)
      for (Eigen::Index j = 0; j < dots.cols(); ++j)
        if (dots(i, j) > dots(bi, bj)) {
          bi = i;
          bj = j;
        }
    labels.values(bi, bj) = 1;
  }
  return labels;
}

namespace {

Matrix as_columns(const std::vector<Vector>& parts) {
  if (parts.empty()) return Matrix();
  Matrix out(parts.front().size(), parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].size() != out.rows()) throw UsageError("embeddings of different dimension");
    out.col(i) = parts[i];
  }
  return out;
}

Matrix pair_dots(const std::vector<Vector>& v, const std::vector<Vector>& s) {
  if (v.empty() || s.empty()) throw UsageError("alignment over an empty part set");
  const Matrix vm = as_columns(v);
  const Matrix sm = as_columns(s);
  if (vm.rows() != sm.rows()) throw UsageError("visual and language embeddings differ in dimension");
  return vm.transpose() * sm;
}

}  // namespace

AlignmentLabels alignment_labels(const std::vector<Vector>& v, const std::vector<Vector>& s, bool matching) {
  return alignment_labels(pair_dots(v, s), matching);
}

double alignment_loss(const Matrix& dots, const AlignmentLabels& labels) {
  if (labels.values.rows() != dots.rows() || labels.values.cols() != dots.cols())
    throw UsageError("alignment labels are " + std::to_string(labels.values.rows()) + "x" +
                     std::to_string(labels.values.cols()) + ", scores are " + std::to_string(dots.rows()) +
                     "x" + std::to_string(dots.cols()));
  const Matrix margins = (1.0 - (labels.values.cast<double>().array() * dots.array())).matrix();
  return margins.cwiseMax(0.0).sum();
}

double alignment_loss(const std::vector<Vector>& v, const std::vector<Vector>& s, const AlignmentLabels& labels) {
  return alignment_loss(pair_dots(v, s), labels);
}

std::set<ClassId> negative_universe(const Batch& batch, const Dataset& d, const LossConfig& cfg) {
  if (cfg.full_universe_negatives) return d.split.train_classes;
  std::set<ClassId> u;
  for (auto n : batch) u.insert(d.images.at(n).class_id);
  return u;
}

double ranking_penalty(const Batch& batch, const std::set<ClassId>& universe, const Dataset& d,
                       const ModelParams& m, const LossConfig& cfg) {
  for (auto n : batch)
    if (!universe.count(d.images.at(n).class_id))
      throw UsageError("true class '" + d.images[n].class_id + "' of image '" + d.images[n].image.image_id +
                       "' is not in the ranking universe");
  const ClassEmbeddings cache(d, m, universe);
  double total = 0.0;
  for (auto n : batch) {
    const auto& img = d.images[n];
    const Matrix v = embed_visual(img.image, m);
    const double f_true = compatibility(v, cache.at(img.class_id));
    for (const auto& c : universe) {
      if (c == img.class_id) continue;
      total += std::max(0.0, cfg.margin_delta + compatibility(v, cache.at(c)) - f_true);
    }
  }
  return total;
}

namespace {

struct EmbeddedClass {
  Matrix preact;    // E x L, before ReLU
  Matrix embedded;  // E x L
  Matrix grad;      // d objective / d embedded
};

ObjectiveTerms evaluate(const Batch& batch, const Dataset& d, const ModelParams& m, const LossConfig& cfg,
                        ParamGradients* grad) {
  ObjectiveTerms terms;
  std::set<ClassId> batch_classes;
  for (auto n : batch) batch_classes.insert(d.images.at(n).class_id);
  const std::set<ClassId> universe = negative_universe(batch, d, cfg);
  for (const auto& c : batch_classes)
    if (!universe.count(c)) throw UsageError("batch class '" + c + "' is outside the training universe");

  std::map<ClassId, EmbeddedClass> lang;
  auto embed_class = [&](const ClassId& c) {
    if (lang.count(c)) return;
    auto it = d.classes.find(c);
    if (it == d.classes.end()) throw LookupError("class '" + c + "' has no language parts");
    EmbeddedClass e;
    e.preact.resize(m.embed_dim(), it->second.parts.size());
    for (std::size_t j = 0; j < it->second.parts.size(); ++j)
      e.preact.col(j) = language_preactivation(it->second.parts[j], m);
    e.embedded = e.preact.cwiseMax(0.0);
    e.grad = Matrix::Zero(e.preact.rows(), e.preact.cols());
    lang.emplace(c, std::move(e));
  };
  for (const auto& c : universe) embed_class(c);

  const double beta = cfg.rank_beta;
  for (auto n : batch) {
    const auto& img = d.images[n];
    const auto& parts = img.image.parts;
    Matrix x(m.visual_dim(), parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (parts[i].size() != x.rows()) throw DataError("image '" + img.image.image_id + "' has a part of wrong dimension");
      x.col(i) = parts[i];
    }
    const Matrix v = (m.vis_proj * x).colwise() + m.vis_bias;
    Matrix dv = Matrix::Zero(v.rows(), v.cols());

    // Part alignment against every class present in the batch.
    for (const auto& c : batch_classes) {
      auto& cls = lang.at(c);
      const Matrix dots = v.transpose() * cls.embedded;
      const AlignmentLabels labels = alignment_labels(dots, c == img.class_id);
      terms.alignment += alignment_loss(dots, labels);
      if (grad) {
        Matrix g(dots.rows(), dots.cols());
        for (Eigen::Index i = 0; i < dots.rows(); ++i)
          for (Eigen::Index j = 0; j < dots.cols(); ++j) {
            const double y = labels.values(i, j);
            g(i, j) = (1.0 - y * dots(i, j) > 0.0) ? -y : 0.0;
          }
        dv.noalias() += cls.embedded * g.transpose();
        cls.grad.noalias() += v * g;
      }
    }

    // Margin ranking against the other classes of the universe.
    auto score = [&](const EmbeddedClass& cls, Matrix* dscore) {
      const Matrix dots = v.transpose() * cls.embedded;
      const double norm = 1.0 / static_cast<double>(dots.size());
      if (dscore) *dscore = (dots.array() > 0.0).cast<double>().matrix() * norm;
      return dots.cwiseMax(0.0).sum() * norm;
    };
    auto& truth = lang.at(img.class_id);
    Matrix dtrue;
    const double f_true = score(truth, grad ? &dtrue : nullptr);
    double true_weight = 0.0;
    for (const auto& c : universe) {
      if (c == img.class_id) continue;
      auto& cls = lang.at(c);
      Matrix dother;
      const double arg = cfg.margin_delta + score(cls, grad ? &dother : nullptr) - f_true;
      if (arg <= 0.0) continue;
      terms.ranking += arg;
      if (grad && beta != 0.0) {
        dv.noalias() += beta * cls.embedded * dother.transpose();
        cls.grad.noalias() += beta * v * dother;
        true_weight -= beta;
      }
    }
    if (grad && true_weight != 0.0) {
      dv.noalias() += true_weight * truth.embedded * dtrue.transpose();
      truth.grad.noalias() += true_weight * v * dtrue;
    }

    if (grad) {
      grad->vis_proj.noalias() += dv * x.transpose();
      grad->vis_bias += dv.rowwise().sum();
    }
  }

  if (grad) {
    for (const auto& [c, cls] : lang) {
      const Matrix da = cls.grad.cwiseProduct((cls.preact.array() > 0.0).cast<double>().matrix());
      const auto& parts = d.classes.at(c).parts;
      for (std::size_t j = 0; j < parts.size(); ++j) {
        for (const auto& [mod, tok] : parts[j].tokens) grad->lang_proj.at(mod).noalias() += da.col(j) * tok.transpose();
        grad->lang_bias += da.col(j);
      }
    }
    const double two_alpha = 2.0 * cfg.reg_alpha;
    grad->vis_proj += two_alpha * m.vis_proj;
    for (auto& [mod, g] : grad->lang_proj) g += two_alpha * m.lang_proj.at(mod);
  }

  terms.regularization = m.projection_squared_norm();
  terms.total = terms.alignment + beta * terms.ranking + cfg.reg_alpha * terms.regularization;
  return terms;
}

}  // namespace

ObjectiveTerms objective_terms(const Batch& batch, const Dataset& d, const ModelParams& m,
                               const LossConfig& cfg) {
  return evaluate(batch, d, m, cfg, nullptr);
}

double total_objective(const Batch& batch, const Dataset& d, const ModelParams& m, const LossConfig& cfg) {
  return evaluate(batch, d, m, cfg, nullptr).total;
}

ParamGradients gradient(const Batch& batch, const Dataset& d, const ModelParams& m, const LossConfig& cfg) {
  ParamGradients g = ParamGradients::zeros_like(m);
  evaluate(batch, d, m, cfg, &g);
  return g;
}

ObjectiveTerms objective_and_gradient(const Batch& batch, const Dataset& d, const ModelParams& m,
                                      const LossConfig& cfg, ParamGradients& grad) {
  grad = ParamGradients::zeros_like(m);
  return evaluate(batch, d, m, cfg, &grad);
}

}  // namespace zsl
