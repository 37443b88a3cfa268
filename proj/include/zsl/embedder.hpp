#pragma once

#include <map>
#include <set>
#include <utility>
#include <vector>

#include "zsl/core.hpp"

namespace zsl {

// Sum of per-modality projections plus bias, before the ReLU.
Vector language_preactivation(const LanguagePart& p, const ModelParams& m);

// ReLU(sum_m W_m l_m + b). Every coordinate is >= 0. Throws ConfigError
// when a modality has no projection and DataError on a dimension mismatch.
Vector embed_language_part(const LanguagePart& p, const ModelParams& m);

// W f + b, no nonlinearity. Throws DataError on a dimension mismatch.
Vector embed_visual_part(const Vector& f, const ModelParams& m);

// Embeddings as columns of an embed_dim x |parts| matrix.
Matrix embed_language(const LanguagePartSet& y, const ModelParams& m);
Matrix embed_visual(const VisualPartSet& x, const ModelParams& m);

// Mean over all part pairs of max(0, v_i . s_j). Throws DataError if either
// side is empty or the embedding dimensions differ.
double compatibility(const std::vector<Vector>& x, const std::vector<Vector>& y);
// Same score with parts stored as columns.
double compatibility(const Matrix& visual, const Matrix& language);

// Language embeddings of a fixed set of classes under fixed parameters.
class ClassEmbeddings {
 public:
  ClassEmbeddings(const Dataset& d, const ModelParams& m, const std::set<ClassId>& classes);

  const Matrix& at(const ClassId& c) const;
  bool contains(const ClassId& c) const { return embedded_.count(c) != 0; }

 private:
  std::map<ClassId, Matrix> embedded_;
};

using ScoredClass = std::pair<ClassId, double>;

// Scores every candidate, sorted by descending score with ties broken by
// byte-wise smaller class id first.
std::vector<ScoredClass> rank_classes(const Matrix& visual, const ClassEmbeddings& cache,
                                      const std::set<ClassId>& candidates);

// argmax over candidates of the compatibility score.
ClassId predict(const VisualPartSet& x, const std::set<ClassId>& candidates, const Dataset& d,
                const ModelParams& m);

}  // namespace zsl
