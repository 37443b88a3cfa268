#include "zsl/embedder.hpp"

#include <algorithm>

#include "zsl/error.hpp"

namespace zsl {

Vector language_preactivation(const LanguagePart& p, const ModelParams& m) {
  Vector a = m.lang_bias;
  for (const auto& [mod, tok] : p.tokens) {
    auto it = m.lang_proj.find(mod);
    if (it == m.lang_proj.end()) throw ConfigError("no language projection for modality '" + mod + "'");
    if (it->second.cols() != tok.size())
      throw DataError("modality '" + mod + "' token has dimension " + std::to_string(tok.size()) +
                      ", projection expects " + std::to_string(it->second.cols()));
    a.noalias() += it->second * tok;
  }
  return a;
}

Vector embed_language_part(const LanguagePart& p, const ModelParams& m) {
  return language_preactivation(p, m).cwiseMax(0.0);
}

Vector embed_visual_part(const Vector& f, const ModelParams& m) {
  if (f.size() != m.vis_proj.cols())
    throw DataError("visual feature has dimension " + std::to_string(f.size()) + ", projection expects " +
                    std::to_string(m.vis_proj.cols()));
  return m.vis_proj * f + m.vis_bias;
}

Matrix embed_language(const LanguagePartSet& y, const ModelParams& m) {
  Matrix s(m.embed_dim(), y.parts.size());
  for (std::size_t j = 0; j < y.parts.size(); ++j) s.col(j) = embed_language_part(y.parts[j], m);
  return s;
}

Matrix embed_visual(const VisualPartSet& x, const ModelParams& m) {
  Matrix v(m.embed_dim(), x.parts.size());
  for (std::size_t i = 0; i < x.parts.size(); ++i) v.col(i) = embed_visual_part(x.parts[i], m);
  return v;
}

double compatibility(const Matrix& visual, const Matrix& language) {
  if (visual.cols() == 0 || language.cols() == 0) throw DataError("compatibility of an empty part set");
  if (visual.rows() != language.rows())
    throw DataError("compatibility between embeddings of different dimension");
  const Matrix dots = visual.transpose() * language;
  return dots.cwiseMax(0.0).sum() / static_cast<double>(dots.size());
}

double compatibility(const std::vector<Vector>& x, const std::vector<Vector>& y) {
  if (x.empty() || y.empty()) throw DataError("compatibility of an empty part set");
  const auto rows = x.front().size();
  Matrix v(rows, x.size());
  Matrix s(y.front().size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != rows) throw DataError("visual embeddings of different dimension");
    v.col(i) = x[i];
  }
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (y[j].size() != s.rows()) throw DataError("language embeddings of different dimension");
    s.col(j) = y[j];
  }
  return compatibility(v, s);
}

ClassEmbeddings::ClassEmbeddings(const Dataset& d, const ModelParams& m, const std::set<ClassId>& classes) {
  for (const auto& c : classes) {
    auto it = d.classes.find(c);
    if (it == d.classes.end()) throw LookupError("class '" + c + "' has no language parts");
    embedded_.emplace(c, embed_language(it->second, m));
  }
}

const Matrix& ClassEmbeddings::at(const ClassId& c) const {
  auto it = embedded_.find(c);
  if (it == embedded_.end()) throw LookupError("class '" + c + "' was not embedded");
  return it->second;
}

std::vector<ScoredClass> rank_classes(const Matrix& visual, const ClassEmbeddings& cache,
                                      const std::set<ClassId>& candidates) {
  std::vector<ScoredClass> scored;
  scored.reserve(candidates.size());
  for (const auto& c : candidates) scored.emplace_back(c, compatibility(visual, cache.at(c)));
  // std::set iterates byte-wise, so a stable sort keeps the smaller id first on ties.
  std::stable_sort(scored.begin(), scored.end(),
                   [](const ScoredClass& a, const ScoredClass& b) { return a.second > b.second; });
  return scored;
}

ClassId predict(const VisualPartSet& x, const std::set<ClassId>& candidates, const Dataset& d,
                const ModelParams& m) {
  if (candidates.empty()) throw UsageError("predict needs at least one candidate class");
  const ClassEmbeddings cache(d, m, candidates);
  return rank_classes(embed_visual(x, m), cache, candidates).front().first;
}

}  // namespace zsl
