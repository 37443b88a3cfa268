#include "zsl/langparts.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "zsl/error.hpp"

namespace zsl {

namespace {

bool word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

std::string lowercase(std::string s) {
  for (auto& ch : s)
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  return s;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (word_byte(c)) {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

long Vocabulary::index_of(const std::string& term) const {
  auto it = std::lower_bound(terms.begin(), terms.end(), term);
  if (it == terms.end() || *it != term) return -1;
  return static_cast<long>(it - terms.begin());
}

Vocabulary build_vocabulary(const std::vector<std::string>& corpus, std::size_t min_df, double max_df_fraction) {
  if (corpus.empty()) throw ConfigError("vocabulary corpus is empty");
  if (!(max_df_fraction > 0.0 && max_df_fraction <= 1.0))
    throw ConfigError("max_df_fraction must lie in (0, 1]");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    const auto toks = tokenize(doc);
    for (const auto& t : std::set<std::string>(toks.begin(), toks.end())) ++df[t];
  }
  const double max_df = max_df_fraction * static_cast<double>(corpus.size());
  Vocabulary v;
  for (const auto& [term, count] : df)
    if (count >= min_df && static_cast<double>(count) <= max_df) {
      v.terms.push_back(term);
      v.doc_freq.push_back(count);
    }
  if (v.terms.empty()) throw ConfigError("vocabulary is empty after document-frequency pruning");
  return v;
}

Vector bow_counts(const std::string& doc, const Vocabulary& v) {
  Vector counts = Vector::Zero(static_cast<Eigen::Index>(v.size()));
  for (const auto& t : tokenize(doc)) {
    const long k = v.index_of(t);
    if (k >= 0) counts(k) += 1.0;
  }
  return counts;
}

Vector bow_histogram(const std::string& doc, const Vocabulary& v) {
  Vector h = bow_counts(doc, v);
  const double total = h.sum();
  if (total > 0.0) h /= total;
  return h;
}

namespace {

bool is_heading(const std::string& line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  return line.compare(i, 2, "==") == 0 || line.compare(i, 1, "#") == 0;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string heading_text(const std::string& line) {
  auto b = line.find_first_not_of("=# \t");
  auto e = line.find_last_not_of("=# \t\r");
  if (b == std::string::npos) return "";
  return line.substr(b, e - b + 1);
}

}  // namespace

Article Article::parse(const std::string& text) {
  Article a;
  a.sections.push_back({});
  std::string para;
  auto flush = [&] {
    if (!para.empty()) a.sections.back().paragraphs.push_back(std::move(para));
    para.clear();
  };
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_heading(line)) {
      flush();
      a.sections.push_back({heading_text(line), {}});
    } else if (is_blank(line)) {
      flush();
    } else {
      if (!para.empty()) para.push_back('\n');
      para += line;
    }
  }
  flush();
  a.sections.erase(std::remove_if(a.sections.begin(), a.sections.end(),
                                  [](const Section& s) { return s.paragraphs.empty(); }),
                   a.sections.end());
  return a;
}

std::vector<std::string> Article::paragraphs() const {
  std::vector<std::string> out;
  for (const auto& s : sections) out.insert(out.end(), s.paragraphs.begin(), s.paragraphs.end());
  return out;
}

std::vector<std::size_t> split_sizes(std::size_t n, std::size_t groups) {
  std::vector<std::size_t> sizes(groups, n / groups);
  for (std::size_t g = 0; g < n % groups; ++g) ++sizes[g];
  return sizes;
}

namespace {

std::string join(const std::vector<std::string>& parts, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += "\n\n";
    out += parts[i];
  }
  return out;
}

}  // namespace

std::vector<Vector> mbow_counts(const Article& article, const MbowSpec& spec, const Vocabulary& v) {
  const auto paras = article.paragraphs();
  if (paras.empty()) throw DataError("article has no paragraphs");
  std::vector<Vector> out;
  switch (spec.mode) {
    case MbowMode::Whole:
      out.push_back(bow_counts(join(paras, 0, paras.size()), v));
      break;
    case MbowMode::Paragraphs: {
      if (spec.groups < 2 || spec.groups > 5)
        throw UsageError("paragraph groups must be one of 2, 3, 4, 5 (got " + std::to_string(spec.groups) + ")");
      std::size_t start = 0;
      for (auto size : split_sizes(paras.size(), spec.groups)) {
        out.push_back(bow_counts(join(paras, start, start + size), v));
        start += size;
      }
      break;
    }
    case MbowMode::Sections:
      for (const auto& s : article.sections) out.push_back(bow_counts(join(s.paragraphs, 0, s.paragraphs.size()), v));
      break;
  }
  return out;
}

std::vector<Vector> mbow(const Article& article, const MbowSpec& spec, const Vocabulary& v) {
  auto parts = mbow_counts(article, spec, v);
  for (auto& h : parts) {
    const double total = h.sum();
    if (total > 0.0) h /= total;
  }
  return parts;
}

const Vector* WordVectorTable::find(const std::string& word) const {
  auto it = vectors.find(word);
  if (it == vectors.end()) it = vectors.find(lowercase(word));
  return it == vectors.end() ? nullptr : &it->second;
}

Vector phrase_vector(const std::string& name, const WordVectorTable& w) {
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(w.dim));
  std::size_t found = 0;
  for (const auto& word : tokenize(name)) {
    if (const Vector* v = w.find(word)) {
      sum += *v;
      ++found;
    }
  }
  if (found == 0) throw LookupError("no word of '" + name + "' has a word vector");
  return sum / static_cast<double>(found);
}

std::size_t AttributeTable::row_of(const ClassId& c) const {
  auto it = std::find(classes.begin(), classes.end(), c);
  if (it == classes.end()) throw LookupError("class '" + c + "' is not in the attribute table");
  return static_cast<std::size_t>(it - classes.begin());
}

std::vector<Vector> noun_attribute_differences(const ClassId& c, const AttributeTable& t, const WordVectorTable& w) {
  const Vector wc = phrase_vector(c, w);
  std::vector<Vector> diffs;
  diffs.reserve(t.attributes.size());
  for (const auto& a : t.attributes) diffs.push_back(wc - phrase_vector(a, w));
  return diffs;
}

LanguagePart nad1(const ClassId& c, const AttributeTable& t, const WordVectorTable& w, const ModalityId& modality) {
  const auto diffs = noun_attribute_differences(c, t, w);
  Vector dist(static_cast<Eigen::Index>(diffs.size()));
  for (std::size_t j = 0; j < diffs.size(); ++j) dist(static_cast<Eigen::Index>(j)) = diffs[j].norm();
  LanguagePart p;
  p.tokens[modality] = dist;
  return p;
}

std::vector<LanguagePart> nad2(const ClassId& c, const AttributeTable& t, const WordVectorTable& w,
                               std::size_t top_n, const ModalityId& modality) {
  const std::size_t m = t.attributes.size();
  if (top_n < 1 || top_n > m)
    throw UsageError("top_n must lie in [1, " + std::to_string(m) + "], got " + std::to_string(top_n));
  const auto diffs = noun_attribute_differences(c, t, w);
  std::vector<double> dist(m);
  for (std::size_t j = 0; j < m; ++j) dist[j] = diffs[j].norm();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  std::vector<LanguagePart> parts(top_n);
  for (std::size_t k = 0; k < top_n; ++k) parts[k].tokens[modality] = diffs[order[k]];
  return parts;
}

std::vector<LanguagePart> nad3(const ClassId& c, const AttributeTable& t, const WordVectorTable& w, double threshold,
                               const ModalityId& modality) {
  if (!(threshold >= 0.0 && threshold <= 100.0)) throw UsageError("threshold must lie in [0, 100]");
  const auto row = static_cast<Eigen::Index>(t.row_of(c));
  const auto diffs = noun_attribute_differences(c, t, w);
  std::vector<LanguagePart> parts;
  for (std::size_t j = 0; j < diffs.size(); ++j)
    if (t.strengths(row, static_cast<Eigen::Index>(j)) >= threshold) {
      LanguagePart p;
      p.tokens[modality] = diffs[j];
      parts.push_back(std::move(p));
    }
  if (parts.empty()) throw DataError("class '" + c + "' has no attribute with strength >= " + std::to_string(threshold));
  return parts;
}

}  // namespace zsl
