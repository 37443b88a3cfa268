#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "zsl/core.hpp"

namespace zsl {

// Lowercased tokens split on runs of non-alphanumeric bytes. Bytes >= 0x80
// are kept inside tokens so UTF-8 words survive.
std::vector<std::string> tokenize(const std::string& text);

struct Vocabulary {
  std::vector<std::string> terms;      // unique, byte-wise sorted
  std::vector<std::size_t> doc_freq;   // parallel to terms

  // Position of `term`, or -1.
  long index_of(const std::string& term) const;
  std::size_t size() const { return terms.size(); }
};

// Keeps terms with min_df <= df <= max_df_fraction * |corpus|. Throws
// ConfigError if nothing survives.
Vocabulary build_vocabulary(const std::vector<std::string>& corpus, std::size_t min_df,
                            double max_df_fraction);

// Raw term counts in vocabulary order.
Vector bow_counts(const std::string& doc, const Vocabulary& v);
// L1-normalized counts, or the zero vector when no term matches.
Vector bow_histogram(const std::string& doc, const Vocabulary& v);

struct Section {
  std::string heading;                  // empty for the preamble
  std::vector<std::string> paragraphs;
};

// Heading lines start with "==" or "#"; paragraphs are separated by blank
// lines. Heading lines are structure and are not part of any paragraph.
struct Article {
  std::vector<Section> sections;

  static Article parse(const std::string& text);
  std::vector<std::string> paragraphs() const;
};

enum class MbowMode { Whole, Paragraphs, Sections };

struct MbowSpec {
  MbowMode mode = MbowMode::Whole;
  std::size_t groups = 2;  // paragraph groups for MbowMode::Paragraphs, in {2..5}
};

// Contiguous group sizes for `n` items in `groups` groups, earlier groups larger.
std::vector<std::size_t> split_sizes(std::size_t n, std::size_t groups);

// One un-normalized count vector per part.
std::vector<Vector> mbow_counts(const Article& article, const MbowSpec& spec, const Vocabulary& v);
// One normalized histogram per part. Throws DataError on an article with no
// paragraphs and UsageError on a group count outside {2..5}.
std::vector<Vector> mbow(const Article& article, const MbowSpec& spec, const Vocabulary& v);

struct WordVectorTable {
  std::size_t dim = 0;
  std::unordered_map<std::string, Vector> vectors;

  // Looks up the word as given, then lowercased. nullptr if absent.
  const Vector* find(const std::string& word) const;
};

// Mean vector of the known constituent words of `name`. Throws LookupError
// when none is known.
Vector phrase_vector(const std::string& name, const WordVectorTable& w);

struct AttributeTable {
  std::vector<ClassId> classes;
  std::vector<std::string> attributes;
  Matrix strengths;  // classes x attributes, values in [0, 100]

  // Row of `c`; throws LookupError if absent.
  std::size_t row_of(const ClassId& c) const;
};

// wC(c) - wA(a_j) for every attribute j, in table order.
std::vector<Vector> noun_attribute_differences(const ClassId& c, const AttributeTable& t, const WordVectorTable& w);

// Distances from the class to every attribute in word-vector space: one part.
LanguagePart nad1(const ClassId& c, const AttributeTable& t, const WordVectorTable& w,
                  const ModalityId& modality = "nad1");

// Difference vectors of the top_n attributes nearest the class.
std::vector<LanguagePart> nad2(const ClassId& c, const AttributeTable& t, const WordVectorTable& w,
                               std::size_t top_n, const ModalityId& modality = "nad2");

// Difference vectors of the attributes whose strength for the class is at
// least `threshold`. Throws DataError when no attribute qualifies.
std::vector<LanguagePart> nad3(const ClassId& c, const AttributeTable& t, const WordVectorTable& w,
                               double threshold, const ModalityId& modality = "nad3");

}  // namespace zsl
