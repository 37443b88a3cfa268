#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "zsl/core.hpp"
#include "zsl/langparts.hpp"
#include "zsl/metrics.hpp"
#include "zsl/trainer.hpp"

namespace zsl::io {

namespace fs = std::filesystem;

inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::uint32_t kModelVersion = 1;

// Feature file, all integers little-endian u32:
//   "ZSLF" version image_count parts_per_image feature_dim
//   per image: len image_id len class_id, then parts*dim f32 row-major.
std::string encode_features(const std::vector<LabeledImage>& images);
std::vector<LabeledImage> decode_features(const std::string& bytes);
void save_features(const fs::path& path, const std::vector<LabeledImage>& images);
std::vector<LabeledImage> load_features(const fs::path& path);

// Model file: "ZSLM" version embed_dim visual_dim modality_count, then per
// modality (len id, u32 dim, f64 matrix row-major), lang_bias,
// vis_proj row-major, vis_bias, all f64.
std::string encode_model(const ModelParams& m);
ModelParams decode_model(const std::string& bytes);
void save_model(const fs::path& path, const ModelParams& m);
ModelParams load_model(const fs::path& path);

// CSV: header row (first cell names the class column, then attribute
// names), one row per class. Fields may be double-quoted.
AttributeTable parse_attributes(const std::string& text);
AttributeTable load_attributes(const fs::path& path);
std::string format_attributes(const AttributeTable& t);
void save_attributes(const fs::path& path, const AttributeTable& t);

// One "token v1 ... vd" entry per line; an optional first line "count dim".
// Duplicate tokens: last wins, and a warning is appended to `warnings`.
WordVectorTable parse_word_vectors(const std::string& text, std::vector<std::string>* warnings = nullptr);
WordVectorTable load_word_vectors(const fs::path& path, std::vector<std::string>* warnings = nullptr);
void save_word_vectors(const fs::path& path, const WordVectorTable& w);

// Lines "<train|val|test> <class_id>", '#' comments.
ZeroShotSplit parse_splits(const std::string& text);
ZeroShotSplit load_splits(const fs::path& path);
void save_splits(const fs::path& path, const ZeroShotSplit& s);

// One "<class_id>.txt" article per class.
std::map<ClassId, std::string> load_corpus(const fs::path& dir);
void save_corpus(const fs::path& dir, const std::map<ClassId, std::string>& articles);

// "term<TAB>doc_freq" per line.
void save_vocabulary(const fs::path& path, const Vocabulary& v);
Vocabulary load_vocabulary(const fs::path& path);

// "class_id<TAB>part<TAB>modality<TAB>v1 v2 ..." per token.
void save_language_parts(const fs::path& path, const std::map<ClassId, LanguagePartSet>& parts);
std::map<ClassId, LanguagePartSet> load_language_parts(const fs::path& path);

// Reports keyed by row label (e.g. "test_vp1").
using ReportRows = std::vector<std::pair<std::string, MetricReport>>;

// Aligned-column text table.
std::string format_report_table(const ReportRows& rows);
// "row.metric = value" lines with fixed precision.
std::string format_report_kv(const ReportRows& rows);
ReportRows parse_report_kv(const std::string& text);

// One line per epoch.
std::string format_train_log(const TrainReport& r);
// "key = value" summary of a training run.
std::string format_train_summary(const TrainReport& r, const TrainConfig& cfg);

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, const std::string& bytes);

}  // namespace zsl::io
