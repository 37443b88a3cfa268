#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "zsl/config.hpp"
#include "zsl/core.hpp"
#include "zsl/io.hpp"
#include "zsl/langparts.hpp"
#include "zsl/oracle.hpp"

namespace zsl {

// Inputs the language cues draw from; only those a cue needs must be set.
struct LanguageSources {
  std::optional<AttributeTable> attributes;
  std::optional<WordVectorTable> word_vectors;
  std::optional<std::map<ClassId, std::string>> corpus;
  std::optional<Vocabulary> vocabulary;
};

// Parts of one cue for one class.
std::vector<LanguagePart> cue_parts(const Cue& cue, const ClassId& c, const LanguageSources& src);

// Builds every class's language parts from the selected cues, in cue order.
// Fuse merges single-part cues into one multi-modality part; union
// concatenates all parts. Throws UsageError when fuse meets a multi-part
// cue or a cue is listed twice.
std::map<ClassId, LanguagePartSet> assemble_language_parts(const std::vector<Cue>& cues, CombineMode mode,
                                                           const std::set<ClassId>& classes,
                                                           const LanguageSources& src, std::size_t bow_min_df = 2,
                                                           double bow_max_df_fraction = 0.5);

// Loads what the configured cues need. The vocabulary is rebuilt from the
// corpus when a bag-of-words cue is selected.
LanguageSources load_sources(const RunConfig& cfg, std::vector<std::string>* warnings = nullptr);

Dataset load_dataset(const RunConfig& cfg, std::vector<std::string>* warnings = nullptr);

// Writes features, splits, attributes, word vectors and corpus to the
// configured paths.
void save_synthetic(const RunConfig& cfg, const oracle::SynthData& data, const oracle::SynthResources& res);

struct FitResult {
  std::optional<GridResult> grid;  // set when grid validation ran
  TrainConfig chosen;
  TrainReport report;
};

// Grid validation when enabled, then the final fit: on train + val when
// refit_with_val is set, otherwise the chosen grid point's own run.
FitResult fit(const Dataset& d, const RunConfig& cfg);

// One report row per configured part mode over the test classes.
io::ReportRows evaluate_rows(const Dataset& d, const ModelParams& m, const RunConfig& cfg);

std::string part_mode_name(PartMode mode);

}  // namespace zsl
