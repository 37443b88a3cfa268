#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "zsl/metrics.hpp"
#include "zsl/oracle.hpp"
#include "zsl/trainer.hpp"

namespace zsl {

namespace fs = std::filesystem;

// Flat "key = value" configuration. '#' starts a comment; nested settings
// use dotted keys such as "loss.margin_delta".
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const fs::path& path);

  // Applies "key=value"; throws UsageError if there is no '='.
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

  // Directory relative paths are resolved against (the config file's).
  fs::path base_dir;

 private:
  std::map<std::string, std::string> values_;
};

enum class CueKind { Attributes, Word2vecClass, Bow, Nad1, Nad2, Nad3, Mbow1, Mbow2, Mbow3 };

// One language cue, e.g. "nad2(50)" or "mbow2(3)".
struct Cue {
  CueKind kind = CueKind::Attributes;
  double param = 0.0;

  static Cue parse(const std::string& text);
  std::string name() const;
  // Modality id used for the tokens this cue produces.
  std::string modality() const;
  bool operator==(const Cue&) const = default;
};

enum class CombineMode { Fuse, Union };

struct RunConfig {
  fs::path features = "data/features.zslf";
  fs::path attributes = "data/attributes.csv";
  fs::path word_vectors = "data/word_vectors.txt";
  fs::path corpus_dir = "data/corpus";
  fs::path splits = "data/splits.txt";
  fs::path vocab = "data/vocab.tsv";
  fs::path parts = "data/parts.tsv";
  fs::path model = "data/model.zslm";
  fs::path train_log = "data/train.log";
  fs::path train_summary = "data/train_summary.kv";
  fs::path report = "data/report.kv";
  fs::path report_table = "data/report.txt";

  std::vector<Cue> cues = {Cue{}};
  CombineMode combine = CombineMode::Fuse;
  std::size_t bow_min_df = 2;
  double bow_max_df_fraction = 0.5;

  TrainConfig train;
  bool grid_enabled = true;
  Grid grid;
  // After grid validation, refit the chosen configuration on train + val.
  bool refit_with_val = true;

  std::vector<PartMode> eval_part_modes = {PartMode::FirstPart, PartMode::AllParts};
  RetrievalDirection retrieval = RetrievalDirection::LabelsPerImage;

  oracle::SynthSpec synth;

  std::size_t gradcheck_instances = 20;
  double gradcheck_h = 1e-5;
  double gradcheck_tolerance = 1e-4;

  std::uint64_t seed = 7;
};

// Known keys with their meaning, for usage text.
const std::vector<std::pair<std::string, std::string>>& config_keys();

// Throws ConfigError on unknown keys or unparsable values. Relative paths
// resolve against kv.base_dir.
RunConfig run_config_from(const KeyValueConfig& kv);

}  // namespace zsl
