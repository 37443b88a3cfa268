#include "zsl/config.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "zsl/error.hpp"
#include "zsl/io.hpp"

namespace zsl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig kv;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(n) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(n) + ": empty key");
    kv.values_[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValueConfig KeyValueConfig::load(const fs::path& path) {
  KeyValueConfig kv = parse(io::read_file(path));
  kv.base_dir = path.parent_path();
  return kv;
}

void KeyValueConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw UsageError("override '" + assignment + "' is not key=value");
  const std::string key = trim(assignment.substr(0, eq));
  if (key.empty()) throw UsageError("override '" + assignment + "' has an empty key");
  values_[key] = trim(assignment.substr(eq + 1));
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

Cue Cue::parse(const std::string& raw) {
  const std::string text = trim(raw);
  std::string name = text;
  std::optional<double> arg;
  if (auto open = text.find('('); open != std::string::npos) {
    if (text.back() != ')') throw ConfigError("malformed cue '" + text + "'");
    name = trim(text.substr(0, open));
    const std::string inner = trim(text.substr(open + 1, text.size() - open - 2));
    char* end = nullptr;
    const double v = std::strtod(inner.c_str(), &end);
    if (inner.empty() || end != inner.c_str() + inner.size() || !std::isfinite(v))
      throw ConfigError("cue '" + text + "' has a non-numeric argument");
    arg = v;
  }
  static const std::map<std::string, CueKind> kinds = {
      {"attributes", CueKind::Attributes}, {"word2vec-class", CueKind::Word2vecClass}, {"bow", CueKind::Bow},
      {"nad1", CueKind::Nad1},             {"nad2", CueKind::Nad2},                    {"nad3", CueKind::Nad3},
      {"mbow1", CueKind::Mbow1},           {"mbow2", CueKind::Mbow2},                  {"mbow3", CueKind::Mbow3}};
  auto it = kinds.find(name);
  if (it == kinds.end()) throw ConfigError("unknown language cue '" + name + "'");
  Cue cue{it->second, 0.0};
  const bool takes_arg = cue.kind == CueKind::Nad2 || cue.kind == CueKind::Nad3 || cue.kind == CueKind::Mbow2;
  if (takes_arg && !arg) throw ConfigError("cue '" + name + "' needs an argument, e.g. " + name + "(3)");
  if (!takes_arg && arg) throw ConfigError("cue '" + name + "' takes no argument");
  if (arg) cue.param = *arg;
  if ((cue.kind == CueKind::Nad2 || cue.kind == CueKind::Mbow2) &&
      (cue.param < 1 || cue.param != std::floor(cue.param)))
    throw ConfigError("cue '" + text + "' needs a positive integer argument");
  return cue;
}

std::string Cue::name() const {
  auto num = [this] {
    std::ostringstream ss;
    ss << param;
    return ss.str();
  };
  switch (kind) {
    case CueKind::Attributes: return "attributes";
    case CueKind::Word2vecClass: return "word2vec-class";
    case CueKind::Bow: return "bow";
    case CueKind::Nad1: return "nad1";
    case CueKind::Nad2: return "nad2(" + num() + ")";
    case CueKind::Nad3: return "nad3(" + num() + ")";
    case CueKind::Mbow1: return "mbow1";
    case CueKind::Mbow2: return "mbow2(" + num() + ")";
    case CueKind::Mbow3: return "mbow3";
  }
  return "?";
}

std::string Cue::modality() const {
  switch (kind) {
    case CueKind::Attributes: return "attributes";
    case CueKind::Word2vecClass: return "word2vec";
    case CueKind::Bow: return "bow";
    case CueKind::Nad1: return "nad1";
    case CueKind::Nad2: return "nad2";
    case CueKind::Nad3: return "nad3";
    case CueKind::Mbow1: return "mbow1";
    case CueKind::Mbow2: return "mbow2";
    case CueKind::Mbow3: return "mbow3";
  }
  return "?";
}

const std::vector<std::pair<std::string, std::string>>& config_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"features", "binary feature file (ZSLF)"},
      {"attributes", "class x attribute CSV"},
      {"word_vectors", "word vector text table"},
      {"corpus_dir", "directory of <class_id>.txt articles"},
      {"splits", "zero-shot split file"},
      {"vocab", "vocabulary output of build-vocab"},
      {"parts", "language part output of build-parts"},
      {"model", "model file (ZSLM)"},
      {"train_log", "per-epoch training log"},
      {"train_summary", "training summary (key = value)"},
      {"report", "metric report (key = value)"},
      {"report_table", "metric report (aligned text)"},
      {"cues", "comma list: attributes, word2vec-class, bow, nad1, nad2(n), nad3(t), mbow1, mbow2(P), mbow3"},
      {"combine", "fuse | union"},
      {"bow.min_df", "minimum document frequency"},
      {"bow.max_df_fraction", "maximum document frequency as a corpus fraction"},
      {"train.batch_size", "minibatch size"},
      {"train.momentum", "SGD momentum"},
      {"train.epochs", "passes over the training images"},
      {"train.learning_rate", "SGD step size"},
      {"train.embed_dim", "joint embedding dimension"},
      {"train.deterministic", "omit wall-clock from reports"},
      {"loss.margin_delta", "ranking margin"},
      {"loss.reg_alpha", "L2 weight on projections"},
      {"loss.rank_beta", "weight of the ranking penalty"},
      {"loss.full_universe_negatives", "rank against all training classes"},
      {"grid.enabled", "validate hyperparameters on the val split"},
      {"grid.margin_delta", "comma list"},
      {"grid.learning_rate", "comma list"},
      {"grid.embed_dim", "comma list"},
      {"grid.refit_with_val", "refit the chosen config on train + val"},
      {"eval.part_modes", "comma list of vp1 | all"},
      {"eval.retrieval", "labels_per_image | images_per_label"},
      {"synth.n_train_classes", ""},
      {"synth.n_val_classes", ""},
      {"synth.n_test_classes", ""},
      {"synth.parts_per_image", ""},
      {"synth.visual_dim", ""},
      {"synth.token_dim", ""},
      {"synth.images_per_class", ""},
      {"synth.code_bits", ""},
      {"synth.bits_per_part", ""},
      {"synth.noise_sigma", ""},
      {"gradcheck.instances", "random instances to check"},
      {"gradcheck.h", "central-difference step"},
      {"gradcheck.tolerance", "maximum relative error"},
      {"seed", "seed for every random choice"},
  };
  return keys;
}

namespace {

struct Reader {
  const KeyValueConfig& kv;

  [[noreturn]] void bad(const std::string& key, const std::string& value, const char* want) const {
    throw ConfigError("config key '" + key + "': '" + value + "' is not " + want);
  }
  void path(const char* key, fs::path& out) const {
    if (auto v = kv.get(key)) {
      fs::path p(*v);
      out = p.is_absolute() || kv.base_dir.empty() ? p : kv.base_dir / p;
    } else if (!kv.base_dir.empty() && out.is_relative()) {
      out = kv.base_dir / out;
    }
  }
  double to_double(const std::string& key, const std::string& v) const {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x)) bad(key, v, "a number");
    return x;
  }
  std::uint64_t to_count(const std::string& key, const std::string& v) const {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) bad(key, v, "a non-negative integer");
    return std::stoull(v);
  }
  void number(const char* key, double& out) const {
    if (auto v = kv.get(key)) out = to_double(key, *v);
  }
  template <typename T>
  void count(const char* key, T& out) const {
    if (auto v = kv.get(key)) out = static_cast<T>(to_count(key, *v));
  }
  void flag(const char* key, bool& out) const {
    if (auto v = kv.get(key)) {
      if (*v == "true" || *v == "1" || *v == "yes") out = true;
      else if (*v == "false" || *v == "0" || *v == "no") out = false;
      else bad(key, *v, "a boolean");
    }
  }
};

}  // namespace

RunConfig run_config_from(const KeyValueConfig& kv) {
  std::set<std::string> known;
  for (const auto& [k, desc] : config_keys()) known.insert(k);
  for (const auto& [k, v] : kv.values())
    if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");

  RunConfig cfg;
  const Reader r{kv};
  r.path("features", cfg.features);
  r.path("attributes", cfg.attributes);
  r.path("word_vectors", cfg.word_vectors);
  r.path("corpus_dir", cfg.corpus_dir);
  r.path("splits", cfg.splits);
  r.path("vocab", cfg.vocab);
  r.path("parts", cfg.parts);
  r.path("model", cfg.model);
  r.path("train_log", cfg.train_log);
  r.path("train_summary", cfg.train_summary);
  r.path("report", cfg.report);
  r.path("report_table", cfg.report_table);

  if (auto v = kv.get("cues")) {
    cfg.cues.clear();
    for (const auto& item : split_list(*v)) cfg.cues.push_back(Cue::parse(item));
    if (cfg.cues.empty()) throw ConfigError("config key 'cues' is empty");
  }
  if (auto v = kv.get("combine")) {
    if (*v == "fuse") cfg.combine = CombineMode::Fuse;
    else if (*v == "union") cfg.combine = CombineMode::Union;
    else r.bad("combine", *v, "fuse or union");
  }
  r.count("bow.min_df", cfg.bow_min_df);
  r.number("bow.max_df_fraction", cfg.bow_max_df_fraction);

  r.count("seed", cfg.seed);
  cfg.train.seed = cfg.seed;
  cfg.synth.seed = cfg.seed;
  r.count("train.batch_size", cfg.train.batch_size);
  r.number("train.momentum", cfg.train.momentum);
  r.count("train.epochs", cfg.train.epochs);
  r.number("train.learning_rate", cfg.train.learning_rate);
  r.count("train.embed_dim", cfg.train.embed_dim);
  r.flag("train.deterministic", cfg.train.deterministic);
  r.number("loss.margin_delta", cfg.train.loss.margin_delta);
  r.number("loss.reg_alpha", cfg.train.loss.reg_alpha);
  r.number("loss.rank_beta", cfg.train.loss.rank_beta);
  r.flag("loss.full_universe_negatives", cfg.train.loss.full_universe_negatives);

  r.flag("grid.enabled", cfg.grid_enabled);
  r.flag("grid.refit_with_val", cfg.refit_with_val);
  if (auto v = kv.get("grid.margin_delta")) {
    cfg.grid.margin_delta.clear();
    for (const auto& x : split_list(*v)) cfg.grid.margin_delta.push_back(r.to_double("grid.margin_delta", x));
  }
  if (auto v = kv.get("grid.learning_rate")) {
    cfg.grid.learning_rate.clear();
    for (const auto& x : split_list(*v)) cfg.grid.learning_rate.push_back(r.to_double("grid.learning_rate", x));
  }
  if (auto v = kv.get("grid.embed_dim")) {
    cfg.grid.embed_dim.clear();
    for (const auto& x : split_list(*v)) cfg.grid.embed_dim.push_back(r.to_count("grid.embed_dim", x));
  }

  if (auto v = kv.get("eval.part_modes")) {
    cfg.eval_part_modes.clear();
    for (const auto& x : split_list(*v)) {
      if (x == "vp1") cfg.eval_part_modes.push_back(PartMode::FirstPart);
      else if (x == "all") cfg.eval_part_modes.push_back(PartMode::AllParts);
      else r.bad("eval.part_modes", x, "vp1 or all");
    }
    if (cfg.eval_part_modes.empty()) throw ConfigError("config key 'eval.part_modes' is empty");
  }
  if (auto v = kv.get("eval.retrieval")) {
    if (*v == "labels_per_image") cfg.retrieval = RetrievalDirection::LabelsPerImage;
    else if (*v == "images_per_label") cfg.retrieval = RetrievalDirection::ImagesPerLabel;
    else r.bad("eval.retrieval", *v, "labels_per_image or images_per_label");
  }

  r.count("synth.n_train_classes", cfg.synth.n_train_classes);
  r.count("synth.n_val_classes", cfg.synth.n_val_classes);
  r.count("synth.n_test_classes", cfg.synth.n_test_classes);
  r.count("synth.parts_per_image", cfg.synth.parts_per_image);
  r.count("synth.visual_dim", cfg.synth.visual_dim);
  r.count("synth.token_dim", cfg.synth.token_dim);
  r.count("synth.images_per_class", cfg.synth.images_per_class);
  r.count("synth.code_bits", cfg.synth.code_bits);
  r.count("synth.bits_per_part", cfg.synth.bits_per_part);
  r.number("synth.noise_sigma", cfg.synth.noise_sigma);

  r.count("gradcheck.instances", cfg.gradcheck_instances);
  r.number("gradcheck.h", cfg.gradcheck_h);
  r.number("gradcheck.tolerance", cfg.gradcheck_tolerance);
  return cfg;
}

}  // namespace zsl
