#include "zsl/pipeline.hpp"

#include <algorithm>

#include "zsl/error.hpp"
#include "zsl/io.hpp"

namespace zsl {

namespace {

bool needs_corpus(const Cue& c) {
  return c.kind == CueKind::Bow || c.kind == CueKind::Mbow1 || c.kind == CueKind::Mbow2 || c.kind == CueKind::Mbow3;
}

bool needs_words(const Cue& c) {
  return c.kind == CueKind::Word2vecClass || c.kind == CueKind::Nad1 || c.kind == CueKind::Nad2 ||
         c.kind == CueKind::Nad3;
}

bool needs_attributes(const Cue& c) {
  return c.kind == CueKind::Attributes || c.kind == CueKind::Nad1 || c.kind == CueKind::Nad2 ||
         c.kind == CueKind::Nad3;
}

template <typename T>
const T& require(const std::optional<T>& x, const Cue& cue, const char* what) {
  if (!x) throw ConfigError("cue '" + cue.name() + "' needs " + what);
  return *x;
}

const std::string& article_of(const ClassId& c, const std::map<ClassId, std::string>& corpus) {
  auto it = corpus.find(c);
  if (it == corpus.end()) throw LookupError("no article for class '" + c + "'");
  return it->second;
}

std::vector<LanguagePart> single_modality(const std::vector<Vector>& vectors, const std::string& modality) {
  std::vector<LanguagePart> parts(vectors.size());
  for (std::size_t j = 0; j < vectors.size(); ++j) parts[j].tokens[modality] = vectors[j];
  return parts;
}

}  // namespace

std::vector<LanguagePart> cue_parts(const Cue& cue, const ClassId& c, const LanguageSources& src) {
  const std::string mod = cue.modality();
  switch (cue.kind) {
    case CueKind::Attributes: {
      const auto& t = require(src.attributes, cue, "an attribute table");
      const Vector row = t.strengths.row(static_cast<Eigen::Index>(t.row_of(c))).transpose() / 100.0;
      return single_modality({row}, mod);
    }
    case CueKind::Word2vecClass:
      return single_modality({phrase_vector(c, require(src.word_vectors, cue, "word vectors"))}, mod);
    case CueKind::Nad1:
      return {nad1(c, require(src.attributes, cue, "an attribute table"),
                   require(src.word_vectors, cue, "word vectors"), mod)};
    case CueKind::Nad2:
      return nad2(c, require(src.attributes, cue, "an attribute table"),
                  require(src.word_vectors, cue, "word vectors"), static_cast<std::size_t>(cue.param), mod);
    case CueKind::Nad3:
      return nad3(c, require(src.attributes, cue, "an attribute table"),
                  require(src.word_vectors, cue, "word vectors"), cue.param, mod);
    case CueKind::Bow:
    case CueKind::Mbow1:
    case CueKind::Mbow2:
    case CueKind::Mbow3: {
      const auto& corpus = require(src.corpus, cue, "a corpus directory");
      const auto& vocab = require(src.vocabulary, cue, "a vocabulary");
      MbowSpec spec;
      if (cue.kind == CueKind::Mbow2) {
        spec.mode = MbowMode::Paragraphs;
        spec.groups = static_cast<std::size_t>(cue.param);
      } else if (cue.kind == CueKind::Mbow3) {
        spec.mode = MbowMode::Sections;
      }
      return single_modality(mbow(Article::parse(article_of(c, corpus)), spec, vocab), mod);
    }
  }
  throw ConfigError("unhandled cue");
}

std::map<ClassId, LanguagePartSet> assemble_language_parts(const std::vector<Cue>& cues, CombineMode mode,
                                                           const std::set<ClassId>& classes,
                                                           const LanguageSources& given, std::size_t bow_min_df,
                                                           double bow_max_df_fraction) {
  if (cues.empty()) throw UsageError("no language cues selected");
  for (std::size_t i = 0; i < cues.size(); ++i)
    for (std::size_t j = i + 1; j < cues.size(); ++j)
      if (cues[i].modality() == cues[j].modality())
        throw UsageError("cues '" + cues[i].name() + "' and '" + cues[j].name() + "' share a modality");

  LanguageSources src = given;
  const bool bow = std::any_of(cues.begin(), cues.end(), needs_corpus);
  if (bow && !src.vocabulary && src.corpus) {
    std::vector<std::string> docs;
    for (const auto& [c, text] : *src.corpus) docs.push_back(text);
    src.vocabulary = build_vocabulary(docs, bow_min_df, bow_max_df_fraction);
  }

  std::map<ClassId, LanguagePartSet> out;
  for (const auto& c : classes) {
    LanguagePartSet set{c, {}};
    if (mode == CombineMode::Fuse) {
      LanguagePart fused;
      for (const auto& cue : cues) {
        const auto parts = cue_parts(cue, c, src);
        if (parts.size() != 1)
          throw UsageError("fuse needs single-part cues, but '" + cue.name() + "' gives " +
                           std::to_string(parts.size()) + " parts for class '" + c + "'");
        for (const auto& [m, tok] : parts.front().tokens) fused.tokens[m] = tok;
      }
      set.parts.push_back(std::move(fused));
    } else {
      for (const auto& cue : cues) {
        auto parts = cue_parts(cue, c, src);
        set.parts.insert(set.parts.end(), std::make_move_iterator(parts.begin()), std::make_move_iterator(parts.end()));
      }
    }
    out.emplace(c, std::move(set));
  }
  return out;
}

LanguageSources load_sources(const RunConfig& cfg, std::vector<std::string>* warnings) {
  LanguageSources src;
  if (std::any_of(cfg.cues.begin(), cfg.cues.end(), needs_attributes)) src.attributes = io::load_attributes(cfg.attributes);
  if (std::any_of(cfg.cues.begin(), cfg.cues.end(), needs_words))
    src.word_vectors = io::load_word_vectors(cfg.word_vectors, warnings);
  if (std::any_of(cfg.cues.begin(), cfg.cues.end(), needs_corpus)) {
    src.corpus = io::load_corpus(cfg.corpus_dir);
    std::vector<std::string> docs;
    for (const auto& [c, text] : *src.corpus) docs.push_back(text);
    src.vocabulary = build_vocabulary(docs, cfg.bow_min_df, cfg.bow_max_df_fraction);
  }
  return src;
}

Dataset load_dataset(const RunConfig& cfg, std::vector<std::string>* warnings) {
  Dataset d;
  d.split = io::load_splits(cfg.splits);
  d.images = io::load_features(cfg.features);
  std::set<ClassId> classes = d.split.train_classes;
  classes.insert(d.split.val_classes.begin(), d.split.val_classes.end());
  classes.insert(d.split.test_classes.begin(), d.split.test_classes.end());
  d.classes = assemble_language_parts(cfg.cues, cfg.combine, classes, load_sources(cfg, warnings), cfg.bow_min_df,
                                      cfg.bow_max_df_fraction);
  const auto violations = validate_dataset(d);
  if (!violations.empty()) {
    std::string msg = "dataset is invalid (" + std::to_string(violations.size()) + " violations)";
    for (std::size_t i = 0; i < std::min<std::size_t>(violations.size(), 5); ++i)
      msg += "; " + violations[i].entity + ": " + violations[i].message;
    throw DataError(msg);
  }
  return d;
}

void save_synthetic(const RunConfig& cfg, const oracle::SynthData& data, const oracle::SynthResources& res) {
  io::save_features(cfg.features, data.dataset.images);
  io::save_splits(cfg.splits, data.dataset.split);
  io::save_attributes(cfg.attributes, res.attributes);
  io::save_word_vectors(cfg.word_vectors, res.word_vectors);
  io::save_corpus(cfg.corpus_dir, res.corpus);
}

}  // namespace zsl

namespace zsl {

FitResult fit(const Dataset& d, const RunConfig& cfg) {
  FitResult out;
  out.chosen = cfg.train;
  if (cfg.grid_enabled) {
    out.grid = validate_grid(d, cfg.grid, cfg.train);
    out.chosen = out.grid->best;
  }
  if (cfg.refit_with_val && !d.split.val_classes.empty()) {
    std::set<ClassId> classes = d.split.train_classes;
    classes.insert(d.split.val_classes.begin(), d.split.val_classes.end());
    out.report = train(d, out.chosen, classes);
  } else {
    out.report = train(d, out.chosen);
  }
  return out;
}

std::string part_mode_name(PartMode mode) { return mode == PartMode::FirstPart ? "test_vp1" : "test_vp_all"; }

io::ReportRows evaluate_rows(const Dataset& d, const ModelParams& m, const RunConfig& cfg) {
  io::ReportRows rows;
  for (PartMode mode : cfg.eval_part_modes) {
    EvalOptions opts;
    opts.part_mode = mode;
    opts.retrieval = cfg.retrieval;
    rows.emplace_back(part_mode_name(mode), evaluate(d, m, opts));
  }
  return rows;
}

}  // namespace zsl
