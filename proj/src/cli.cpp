#include "zsl/cli.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include "zsl/config.hpp"
#include "zsl/error.hpp"
#include "zsl/io.hpp"
#include "zsl/oracle.hpp"
#include "zsl/pipeline.hpp"

namespace zsl {

namespace {

struct CommonArgs {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
};

RunConfig resolve(const CommonArgs& a) {
  KeyValueConfig kv;
  if (!a.config.empty()) kv = KeyValueConfig::load(a.config);
  for (const auto& s : a.sets) kv.apply_override(s);
  if (a.seed) kv.set("seed", std::to_string(*a.seed));
  return run_config_from(kv);
}

std::string fixed(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

int cmd_synth(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const auto data = oracle::generate(cfg.synth);
  const auto res = oracle::make_resources(data, cfg.synth.seed);
  save_synthetic(cfg, data, res);
  out << "wrote " << data.dataset.images.size() << " images of " << data.dataset.classes.size() << " classes to "
      << cfg.features.string() << "\n";
  return 0;
}

int cmd_build_vocab(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  std::vector<std::string> docs;
  for (const auto& [c, text] : io::load_corpus(cfg.corpus_dir)) docs.push_back(text);
  const auto vocab = build_vocabulary(docs, cfg.bow_min_df, cfg.bow_max_df_fraction);
  io::save_vocabulary(cfg.vocab, vocab);
  out << "vocabulary of " << vocab.size() << " terms from " << docs.size() << " articles written to "
      << cfg.vocab.string() << "\n";
  return 0;
}

int cmd_build_parts(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  const auto split = io::load_splits(cfg.splits);
  std::set<ClassId> classes = split.train_classes;
  classes.insert(split.val_classes.begin(), split.val_classes.end());
  classes.insert(split.test_classes.begin(), split.test_classes.end());
  const auto parts = assemble_language_parts(cfg.cues, cfg.combine, classes, load_sources(cfg, &warnings),
                                             cfg.bow_min_df, cfg.bow_max_df_fraction);
  print_warnings(warnings, err);
  io::save_language_parts(cfg.parts, parts);
  std::size_t total = 0;
  for (const auto& [c, set] : parts) total += set.parts.size();
  out << "language parts for " << parts.size() << " classes (" << total << " parts) written to "
      << cfg.parts.string() << "\n";
  return 0;
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  const Dataset d = load_dataset(cfg, &warnings);
  print_warnings(warnings, err);
  const FitResult fitted = fit(d, cfg);
  if (fitted.grid) {
    for (const auto& p : fitted.grid->points)
      out << "grid margin=" << p.config.loss.margin_delta << " lr=" << p.config.learning_rate
          << " dim=" << p.config.embed_dim << " val_top1=" << fixed(p.val_top1) << "\n";
  }
  io::save_model(cfg.model, fitted.report.params);
  io::write_file(cfg.train_log, io::format_train_log(fitted.report));
  io::write_file(cfg.train_summary, io::format_train_summary(fitted.report, fitted.chosen));
  out << "chosen margin=" << fitted.chosen.loss.margin_delta << " lr=" << fitted.chosen.learning_rate
      << " dim=" << fitted.chosen.embed_dim << "\n";
  out << "final objective " << fixed(fitted.report.epoch_objective.back()) << "; model written to "
      << cfg.model.string() << "\n";
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  const Dataset d = load_dataset(cfg, &warnings);
  print_warnings(warnings, err);
  const ModelParams m = io::load_model(cfg.model);
  const auto rows = evaluate_rows(d, m, cfg);
  io::write_file(cfg.report, io::format_report_kv(rows));
  const std::string table = io::format_report_table(rows);
  io::write_file(cfg.report_table, table);
  out << table;
  return 0;
}

int cmd_gradcheck(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const auto start = std::chrono::steady_clock::now();
  std::size_t failed = 0;
  for (std::size_t i = 0; i < cfg.gradcheck_instances; ++i) {
    const auto inst = oracle::random_gradcheck_instance(cfg.seed * 1000003ull + i);
    const auto r = oracle::check_gradient(inst.batch, inst.dataset, inst.params, inst.loss, cfg.gradcheck_h,
                                          cfg.gradcheck_tolerance);
    if (!r.passed) ++failed;
    char buf[256];
    std::snprintf(buf, sizeof buf, "instance %zu: %s max_rel_error=%.3e checked=%zu skipped=%zu worst=%s\n", i,
                  r.passed ? "pass" : "FAIL", r.max_rel_error, r.checked, r.skipped, r.worst_coordinate.c_str());
    out << buf;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out << (failed == 0 ? "gradcheck passed" : "gradcheck failed") << " (" << failed << " of "
      << cfg.gradcheck_instances << " instances failed, " << fixed(secs, 2) << " s)\n";
  return failed == 0 ? 0 : 1;
}

int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  out << io::format_report_table(io::parse_report_kv(io::read_file(cfg.report)));
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-part zero-shot embedding: synthetic data, training, evaluation"};
  app.name("zsl");
  app.require_subcommand(1);

  using Handler = std::function<int(const RunConfig&, std::ostream&, std::ostream&)>;
  const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
      {"synth", "generate a synthetic dataset and write every input file", cmd_synth},
      {"build-vocab", "build the bag-of-words vocabulary from the corpus", cmd_build_vocab},
      {"build-parts", "assemble language parts for the selected cues", cmd_build_parts},
      {"train", "grid-validate and train a model", cmd_train},
      {"evaluate", "score the test classes and write the metric report", cmd_evaluate},
      {"gradcheck", "compare analytic and finite-difference gradients", cmd_gradcheck},
      {"report", "print a saved metric report as a table", cmd_report},
  };

  CommonArgs common;
  std::map<CLI::App*, Handler> handlers;
  for (const auto& [name, help, handler] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", common.config, "key = value configuration file");
    sub->add_option("--set", common.sets, "override one key, e.g. --set loss.margin_delta=1.0")->allow_extra_args(false);
    sub->add_option("--seed", common.seed, "seed for every random choice");
    handlers[sub] = handler;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    return handlers.at(chosen)(resolve(common), out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  } catch (...) {
    err << "internal error\n";
    return 2;
  }
}

}  // namespace zsl
