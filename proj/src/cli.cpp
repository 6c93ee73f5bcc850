#include "prestamo/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "prestamo/corpus.hpp"
#include "prestamo/embeddings.hpp"
#include "prestamo/error.hpp"
#include "prestamo/eval.hpp"
#include "prestamo/format.hpp"
#include "prestamo/ingest.hpp"
#include "prestamo/tune.hpp"

namespace prestamo::cli {

namespace {

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ConfigError("'" + std::string(key) + "' expects a boolean, got '" +
                    std::string(value) + "'");
}

double parse_real(std::string_view key, std::string_view value) {
  const auto v = parse_double(value);
  if (!v) {
    throw ConfigError("'" + std::string(key) + "' expects a number, got '" +
                      std::string(value) + "'");
  }
  return *v;
}

std::size_t parse_count(std::string_view key, std::string_view value) {
  const auto v = parse_int(value);
  if (!v || *v < 0) {
    throw ConfigError("'" + std::string(key) + "' expects a non-negative integer, got '" +
                      std::string(value) + "'");
  }
  return static_cast<std::size_t>(*v);
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (begin <= value.size()) {
    const auto comma = value.find(',', begin);
    const auto item = trim(value.substr(begin, comma == std::string_view::npos
                                                   ? std::string_view::npos
                                                   : comma - begin));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    begin = comma + 1;
  }
  return out;
}

std::vector<double> parse_real_list(std::string_view key, std::string_view value) {
  std::vector<double> out;
  for (const std::string& item : split_list(value)) out.push_back(parse_real(key, item));
  if (out.empty()) throw ConfigError("'" + std::string(key) + "' needs at least one value");
  return out;
}

std::string dashed(std::string_view key) {
  std::string s(key);
  for (char& c : s) {
    if (c == '_') c = '-';
  }
  return s;
}

void require_file(const std::string& path, std::string_view what) {
  if (path.empty()) throw ConfigError("no " + std::string(what) + " path configured");
  if (!std::filesystem::is_regular_file(path)) {
    throw ValidationError(std::string(what) + " file not found: " + path);
  }
}

// Overrides registered on a subcommand for every config key.
struct KeyFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

void add_key_flags(CLI::App& sub, KeyFlags& flags) {
  for (std::string_view key : config_keys()) {
    const std::string k(key);
    if (k == "ignore_other") continue;
    flags.options[k] = sub.add_option("--" + dashed(k), flags.values[k],
                                      "Overrides config key '" + k + "'");
  }
}

RunConfig load_run_config(const std::string& config_path, const KeyFlags& flags,
                          bool ignore_other_flag, std::ostream& err) {
  RunConfig config;
  std::set<std::string> from_file;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ValidationError("config file not found: " + config_path);
    for (const std::string& key : read_config(in, config)) from_file.insert(key);
  }
  for (const auto& [key, option] : flags.options) {
    if (option->count() == 0) continue;
    if (from_file.count(key) != 0) {
      err << "warning: --" << dashed(key) << " overrides '" << key
          << "' from the config file\n";
    }
    apply_config_value(config, key, flags.values.at(key));
  }
  if (ignore_other_flag) {
    if (from_file.count("ignore_other") != 0 && !config.ignore_other) {
      err << "warning: --ignore-other overrides 'ignore_other' from the config file\n";
    }
    config.ignore_other = true;
  }
  if (config.features.has(FeatureFamily::kEmbedding) && config.embeddings.empty()) {
    err << "warning: no embeddings configured; embedding features disabled\n";
    config.features.set(FeatureFamily::kEmbedding, false);
  }
  config.features.validate();
  config.training.validate();
  return config;
}

std::shared_ptr<const EmbeddingTable> load_table(const std::string& path) {
  require_file(path, "embeddings");
  return std::make_shared<const EmbeddingTable>(load_embeddings_file(path));
}

void write_output(const std::string& path, std::ostream& out,
                  const std::function<void(std::ostream&)>& writer) {
  if (path.empty() || path == "-") {
    writer(out);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ValidationError("cannot write '" + path + "'");
  writer(file);
}

int cmd_ingest(const std::vector<std::string>& feeds, const std::string& output,
               const std::string& existing, std::ostream& out, std::ostream& err) {
  std::set<std::string> ids;
  if (!existing.empty()) {
    for (const Headline& h : read_corpus_file(existing).headlines) ids.insert(h.id);
  }
  std::vector<FeedItem> items;
  std::size_t untitled = 0;
  for (const std::string& feed : feeds) {
    FeedParse parsed = feed == "-" ? parse_rss(std::cin) : parse_rss_file(feed);
    untitled += parsed.skipped_untitled;
    items.insert(items.end(), parsed.items.begin(), parsed.items.end());
  }
  const IngestResult result = items_to_corpus(items, ids);
  write_output(output, out, [&](std::ostream& os) { write_corpus(result.corpus, os); });
  err << "ingest: " << result.corpus.headlines.size() << " headlines, " << untitled
      << " untitled items skipped, " << result.duplicates << " duplicates, "
      << result.collisions.size() << " id collisions\n";
  for (const std::string& id : result.collisions) err << "  skipped existing id " << id << '\n';
  return 0;
}

int cmd_stats(const std::string& path, std::ostream& out) {
  render_stats(corpus_stats(read_corpus_file(path)), out);
  return 0;
}

int cmd_train(const RunConfig& config, std::ostream& err) {
  require_file(config.train, "training corpus");
  if (config.model.empty()) throw ConfigError("no model output path (-o or 'model')");
  const Corpus corpus = read_corpus_file(config.train);
  std::shared_ptr<const EmbeddingTable> table;
  if (config.features.has(FeatureFamily::kEmbedding)) table = load_table(config.embeddings);

  const TagAlphabet alphabet =
      config.ignore_other ? TagAlphabet::ignore_other() : TagAlphabet::full();
  const TrainResult result = train(
      corpus, config.features, table.get(), config.training, alphabet,
      [&](std::size_t it, double objective, double step) {
        err << "iter " << it << " objective " << format_double(objective) << " step "
            << format_double(step) << '\n';
      });
  save_model_file(result.model, config.model);
  err << "train: " << result.iterations << " iterations, stop="
      << optimize::status_name(result.status) << ", "
      << result.model.index.size() << " attributes\n";
  return 0;
}

int cmd_tag(const std::string& model_path, const std::string& corpus_path,
            const std::string& output, const std::string& embeddings_path,
            std::ostream& out) {
  require_file(model_path, "model");
  require_file(corpus_path, "corpus");
  const CrfModel model = load_model_file(model_path);
  std::shared_ptr<const EmbeddingTable> table;
  if (model.features.has(FeatureFamily::kEmbedding)) {
    table = load_table(embeddings_path.empty() ? model.embedding_source : embeddings_path);
  }
  const Corpus tagged = tag(model, read_corpus_file(corpus_path), table.get());
  write_output(output, out, [&](std::ostream& os) {
    write_corpus(tagged, os, SpanColumn::kPredicted);
  });
  return 0;
}

int cmd_eval(const std::string& gold_path, const std::string& pred_path,
             bool ignore_other, const std::string& format, const std::string& name,
             std::ostream& out) {
  require_file(gold_path, "gold corpus");
  require_file(pred_path, "prediction corpus");
  const Corpus gold = read_corpus_file(gold_path);
  const Corpus pred = read_corpus_file(pred_path);
  const EvalReport report =
      evaluate(gold, predictions_from_file_corpus(pred),
               ignore_other ? EvalMode::kWithoutOther : EvalMode::kWithOther);
  const std::string set_name = name.empty() ? gold_path : name;
  if (format == "tsv") {
    render_report_tsv(report, set_name, out);
  } else {
    render_report(report, set_name, out);
  }
  return 0;
}

GridSpec build_grid(const RunConfig& config) {
  GridSpec grid;
  grid.c1 = config.grid_c1;
  grid.c2 = config.grid_c2;
  grid.scaling = config.grid_scaling;
  std::vector<std::string> names = config.grid_embeddings;
  if (names.empty()) names.push_back(config.embeddings.empty() ? "none" : config.embeddings);
  for (const std::string& name : names) {
    EmbeddingChoice choice{name, nullptr};
    if (name != "none") choice.table = load_table(name);
    grid.embeddings.push_back(std::move(choice));
  }
  return grid;
}

int cmd_tune(RunConfig config, const std::string& output, std::size_t jobs,
             std::ostream& out) {
  require_file(config.train, "training corpus");
  require_file(config.dev, "development corpus");
  // Embedding use is decided per grid point.
  if (!config.grid_embeddings.empty() || !config.embeddings.empty()) {
    config.features.set(FeatureFamily::kEmbedding, true);
  }
  const GridSpec grid = build_grid(config);
  const TuneResult result = grid_search(read_corpus_file(config.train),
                                        read_corpus_file(config.dev), config.features,
                                        grid, config.training, jobs);
  if (!output.empty()) {
    write_output(output, out, [&](std::ostream& os) { render_tune_tsv(result, grid, os); });
  }
  render_tune_text(result, grid, out);
  return result.best() != nullptr ? 0 : 1;
}

int cmd_ablate(const RunConfig& config, const std::string& output, std::size_t jobs,
               std::ostream& out) {
  require_file(config.train, "training corpus");
  require_file(config.dev, "development corpus");
  std::shared_ptr<const EmbeddingTable> table;
  if (config.features.has(FeatureFamily::kEmbedding)) table = load_table(config.embeddings);
  const AblationTable result =
      ablate(read_corpus_file(config.train), read_corpus_file(config.dev), config.features,
             table.get(), config.training, jobs);
  if (!output.empty()) {
    write_output(output, out, [&](std::ostream& os) { render_ablation_tsv(result, os); });
  }
  render_ablation_text(result, out);
  return result.rows.front().failed ? 1 : 0;
}

}  // namespace

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = [] {
    std::vector<std::string_view> k = {"train", "dev", "test", "embeddings", "model",
                                       "output_dir"};
    for (FeatureFamily family : kAllFamilies) k.push_back(family_key(family));
    for (std::string_view extra :
         {"window_radius", "embedding_scaling", "c1", "c2", "delta", "period",
          "max_iterations", "lbfgs_memory", "grid_c1", "grid_c2", "grid_scaling",
          "grid_embeddings", "ignore_other"}) {
      k.push_back(extra);
    }
    return k;
  }();
  return keys;
}

void apply_config_value(RunConfig& config, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "train") config.train = value;
  else if (key == "dev") config.dev = value;
  else if (key == "test") config.test = value;
  else if (key == "embeddings") config.embeddings = value;
  else if (key == "model") config.model = value;
  else if (key == "output_dir") config.output_dir = value;
  else if (const auto family = parse_family_key(key)) {
    config.features.set(*family, parse_bool(key, value));
  } else if (key == "window_radius") {
    config.features.window_radius = static_cast<int>(parse_count(key, value));
  } else if (key == "embedding_scaling") {
    config.features.embedding_scaling = parse_real(key, value);
  } else if (key == "c1") config.training.c1 = parse_real(key, value);
  else if (key == "c2") config.training.c2 = parse_real(key, value);
  else if (key == "delta") config.training.delta = parse_real(key, value);
  else if (key == "period") config.training.period = parse_count(key, value);
  else if (key == "max_iterations") config.training.max_iterations = parse_count(key, value);
  else if (key == "lbfgs_memory") config.training.lbfgs_memory = parse_count(key, value);
  else if (key == "grid_c1") config.grid_c1 = parse_real_list(key, value);
  else if (key == "grid_c2") config.grid_c2 = parse_real_list(key, value);
  else if (key == "grid_scaling") config.grid_scaling = parse_real_list(key, value);
  else if (key == "grid_embeddings") config.grid_embeddings = split_list(value);
  else if (key == "ignore_other") config.ignore_other = parse_bool(key, value);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::vector<std::string> read_config(std::istream& in, RunConfig& config) {
  std::vector<std::string> keys;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    try {
      apply_config_value(config, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
    keys.push_back(key);
  }
  return keys;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Borrowing extraction with a linear-chain CRF", "prestamo"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  std::vector<std::string> feeds;
  std::string ingest_out;
  std::string ingest_existing;
  CLI::App* ingest = app.add_subcommand("ingest", "Convert RSS 2.0 feed files to an unannotated corpus");
  ingest->add_option("feeds", feeds, "RSS XML files ('-' reads stdin)")->required();
  ingest->add_option("-o,--output", ingest_out, "Output corpus TSV (default stdout)");
  ingest->add_option("--existing", ingest_existing, "Corpus whose headline ids must not be reused");

  std::string stats_path;
  CLI::App* stats = app.add_subcommand("stats", "Print corpus statistics");
  stats->add_option("corpus", stats_path, "Corpus TSV")->required();

  std::string train_config;
  std::string train_out;
  bool train_ignore_other = false;
  KeyFlags train_flags;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a CRF model");
  train_cmd->add_option("-c,--config", train_config, "Config file (key = value)");
  train_cmd->add_option("-o,--output", train_out, "Model output path (overrides 'model')");
  train_cmd->add_flag("--ignore-other", train_ignore_other, "Train without the OTHER label");
  add_key_flags(*train_cmd, train_flags);

  std::string tag_model;
  std::string tag_corpus;
  std::string tag_out;
  std::string tag_embeddings;
  CLI::App* tag_cmd = app.add_subcommand("tag", "Tag a corpus with a trained model");
  tag_cmd->add_option("-m,--model", tag_model, "Model file")->required();
  tag_cmd->add_option("corpus", tag_corpus, "Corpus TSV to tag")->required();
  tag_cmd->add_option("-o,--output", tag_out, "Prediction TSV (default stdout)");
  tag_cmd->add_option("--embeddings", tag_embeddings,
                      "Embedding table (default: the one recorded in the model)");

  std::string eval_gold;
  std::string eval_pred;
  std::string eval_format = "text";
  std::string eval_name;
  bool eval_ignore_other = false;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Score predictions against gold spans");
  eval_cmd->add_option("--gold", eval_gold, "Gold corpus TSV")->required();
  eval_cmd->add_option("--pred", eval_pred, "Prediction corpus TSV")->required();
  eval_cmd->add_flag("--ignore-other", eval_ignore_other, "Drop OTHER spans before scoring");
  eval_cmd->add_option("--format", eval_format, "text or tsv")
      ->check(CLI::IsMember({"text", "tsv"}));
  eval_cmd->add_option("--name", eval_name, "Set name shown in the report");

  std::string tune_config;
  std::string tune_out;
  std::size_t tune_jobs = 1;
  KeyFlags tune_flags;
  CLI::App* tune_cmd = app.add_subcommand("tune", "Grid search on the development set");
  tune_cmd->add_option("-c,--config", tune_config, "Config file (key = value)");
  tune_cmd->add_option("-o,--output", tune_out, "Result table TSV");
  tune_cmd->add_option("--jobs", tune_jobs, "Grid points trained in parallel")
      ->check(CLI::PositiveNumber);
  add_key_flags(*tune_cmd, tune_flags);

  std::string ablate_config;
  std::string ablate_out;
  std::size_t ablate_jobs = 1;
  KeyFlags ablate_flags;
  CLI::App* ablate_cmd = app.add_subcommand("ablate", "One-family-at-a-time feature ablation");
  ablate_cmd->add_option("-c,--config", ablate_config, "Config file (key = value)");
  ablate_cmd->add_option("-o,--output", ablate_out, "Ablation table TSV");
  ablate_cmd->add_option("--jobs", ablate_jobs, "Models trained in parallel")
      ->check(CLI::PositiveNumber);
  add_key_flags(*ablate_cmd, ablate_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*ingest) return cmd_ingest(feeds, ingest_out, ingest_existing, out, err);
    if (*stats) return cmd_stats(stats_path, out);
    if (*train_cmd) {
      RunConfig config = load_run_config(train_config, train_flags, train_ignore_other, err);
      if (!train_out.empty()) {
        if (!config.model.empty() && config.model != train_out) {
          err << "warning: -o overrides 'model' from the config file\n";
        }
        config.model = train_out;
      }
      return cmd_train(config, err);
    }
    if (*tag_cmd) return cmd_tag(tag_model, tag_corpus, tag_out, tag_embeddings, out);
    if (*eval_cmd) {
      return cmd_eval(eval_gold, eval_pred, eval_ignore_other, eval_format, eval_name, out);
    }
    if (*tune_cmd) {
      return cmd_tune(load_run_config(tune_config, tune_flags, false, err), tune_out,
                      tune_jobs, out);
    }
    if (*ablate_cmd) {
      return cmd_ablate(load_run_config(ablate_config, ablate_flags, false, err), ablate_out,
                        ablate_jobs, out);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ModelFormatError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace prestamo::cli
