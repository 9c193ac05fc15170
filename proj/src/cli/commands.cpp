#include "trigcopy/cli/commands.hpp"

#include "trigcopy/data/tokenizer.hpp"
#include "trigcopy/data/triggers.hpp"
#include "trigcopy/decoding/decode.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>

namespace trigcopy {
namespace {

class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::filesystem::path require_file(const RunConfig& cfg, const std::string& key) {
  if (!cfg.is_set(key)) throw UsageError("missing --" + key);
  auto path = cfg.get_path(key);
  if (!std::filesystem::exists(path)) throw UsageError(key + " file '" + path.string() + "' does not exist");
  return path;
}

IntentSet known_intents_for(DatasetFormat format, const IntentSet* model_intents = nullptr) {
  IntentSet known;
  if (format == DatasetFormat::kCustom) {
    for (const auto& label : default_custom_intents()) known.add(label);
  }
  if (model_intents) {
    for (const auto& label : model_intents->labels()) {
      if (label != IntentSet::kUnknownLabel) known.add(label);
    }
  }
  return known;
}

std::vector<DataSample> load_split(const RunConfig& cfg, const std::string& key, const IntentSet* intents = nullptr) {
  const auto path = require_file(cfg, key);
  const auto known = known_intents_for(cfg.format(), intents);
  return read_dataset(path, cfg.format(), &known);
}

// Writes to the named file, or to `fallback` when the key is unset.
template <typename Fn>
void emit(const RunConfig& cfg, const std::string& key, std::ostream& fallback, Fn&& write) {
  if (!cfg.is_set(key)) {
    write(fallback);
    return;
  }
  const auto path = cfg.get_path(key);
  std::ofstream file(path);
  if (!file) throw RuntimeFailure("cannot write '" + path.string() + "'");
  write(file);
}

std::filesystem::path history_path(const RunConfig& cfg) {
  if (cfg.is_set("history")) return cfg.get_path("history");
  auto p = cfg.get_path("checkpoint");
  p += ".history.jsonl";
  return p;
}

template <typename Scalar>
Checkpoint<Scalar> open_checkpoint(const RunConfig& cfg) {
  const auto path = require_file(cfg, "checkpoint");
  return load_checkpoint<Scalar>(path);
}

std::string detokenize(const TokenSequence& tokens) { return join_tokens(tokens); }

template <typename Scalar>
int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto model_config = cfg.model_config();
  const auto train_config = cfg.train_config();
  const auto train_set = load_split(cfg, "train");
  const auto validation_set = load_split(cfg, "validation");
  const auto embeddings = cfg.is_set("embeddings") ? require_file(cfg, "embeddings") : std::filesystem::path();
  out << "# resolved configuration\n" << cfg.dump() << std::flush;

  const auto checkpoint = cfg.get_path("checkpoint");
  if (checkpoint.has_parent_path()) std::filesystem::create_directories(checkpoint.parent_path());
  const auto history = history_path(cfg);
  std::ofstream history_file(history);
  if (!history_file) throw RuntimeFailure("cannot write '" + history.string() + "'");
  history_file << nlohmann::json{{"config", cfg.to_json()}}.dump() << '\n';

  auto model = make_model<Scalar>(model_config, train_set, train_config.seed, embeddings);
  err << "training on " << train_set.size() << " samples, |V| = " << model.vocab().size() << ", "
      << model.parameters().scalar_count() << " parameters\n";
  auto result = train(std::move(model), train_set, validation_set, train_config, [&](const EpochRecord& r) {
    write_history(history_file, {r});
    history_file.flush();
    err << "epoch " << r.epoch << "  train " << std::fixed << std::setprecision(4) << r.train_loss << "  validation "
        << r.validation_loss << "  (" << std::setprecision(1) << r.seconds << " s)\n"
        << std::defaultfloat;
  });
  result.best.metadata.run_config = cfg.to_json();
  save_checkpoint(result.best.model, result.best.metadata, checkpoint);
  out << "checkpoint = " << checkpoint.string() << "\nhistory = " << history.string()
      << "\nbest_epoch = " << result.best.metadata.epoch
      << "\nbest_validation_loss = " << result.best.metadata.validation_loss << '\n';
  return kExitOk;
}

template <typename Scalar>
int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto ckpt = open_checkpoint<Scalar>(cfg);
  auto test = group_references(load_split(cfg, "test", &ckpt.model.intents()));
  const auto& mode = cfg.get("trigger_mode");
  if (mode == "none") test = strip_triggers(std::move(test));
  else if (mode == "all") test = trigger_all(std::move(test));
  else if (mode != "as-is") throw UsageError("trigger_mode: expected as-is, none or all, got '" + mode + "'");
  if (test.empty()) throw RuntimeFailure("test set has no records");

  const auto records = evaluate_model(ckpt.model, test, static_cast<Index>(cfg.get_int("max_len")),
                                      [&](std::size_t done, std::size_t total) {
                                        if (done % 100 == 0 || done == total) err << "decoded " << done << "/" << total << '\n';
                                      });
  const auto report = make_report(records);
  auto j = to_json(report);
  j["config"] = cfg.to_json();
  j["checkpoint_config"] = ckpt.metadata.run_config;
  emit(cfg, "output", out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
  if (cfg.is_set("records")) emit(cfg, "records", out, [&](std::ostream& o) { write_records(o, records); });
  if (cfg.is_set("csv")) emit(cfg, "csv", out, [&](std::ostream& o) { write_report_csv(o, report); });
  if (cfg.is_set("output")) {
    out << "records = " << report.records << "\nbleu = " << report.bleu << "\nrouge_l = " << report.rouge_l
        << "\nmeteor = " << report.meteor << '\n';
  }
  return kExitOk;
}

template <typename Scalar>
void print_generations(const Model<Scalar>& model, const DataSample& sample, const RunConfig& cfg, std::ostream& out) {
  const auto max_source = static_cast<std::size_t>(cfg.get_int("max_source_length"));
  if (sample.length() > max_source) {
    throw std::invalid_argument("record has " + std::to_string(sample.length()) + " source tokens (max " +
                                std::to_string(max_source) + ")");
  }
  const auto top_k = std::max<Index>(1, static_cast<Index>(cfg.get_int("top_k")));
  const auto width = std::max(model.config().beam_width, top_k);
  const auto generations = beam_decode(model, sample, width, static_cast<Index>(cfg.get_int("max_len")), top_k);
  for (std::size_t i = 0; i < generations.size(); ++i) {
    out << i + 1 << '\t' << std::fixed << std::setprecision(4) << generations[i].score << std::defaultfloat << '\t'
        << detokenize(generations[i].tokens) << '\n';
  }
}

template <typename Scalar>
int cmd_generate(const RunConfig& cfg, std::ostream& out) {
  auto ckpt = open_checkpoint<Scalar>(cfg);
  if (!cfg.is_set("input")) throw UsageError("missing --input record");
  const auto known = known_intents_for(cfg.format(), &ckpt.model.intents());
  DataSample sample;
  try {
    sample = parse_record(cfg.get("input"), cfg.format(), known);
    const auto trigger = normalize_trigger(cfg.get("trigger"));
    if (!trigger.empty()) sample.trigger = trigger;
    print_generations(ckpt.model, sample, cfg, out);
  } catch (const std::invalid_argument& e) {
    throw RuntimeFailure(std::string("input error: ") + e.what());
  }
  return kExitOk;
}

template <typename Scalar>
int cmd_repl(const RunConfig& cfg, std::istream& in, std::ostream& out, std::ostream& err) {
  auto ckpt = open_checkpoint<Scalar>(cfg);
  const auto known = known_intents_for(cfg.format(), &ckpt.model.intents());
  out << "record [|| trigger], :quit to exit\n";
  std::string line;
  while (true) {
    out << "> " << std::flush;
    if (!std::getline(in, line)) break;
    const auto turn = parse_turn(line);
    if (turn.kind == Turn::Kind::kQuit) break;
    if (turn.kind == Turn::Kind::kEmpty) continue;
    try {
      auto sample = parse_record(turn.record, cfg.format(), known);
      const auto trigger = normalize_trigger(turn.trigger);
      if (!trigger.empty()) sample.trigger = trigger;
      print_generations(ckpt.model, sample, cfg, out);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
    }
  }
  return kExitOk;
}

template <typename Scalar>
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto sweep = cfg.sweep_config();
  const auto train_set = load_split(cfg, "train");
  const auto validation_set = load_split(cfg, "validation");
  const auto test = group_references(load_split(cfg, "test"));
  err << "# resolved configuration\n" << cfg.dump();
  const auto result = run_sweep<Scalar>(sweep, train_set, validation_set, test, [&](const SweepRow& r) {
    if (r.failed) {
      err << "r_K " << r.ratio << " failed: " << r.error << '\n';
    } else {
      err << "r_K " << r.ratio << "  0K " << r.zero_k << "  +K " << r.plus_k << '\n';
    }
  });
  emit(cfg, "output", out, [&](std::ostream& o) { write_sweep_csv(o, result); });
  if (cfg.is_set("output")) {
    auto sidecar = cfg.get_path("output");
    sidecar += ".config.json";
    std::ofstream(sidecar) << nlohmann::json{{"config", cfg.to_json()}, {"best_ratio", result.best_ratio}}.dump(2)
                           << '\n';
    out << "best_ratio = " << result.best_ratio << '\n';
  }
  const bool all_failed =
      std::all_of(result.rows.begin(), result.rows.end(), [](const SweepRow& r) { return r.failed; });
  return all_failed ? kExitRuntime : kExitOk;
}

int cmd_convert(const RunConfig& cfg, std::ostream& out) {
  const auto source = cfg.is_set("from") ? cfg.get("from") : cfg.get("format");
  if (!cfg.is_set("input")) throw UsageError("missing --input file");
  const std::filesystem::path input = cfg.get("input");
  std::ifstream in(input);
  if (!in) throw UsageError("input file '" + input.string() + "' does not exist");
  if (source == "webnlg-xml" || source == "webnlg") {
    std::vector<std::string> lines;
    if (source == "webnlg-xml") {
      lines = webnlg_xml_lines(in);
    } else {
      std::string line;
      std::size_t number = 0;
      while (std::getline(in, line)) {
        ++number;
        if (trim(line).empty() || trim(line).front() == '#') continue;
        parse_webnlg(line, number);
        lines.emplace_back(trim(line));
      }
    }
    emit(cfg, "output", out, [&](std::ostream& o) {
      for (const auto& l : lines) o << l << '\n';
    });
    return kExitOk;
  }
  DatasetFormat format;
  try {
    format = parse_format(source);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto known = known_intents_for(format);
  const auto samples = format == DatasetFormat::kE2e ? read_e2e(in) : read_custom(in, known);
  emit(cfg, "output", out, [&](std::ostream& o) {
    if (format == DatasetFormat::kE2e) write_e2e(o, samples);
    else write_lines(o, samples);
  });
  return kExitOk;
}

template <typename Scalar>
int dispatch(const std::string& command, const RunConfig& cfg, std::istream& in, std::ostream& out, std::ostream& err) {
  if (command == "train") return cmd_train<Scalar>(cfg, out, err);
  if (command == "eval") return cmd_eval<Scalar>(cfg, out, err);
  if (command == "generate") return cmd_generate<Scalar>(cfg, out);
  if (command == "repl") return cmd_repl<Scalar>(cfg, in, out, err);
  if (command == "sweep") return cmd_sweep<Scalar>(cfg, out, err);
  return cmd_convert(cfg, out);
}

std::string flag_name(const std::string& key) {
  std::string f = key;
  std::replace(f.begin(), f.end(), '_', '-');
  return "--" + f;
}

}  // namespace

Turn parse_turn(std::string_view line) {
  Turn t;
  const auto text = trim(line);
  if (text.empty()) return t;
  if (text == ":quit" || text == ":q") {
    t.kind = Turn::Kind::kQuit;
    return t;
  }
  t.kind = Turn::Kind::kRecord;
  const auto bar = text.rfind("||");
  if (bar == std::string_view::npos) {
    t.record = std::string(text);
  } else {
    t.record = std::string(trim(text.substr(0, bar)));
    t.trigger = std::string(trim(text.substr(bar + 2)));
  }
  return t;
}

DataSample parse_record(std::string_view text, DatasetFormat format, const IntentSet& known_intents) {
  std::string line(trim(text));
  if (format != DatasetFormat::kE2e && !line.empty() && line.front() == '@') {
    const auto space = line.find_first_of(" \t");
    if (space == std::string::npos) throw std::invalid_argument("record needs '@LABEL field[value], ...'");
    line = line.substr(1, space - 1) + "\t" + std::string(trim(std::string_view(line).substr(space + 1)));
  }
  try {
    DataSample s;
    switch (format) {
      case DatasetFormat::kE2e: s = parse_e2e(line, ""); break;
      case DatasetFormat::kWebNlg: s = parse_webnlg(line); break;
      case DatasetFormat::kCustom: s = parse_custom(line, known_intents); break;
    }
    if (s.values.empty()) throw std::invalid_argument("record has no field/value pairs");
    return s;
  } catch (const ParseError& e) {
    throw std::invalid_argument(e.what());
  }
}

std::string normalize_trigger(std::string_view text) {
  const auto tokens = tokenize(text);
  if (tokens.empty()) return {};
  if (tokens.size() > 1) throw std::invalid_argument("trigger must be a single token, got '" + std::string(text) + "'");
  return tokens.front();
}

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err,
            const EnvLookup& env) {
  CLI::App app("Trigger-guided data-to-text generation with attention and copy", "trigcopy");
  app.require_subcommand(1);
  std::map<std::string, std::string> flags;
  std::string config_file;
  bool no_copy = false, no_intent = false, no_bilstm = false, no_pretrained = false;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"train", "train a model and write the best checkpoint"},
      {"eval", "decode a test set and report BLEU, ROUGE-L and METEOR"},
      {"generate", "generate text for one record"},
      {"repl", "interactive generation with triggers"},
      {"sweep", "trigger-ratio sweep and optimum ratio"},
      {"convert", "normalize a dataset file"}};
  for (const auto& [name, description] : commands) {
    auto* sub = app.add_subcommand(name, description);
    sub->add_option("-c,--config", config_file, "key = value configuration file");
    for (const auto& key : config_keys()) {
      sub->add_option_function<std::string>(
          flag_name(key.name), [&flags, k = key.name](const std::string& v) { flags[k] = v; }, key.help);
    }
    sub->add_flag("--no-copy", no_copy, "disable the copy mechanism");
    sub->add_flag("--no-intent", no_intent, "disable intent conditioning");
    sub->add_flag("--no-bilstm", no_bilstm, "unidirectional encoders");
    sub->add_flag("--no-pretrained", no_pretrained, "random word embeddings");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\nrun 'trigcopy <command> --help' for the options\n";
    return kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    RunConfig cfg(env);
    if (!config_file.empty()) cfg.load_file(config_file);
    for (const auto& [k, v] : flags) cfg.set(k, v, "flag");
    if (no_copy) cfg.set("use_copy", "false", "flag");
    if (no_intent) cfg.set("use_intent", "false", "flag");
    if (no_bilstm) cfg.set("use_bilstm", "false", "flag");
    if (no_pretrained) cfg.set("use_pretrained_embeddings", "false", "flag");
    // Reject bad model and training settings before any file is touched.
    static_cast<void>(cfg.model_config());
    static_cast<void>(cfg.train_config());
    return cfg.use_float() ? dispatch<float>(command, cfg, in, out, err) : dispatch<double>(command, cfg, in, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace trigcopy
