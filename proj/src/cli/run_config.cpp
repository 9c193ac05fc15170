#include "trigcopy/cli/run_config.hpp"

#include "trigcopy/data/tokenizer.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace trigcopy {
namespace {

const std::vector<std::string> kModelKeys = {
    "field_embedding", "intent_embedding", "word_embedding", "encoder_hidden", "attention_depth",
    "decoder_hidden",  "readout",          "maxout_pool",    "dropout",        "init_bound",
    "use_bilstm",      "use_pretrained_embeddings",          "attention",      "use_copy",
    "use_intent",      "beam_width"};

const std::vector<std::string> kDataPathKeys = {"train", "validation", "test", "embeddings"};
const std::vector<std::string> kArtifactPathKeys = {"checkpoint", "history", "cache_dir"};

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k = {
        {"preset", "M7", "ablation row M1..M7 or M4' supplying model defaults"},
        {"format", "e2e", "dataset format: e2e, webnlg or custom"},
        {"train", "", "training split"},
        {"validation", "", "validation split"},
        {"test", "", "test split"},
        {"embeddings", "", "pretrained word vectors (text format)"},
        {"data_dir", "", "root for relative dataset paths (env TRIGCOPY_DATA_DIR)"},
        {"ckpt_dir", "", "root for relative checkpoint paths (env TRIGCOPY_CKPT_DIR)"},
        {"checkpoint", "model.ckpt", "checkpoint file"},
        {"history", "", "training history file (default: checkpoint + .history.jsonl)"},
        {"output", "", "report / curve / converted data output (default: stdout)"},
        {"records", "", "per-sample evaluation records output (JSON lines)"},
        {"csv", "", "comma-separated report table output"},
        {"precision", "float", "float or double"},
        {"batch_size", "64", "training batch size"},
        {"epochs", "18", "maximum epochs"},
        {"learning_rate", "0.001", "Adam learning rate"},
        {"train_dropout", "auto", "dropout during training: auto (custom data only), true, false"},
        {"seed", "1", "seed for every random component"},
        {"trigger_ratio", "0", "fraction r_K of training samples given a trigger"},
        {"stop_below", "", "stop once the training loss falls below this value"},
        {"max_len", "60", "maximum generated tokens"},
        {"top_k", "3", "hypotheses printed by generate and repl"},
        {"max_source_length", "64", "maximum field/value pairs accepted by generate and repl"},
        {"trigger_mode", "as-is", "eval triggers: as-is, none (0K) or all (+K)"},
        {"grid", "0,0.25,0.5,0.75,1", "sweep ratios"},
        {"weight", "50", "sweep heuristic weight w in [0, 100]"},
        {"metric", "bleu", "sweep metric: bleu, rouge_l or meteor"},
        {"seeds", "", "sweep seeds, comma separated (default: seed)"},
        {"bisect", "false", "refine the sweep once around the coarse peak"},
        {"cache_dir", "sweep-cache", "sweep checkpoint cache"},
        {"from", "", "convert: input format (e2e, webnlg, custom, webnlg-xml)"},
        {"input", "", "convert: input file; generate: record text"},
        {"trigger", "", "generate: trigger word"},
    };
    for (const auto& m : kModelKeys) k.push_back({m, "", "model setting (overrides the preset)"});
    return k;
  }();
  return keys;
}

RunConfig::RunConfig(const EnvLookup& env) {
  for (const auto& k : config_keys()) {
    values_[k.name] = k.default_value;
    sources_[k.name] = "default";
  }
  if (const char* v = env("TRIGCOPY_DATA_DIR"); v && *v) set("data_dir", v, "env");
  if (const char* v = env("TRIGCOPY_CKPT_DIR"); v && *v) set("ckpt_dir", v, "env");
}

void RunConfig::set(const std::string& key, const std::string& value, const std::string& source) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown configuration key '" + key + "' (" + source + ")");
  it->second = value;
  sources_[key] = source;
}

void RunConfig::load(std::istream& in, const std::string& origin) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    const std::string where = origin + ":" + std::to_string(number);
    if (eq == std::string_view::npos) throw UsageError(where + ": expected 'key = value'");
    const std::string key(trim(text.substr(0, eq)));
    if (key.empty()) throw UsageError(where + ": empty key");
    set(key, std::string(trim(text.substr(eq + 1))), where);
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path.string() + "'");
  load(in, path.string());
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown configuration key '" + key + "'");
  return it->second;
}

const std::string& RunConfig::source(const std::string& key) const {
  const auto it = sources_.find(key);
  if (it == sources_.end()) throw UsageError("unknown configuration key '" + key + "'");
  return it->second;
}

long long RunConfig::get_int(const std::string& key) const {
  const auto& v = get(key);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw UsageError(key + ": expected an integer, got '" + v + "'");
  return out;
}

double RunConfig::get_double(const std::string& key) const {
  const auto& v = get(key);
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) throw UsageError(key + ": expected a number, got '" + v + "'");
  return out;
}

bool RunConfig::get_bool(const std::string& key) const {
  const auto v = to_lower(get(key));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw UsageError(key + ": expected true or false, got '" + get(key) + "'");
}

std::filesystem::path RunConfig::get_path(const std::string& key) const {
  std::filesystem::path p = get(key);
  if (p.empty() || p.is_absolute()) return p;
  auto in = [&](const std::vector<std::string>& keys) { return std::find(keys.begin(), keys.end(), key) != keys.end(); };
  if (in(kDataPathKeys) && is_set("data_dir")) return std::filesystem::path(get("data_dir")) / p;
  if (in(kArtifactPathKeys) && is_set("ckpt_dir")) return std::filesystem::path(get("ckpt_dir")) / p;
  return p;
}

DatasetFormat RunConfig::format() const {
  try {
    return parse_format(get("format"));
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

ModelConfig RunConfig::model_config() const {
  ModelConfig c;
  try {
    c = model_preset(get("preset"));
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  auto index = [&](const char* key, Index& field) {
    if (is_set(key)) field = static_cast<Index>(get_int(key));
  };
  auto flag = [&](const char* key, bool& field) {
    if (is_set(key)) field = get_bool(key);
  };
  index("field_embedding", c.field_embedding);
  index("intent_embedding", c.intent_embedding);
  index("word_embedding", c.word_embedding);
  index("encoder_hidden", c.encoder_hidden);
  index("attention_depth", c.attention_depth);
  index("decoder_hidden", c.decoder_hidden);
  index("readout", c.readout);
  index("maxout_pool", c.maxout_pool);
  index("beam_width", c.beam_width);
  if (is_set("dropout")) c.dropout = get_double("dropout");
  if (is_set("init_bound")) c.init_bound = get_double("init_bound");
  flag("use_bilstm", c.use_bilstm);
  flag("use_pretrained_embeddings", c.use_pretrained_embeddings);
  flag("use_copy", c.use_copy);
  flag("use_intent", c.use_intent);
  try {
    if (is_set("attention")) c.attention = parse_attention(get("attention"));
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t = default_train_config(format() == DatasetFormat::kCustom);
  t.batch_size = static_cast<Index>(get_int("batch_size"));
  t.epochs = static_cast<Index>(get_int("epochs"));
  t.learning_rate = get_double("learning_rate");
  t.seed = static_cast<std::uint64_t>(get_int("seed"));
  t.trigger_ratio = get_double("trigger_ratio");
  if (get("train_dropout") != "auto") t.dropout = get_bool("train_dropout");
  if (is_set("stop_below")) t.stop_below = get_double("stop_below");
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return t;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const std::string t(trim(item));
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size()) throw UsageError(key + ": bad list entry '" + t + "'");
    out.push_back(v);
  }
  return out;
}

SweepConfig RunConfig::sweep_config() const {
  SweepConfig s;
  s.grid = parse_number_list(get("grid"), "grid");
  s.weight = get_double("weight");
  try {
    s.metric = parse_metric(get("metric"));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  s.model = model_config();
  s.train = train_config();
  s.seeds.clear();
  if (is_set("seeds")) {
    for (double v : parse_number_list(get("seeds"), "seeds")) s.seeds.push_back(static_cast<std::uint64_t>(v));
  } else {
    s.seeds.push_back(s.train.seed);
  }
  s.bisect = get_bool("bisect");
  if (is_set("cache_dir")) s.cache_dir = get_path("cache_dir");
  s.embeddings = get_path("embeddings");
  s.max_len = static_cast<Index>(get_int("max_len"));
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return s;
}

bool RunConfig::use_float() const {
  const auto& p = get("precision");
  if (p == "float") return true;
  if (p == "double") return false;
  throw UsageError("precision: expected float or double, got '" + p + "'");
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : values_) j[k] = v;
  return j;
}

}  // namespace trigcopy
