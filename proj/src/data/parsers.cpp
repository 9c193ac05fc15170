#include "trigcopy/data/parsers.hpp"

#include "trigcopy/data/tokenizer.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace trigcopy {
namespace {

std::vector<std::string_view> split(std::string_view text, std::string_view separator) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(separator, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + separator.size();
  }
}

void append_aligned(DataSample& sample, const std::string& field, const TokenSequence& value_tokens) {
  for (const auto& token : value_tokens) {
    sample.fields.push_back(field);
    sample.values.push_back(token);
  }
}

std::vector<TokenSequence> parse_references(std::string_view text, std::size_t line) {
  std::vector<TokenSequence> refs;
  if (trim(text).empty()) return refs;
  for (auto part : split(text, kReferenceSeparator)) {
    auto tokens = tokenize(part);
    if (tokens.empty()) throw ParseError("empty reference", line);
    refs.push_back(std::move(tokens));
  }
  return refs;
}

std::string parse_trigger(std::string_view text, std::size_t line) {
  const auto tokens = tokenize(text);
  if (tokens.empty()) return std::string(Vocabulary::kSosToken);
  if (tokens.size() != 1) throw ParseError("trigger must be a single token", line);
  return tokens.front();
}

// Tab-separated columns; a trailing '\r' from CRLF files is dropped.
std::vector<std::string_view> columns(std::string_view record) {
  if (!record.empty() && record.back() == '\r') record.remove_suffix(1);
  return split(record, "\t");
}

std::string decode_xml_entities(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '&') {
      out.push_back(text[i]);
      continue;
    }
    const std::size_t end = text.find(';', i);
    if (end == std::string_view::npos) {
      out.push_back('&');
      continue;
    }
    const auto entity = text.substr(i + 1, end - i - 1);
    if (entity == "amp") out += '&';
    else if (entity == "lt") out += '<';
    else if (entity == "gt") out += '>';
    else if (entity == "quot") out += '"';
    else if (entity == "apos") out += '\'';
    else out += std::string(text.substr(i, end - i + 1));
    i = end;
  }
  return out;
}

std::string entity_surface(std::string_view text) {
  std::string out = decode_xml_entities(trim(text));
  for (char& c : out) {
    if (c == '_') c = ' ';
  }
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

}  // namespace

DatasetFormat parse_format(std::string_view name) {
  const std::string lower = to_lower(name);
  if (lower == "e2e") return DatasetFormat::kE2e;
  if (lower == "webnlg") return DatasetFormat::kWebNlg;
  if (lower == "custom") return DatasetFormat::kCustom;
  throw std::invalid_argument("unknown dataset format '" + std::string(name) + "' (expected e2e, webnlg or custom)");
}

std::string_view format_name(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::kE2e: return "e2e";
    case DatasetFormat::kWebNlg: return "webnlg";
    case DatasetFormat::kCustom: return "custom";
  }
  return "unknown";
}

std::vector<FieldValue> parse_field_list(std::string_view text, std::size_t line) {
  std::vector<FieldValue> items;
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  };
  skip_space();
  if (pos == text.size()) throw ParseError("empty field list", line);
  while (pos < text.size()) {
    const std::size_t open = text.find('[', pos);
    if (open == std::string_view::npos) {
      throw ParseError("expected field[value] near '" + std::string(text.substr(pos)) + "'", line);
    }
    const auto name = trim(text.substr(pos, open - pos));
    if (name.empty() || name.find(',') != std::string_view::npos || name.find(']') != std::string_view::npos) {
      throw ParseError("malformed field name '" + std::string(name) + "'", line);
    }
    int depth = 1;
    std::size_t close = open + 1;
    for (; close < text.size() && depth > 0; ++close) {
      if (text[close] == '[') ++depth;
      if (text[close] == ']') --depth;
    }
    if (depth != 0) throw ParseError("unterminated value for field '" + std::string(name) + "'", line);
    items.push_back({std::string(name), std::string(trim(text.substr(open + 1, close - open - 2)))});
    pos = close;
    skip_space();
    if (pos < text.size()) {
      if (text[pos] != ',') throw ParseError("expected ',' between attributes", line);
      ++pos;
      skip_space();
      if (pos == text.size()) throw ParseError("trailing ',' in field list", line);
    }
  }
  return items;
}

DataSample parse_e2e(std::string_view mr, std::string_view reference, std::size_t line) {
  DataSample sample;
  const auto items = parse_field_list(mr, line);
  if (items.size() > kMaxE2eFields) {
    throw ParseError("E2E record has " + std::to_string(items.size()) + " attributes (max 8)", line);
  }
  for (const auto& item : items) {
    const auto tokens = tokenize(item.value);
    if (tokens.empty()) throw ParseError("empty value for field '" + item.field + "'", line);
    append_aligned(sample, normalize_field_name(item.field), tokens);
  }
  auto ref = tokenize(reference);
  if (!ref.empty()) sample.references.push_back(std::move(ref));
  return sample;
}

DataSample parse_webnlg(std::string_view record, std::size_t line) {
  const auto cols = columns(record);
  if (cols.size() < 2 || trim(cols[0]).empty()) throw ParseError("WebNLG record without category", line);
  if (cols.size() > 4) throw ParseError("too many columns in WebNLG record", line);
  DataSample sample;
  sample.intent = std::string(trim(cols[0]));
  const auto triples = parse_field_list(cols[1], line);
  if (triples.size() > kMaxWebNlgTriples) {
    throw ParseError("WebNLG record has " + std::to_string(triples.size()) + " triples (max 7)", line);
  }
  for (const auto& triple : triples) {
    const auto ends = split(triple.value, "|");
    if (ends.size() != 2) throw ParseError("triple '" + triple.field + "' needs 'subject | object'", line);
    const std::string predicate = normalize_field_name(triple.field);
    for (auto end : ends) {
      const auto tokens = tokenize(end);
      if (tokens.empty()) throw ParseError("empty triple argument for '" + triple.field + "'", line);
      append_aligned(sample, predicate, tokens);
    }
  }
  if (cols.size() >= 3) sample.references = parse_references(cols[2], line);
  if (cols.size() == 4) sample.trigger = parse_trigger(cols[3], line);
  return sample;
}

DataSample parse_custom(std::string_view record, const IntentSet& known_intents, std::size_t line) {
  const auto cols = columns(record);
  if (cols.size() < 2) throw ParseError("custom record needs intent and field list", line);
  if (cols.size() > 4) throw ParseError("too many columns in custom record", line);
  DataSample sample;
  sample.intent = std::string(trim(cols[0]));
  if (!known_intents.contains(sample.intent) || sample.intent == IntentSet::kUnknownLabel) {
    throw ParseError("unknown intent '" + sample.intent + "'; known intents: " + known_intents.describe(), line);
  }
  if (trim(cols[1]).empty()) throw ParseError("record has no field/value pairs", line);
  for (const auto& item : parse_field_list(cols[1], line)) {
    const auto tokens = tokenize(item.value);
    if (tokens.empty()) throw ParseError("empty value for field '" + item.field + "'", line);
    append_aligned(sample, normalize_field_name(item.field), tokens);
  }
  if (cols.size() >= 3) sample.references = parse_references(cols[2], line);
  if (cols.size() == 4) sample.trigger = parse_trigger(cols[3], line);
  return sample;
}

std::string serialize_custom(const DataSample& sample) {
  std::string out = sample.intent + "\t";
  for (std::size_t i = 0; i < sample.fields.size();) {
    std::size_t j = i;
    TokenSequence group;
    while (j < sample.fields.size() && sample.fields[j] == sample.fields[i]) group.push_back(sample.values[j++]);
    if (i > 0) out += ", ";
    out += sample.fields[i] + "[" + join_tokens(group) + "]";
    i = j;
  }
  out += "\t";
  for (std::size_t r = 0; r < sample.references.size(); ++r) {
    if (r > 0) out += " " + std::string(kReferenceSeparator) + " ";
    out += join_tokens(sample.references[r]);
  }
  if (sample.has_trigger()) out += "\t" + sample.trigger;
  return out;
}

const std::vector<std::string>& default_custom_intents() {
  static const std::vector<std::string> intents = {"CONTACT::ACT",  "CONTACT::SHARE",  "LOCATION::SHARE",
                                                   "CALENDAR::ACT", "CALENDAR::SHARE", "OCCASION::SHARE"};
  return intents;
}

std::vector<std::vector<std::string>> read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get(c);
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field", rows.size() + 1);
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<DataSample> read_e2e(std::istream& in) {
  const auto rows = read_csv(in);
  std::vector<DataSample> samples;
  if (rows.empty()) return samples;
  std::size_t mr_col = 0, ref_col = 1;
  std::size_t first = 0;
  if (!rows[0].empty() && to_lower(trim(rows[0][0])) == "mr") {
    first = 1;
    for (std::size_t c = 0; c < rows[0].size(); ++c) {
      const auto name = to_lower(trim(rows[0][c]));
      if (name == "mr") mr_col = c;
      if (name == "ref") ref_col = c;
    }
  }
  for (std::size_t r = first; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() == 1 && trim(row[0]).empty()) continue;
    if (row.size() <= mr_col) throw ParseError("missing mr column", r + 1);
    const std::string_view ref = ref_col < row.size() ? std::string_view(row[ref_col]) : std::string_view();
    samples.push_back(parse_e2e(row[mr_col], ref, r + 1));
  }
  return samples;
}

void write_e2e(std::ostream& out, const std::vector<DataSample>& samples) {
  out << "mr,ref\n";
  for (const auto& s : samples) {
    std::string mr;
    for (std::size_t i = 0; i < s.fields.size();) {
      std::size_t j = i;
      TokenSequence group;
      while (j < s.fields.size() && s.fields[j] == s.fields[i]) group.push_back(s.values[j++]);
      if (i > 0) mr += ", ";
      mr += s.fields[i] + "[" + join_tokens(group) + "]";
      i = j;
    }
    if (s.references.empty()) out << csv_escape(mr) << ",\n";
    for (const auto& ref : s.references) out << csv_escape(mr) << "," << csv_escape(join_tokens(ref)) << "\n";
  }
}

std::vector<DataSample> read_webnlg(std::istream& in) {
  std::vector<DataSample> samples;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    samples.push_back(parse_webnlg(line, n));
  }
  return samples;
}

std::vector<DataSample> read_custom(std::istream& in, const IntentSet& known_intents) {
  std::vector<DataSample> samples;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    samples.push_back(parse_custom(line, known_intents, n));
  }
  return samples;
}

void write_lines(std::ostream& out, const std::vector<DataSample>& samples) {
  for (const auto& s : samples) out << serialize_custom(s) << "\n";
}

std::vector<DataSample> read_dataset(const std::filesystem::path& path, DatasetFormat format,
                                     const IntentSet* known_intents) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file " + path.string());
  switch (format) {
    case DatasetFormat::kE2e: return read_e2e(in);
    case DatasetFormat::kWebNlg: return read_webnlg(in);
    case DatasetFormat::kCustom: {
      if (known_intents) return read_custom(in, *known_intents);
      const IntentSet defaults(default_custom_intents());
      return read_custom(in, defaults);
    }
  }
  return {};
}

std::vector<std::string> webnlg_xml_lines(std::istream& in) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string xml = buffer.str();

  auto attribute = [](std::string_view tag, std::string_view name) -> std::string {
    const std::string key = std::string(name) + "=\"";
    const auto pos = tag.find(key);
    if (pos == std::string_view::npos) return {};
    const auto end = tag.find('"', pos + key.size());
    return std::string(tag.substr(pos + key.size(), end - pos - key.size()));
  };
  auto inner_texts = [](std::string_view body, std::string_view element) {
    std::vector<std::string_view> texts;
    const std::string open = "<" + std::string(element);
    const std::string close = "</" + std::string(element) + ">";
    std::size_t pos = 0;
    while ((pos = body.find(open, pos)) != std::string_view::npos) {
      const char next = pos + open.size() < body.size() ? body[pos + open.size()] : '\0';
      if (next != '>' && next != ' ') {
        pos += open.size();
        continue;
      }
      const auto start = body.find('>', pos) + 1;
      const auto end = body.find(close, start);
      if (end == std::string_view::npos) break;
      texts.push_back(body.substr(start, end - start));
      pos = end + close.size();
    }
    return texts;
  };

  std::vector<std::string> lines;
  std::size_t pos = 0;
  while ((pos = xml.find("<entry", pos)) != std::string::npos) {
    const auto tag_end = xml.find('>', pos);
    const auto end = xml.find("</entry>", tag_end);
    if (tag_end == std::string::npos || end == std::string::npos) throw ParseError("unterminated <entry>", 0);
    const std::string_view tag(xml.data() + pos, tag_end - pos);
    const std::string_view body(xml.data() + tag_end + 1, end - tag_end - 1);
    pos = end;

    const std::string category = attribute(tag, "category");
    if (category.empty()) throw ParseError("WebNLG entry without category", 0);
    std::string record = category + "\t";
    bool first = true;
    for (auto triple : inner_texts(body, "mtriple")) {
      const auto parts = split(triple, " | ");
      if (parts.size() != 3) throw ParseError("malformed mtriple '" + std::string(triple) + "'", 0);
      if (!first) record += ", ";
      std::string predicate = entity_surface(parts[1]);
      for (char& c : predicate) {
        if (c == ' ') c = '_';
      }
      record += predicate + "[" + entity_surface(parts[0]) + " | " + entity_surface(parts[2]) + "]";
      first = false;
    }
    record += "\t";
    bool first_ref = true;
    for (auto lex : inner_texts(body, "lex")) {
      const auto nested = inner_texts(lex, "text");
      std::string text = decode_xml_entities(nested.empty() ? lex : nested.front());
      for (char& c : text) {
        if (c == '\t' || c == '\n') c = ' ';
      }
      if (trim(text).empty()) continue;
      if (!first_ref) record += " " + std::string(kReferenceSeparator) + " ";
      record += text;
      first_ref = false;
    }
    parse_webnlg(record, lines.size() + 1);
    lines.push_back(std::move(record));
  }
  return lines;
}

std::vector<DataSample> read_webnlg_xml(std::istream& in) {
  std::vector<DataSample> samples;
  for (const auto& line : webnlg_xml_lines(in)) samples.push_back(parse_webnlg(line, samples.size() + 1));
  return samples;
}

}  // namespace trigcopy
