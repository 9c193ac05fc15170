#pragma once

#include "trigcopy/data/sample.hpp"
#include "trigcopy/data/vocabulary.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace trigcopy {

enum class DatasetFormat { kE2e, kWebNlg, kCustom };

DatasetFormat parse_format(std::string_view name);
std::string_view format_name(DatasetFormat format);

inline constexpr std::size_t kMaxE2eFields = 8;
inline constexpr std::size_t kMaxWebNlgTriples = 7;
inline constexpr std::string_view kReferenceSeparator = "|||";

struct FieldValue {
  std::string field;
  std::string value;
};

/// Splits `field[value], field[value]` on top-level commas; values may contain commas.
std::vector<FieldValue> parse_field_list(std::string_view text, std::size_t line = 0);

/// E2E meaning representation plus (possibly empty) reference. Multi-token
/// values repeat their field name at each aligned position; intent is the dummy I0.
DataSample parse_e2e(std::string_view mr, std::string_view reference, std::size_t line = 0);

/// Normalized WebNLG line: `category \t pred[subject | object], ... \t ref ||| ref [\t trigger]`.
DataSample parse_webnlg(std::string_view record, std::size_t line = 0);

/// Custom line: `INTENT \t Field[value], ... \t ref ||| ref [\t trigger]`.
DataSample parse_custom(std::string_view record, const IntentSet& known_intents, std::size_t line = 0);

/// Inverse of parse_custom for any sample (consecutive equal fields are merged).
std::string serialize_custom(const DataSample& sample);

/// Intents of the custom messaging dataset.
const std::vector<std::string>& default_custom_intents();

/// RFC-4180 style rows (quoted fields, doubled quotes, embedded newlines).
std::vector<std::vector<std::string>> read_csv(std::istream& in);
std::string csv_escape(std::string_view field);

/// `mr,ref` CSV with header; one sample per row.
std::vector<DataSample> read_e2e(std::istream& in);
/// Writes one `mr,ref` row per reference.
void write_e2e(std::ostream& out, const std::vector<DataSample>& samples);

std::vector<DataSample> read_webnlg(std::istream& in);
std::vector<DataSample> read_custom(std::istream& in, const IntentSet& known_intents);
void write_lines(std::ostream& out, const std::vector<DataSample>& samples);

/// Reads any format from a file. Custom intents default to default_custom_intents().
std::vector<DataSample> read_dataset(const std::filesystem::path& path, DatasetFormat format,
                                     const IntentSet* known_intents = nullptr);

/// Normalized WebNLG lines (one per entry) from a WebNLG XML release file.
/// Each line is validated; ParseError line numbers count entries.
std::vector<std::string> webnlg_xml_lines(std::istream& in);
std::vector<DataSample> read_webnlg_xml(std::istream& in);

}  // namespace trigcopy
