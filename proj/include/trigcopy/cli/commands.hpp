#pragma once

#include "trigcopy/cli/run_config.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace trigcopy {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

/// Entry point of the command-line tool; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err,
            const EnvLookup& env = [](const char* name) { return std::getenv(name); });

/// One REPL line: `record [|| trigger]`, `:quit`, or blank.
struct Turn {
  enum class Kind { kEmpty, kQuit, kRecord } kind = Kind::kEmpty;
  std::string record;
  std::string trigger;
};
Turn parse_turn(std::string_view line);

/// A record in the dataset's own line format, without references. For
/// webnlg and custom, `@LABEL rest` stands for `LABEL<TAB>rest`.
DataSample parse_record(std::string_view text, DatasetFormat format, const IntentSet& known_intents);

/// Lowercased single trigger token; empty text means no trigger. Throws
/// std::invalid_argument for multi-token triggers.
std::string normalize_trigger(std::string_view text);

}  // namespace trigcopy
