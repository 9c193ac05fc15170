#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace trigcopy {

/// Lowercases ASCII, splits on whitespace and emits every ASCII punctuation
/// character except '_' as its own token. Digits and non-ASCII bytes stay
/// inside words. Idempotent: tokenize(join(tokenize(s))) == tokenize(s).
std::vector<std::string> tokenize(std::string_view text);

std::string join_tokens(const std::vector<std::string>& tokens, std::string_view separator = " ");

/// Field names become one token: tokenized, then joined with '_'.
std::string normalize_field_name(std::string_view name);

std::string to_lower(std::string_view text);
std::string_view trim(std::string_view text);

}  // namespace trigcopy
