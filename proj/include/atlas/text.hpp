#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace atlas {

// Unicode NFC normalization (ICU). Total: invalid UTF-8 bytes are replaced
// with U+FFFD rather than raising.
std::string nfc(std::string_view s);

// Locale-independent simple lowercase, code point by code point.
std::string lower_utf8(std::string_view s);

// Lookup key folding for gazetteer aliases: NFD, strip combining marks,
// lowercase, collapse whitespace, trim. "München" and "munchen" collide.
std::string fold_key(std::string_view s);

std::string collapse_whitespace(std::string_view s);

std::string_view trim(std::string_view s);

// Whitespace split, empty tokens dropped.
std::vector<std::string> split_ws(std::string_view s);

std::vector<std::string> split_on(std::string_view s, char sep);

// Word tokens for scoring: whitespace split, then leading/trailing
// punctuation trimmed from each token (internal hyphens/apostrophes kept).
std::vector<std::string> word_tokens(std::string_view s);

bool starts_with_icase(std::string_view s, std::string_view prefix);

}  // namespace atlas
