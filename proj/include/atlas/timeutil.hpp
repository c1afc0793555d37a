#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace atlas {

// ISO-8601 timestamp parsing to Unix seconds. Accepts
//   YYYY-MM-DD
//   YYYY-MM-DDTHH:MM:SS
//   YYYY-MM-DDTHH:MM:SSZ
//   YYYY-MM-DDTHH:MM:SS+HH:MM / -HH:MM
// (a space may stand in for 'T'). Timestamps without a timezone are UTC.
std::optional<std::int64_t> parse_timestamp(std::string_view iso8601);

// "YYYY-MM-DDTHH:MM:SSZ", always UTC.
std::string format_timestamp(std::int64_t unix_seconds);

// "YYYY-MM" UTC bucket key.
std::string month_key(std::int64_t unix_seconds);

int year_of(std::int64_t unix_seconds);

// month_key for (year, month), month 1-12.
std::string make_month_key(int year, int month);

// Parses "YYYY-MM" back to (year, month); nullopt if malformed.
std::optional<std::pair<int, int>> parse_month_key(std::string_view key);

}  // namespace atlas
