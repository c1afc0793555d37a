#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace atlas {

// One normalized social-media record.
struct Post {
  std::string id;
  std::string text;
  std::int64_t created_at = 0;  // Unix seconds, UTC
  std::vector<std::string> hashtags;  // normalized: lowercase, no '#', no spaces; sorted, unique
  std::optional<std::string> raw_location;
  std::optional<std::string> user_occupation;
  std::optional<bool> user_verified;
  std::string lang;
};

struct CorpusFilter {
  std::set<std::string> hashtag_whitelist;  // normalized tags
  std::int64_t date_start = 0;              // inclusive
  std::int64_t date_end = 0;                // inclusive
  std::set<std::string> lang_whitelist;     // lowercase primary subtags

  // Throws ConfigError if the whitelists are empty or the range is inverted.
  void validate() const;

  bool matches_hashtags(const Post& p) const;
  bool matches_date(const Post& p) const;
  bool matches_lang(const Post& p) const;
};

struct CorpusStats {
  std::size_t total_posts = 0;
  std::map<std::string, std::size_t> posts_per_month;  // "YYYY-MM" -> count
  std::map<std::string, std::size_t> filtered_out;     // reason -> count
};

struct IngestResult {
  std::vector<Post> posts;
  CorpusStats stats;
};

// Rejection reasons, counted in CorpusStats::filtered_out.
inline constexpr const char* kReasonParseError = "parse_error";
inline constexpr const char* kReasonFilteredHashtag = "filtered_hashtag";
inline constexpr const char* kReasonFilteredDate = "filtered_date";
inline constexpr const char* kReasonFilteredLang = "filtered_lang";
inline constexpr const char* kReasonDuplicateId = "duplicate_id";

// Lowercase, strip '#', drop internal whitespace: "#AI ethics" -> "aiethics".
std::string normalize_hashtag(std::string_view tag);

// Lowercase BCP-47 primary subtag: "en-US" -> "en".
std::string lang_primary_subtag(std::string_view lang);

// Removes URLs, @-mentions and leading RT markers, strips '#' from hashtag
// words (keeping the word), collapses whitespace, applies Unicode NFC.
// Total and idempotent.
std::string normalize_text(std::string_view text);

// Reads line-delimited JSON posts, emitting filtered/validated Posts in
// input order. Malformed lines are counted, never fatal. Throws DataError
// only if the stream itself is unreadable.
IngestResult ingest(std::istream& stream, const CorpusFilter& filter);

// Per-calendar-month UTC counts over already-validated posts.
CorpusStats monthly_counts(const std::vector<Post>& posts);

// Canonical corpus JSONL round-trip.
std::string post_to_json_line(const Post& p);
void write_corpus(const std::vector<Post>& posts, std::ostream& out);
std::vector<Post> read_corpus(std::istream& in);

}  // namespace atlas
