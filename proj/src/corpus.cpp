#include "atlas/corpus.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "atlas/errors.hpp"
#include "atlas/text.hpp"
#include "atlas/timeutil.hpp"

namespace atlas {

void CorpusFilter::validate() const {
  if (hashtag_whitelist.empty()) {
    throw ConfigError("filter: hashtag whitelist must not be empty");
  }
  if (lang_whitelist.empty()) {
    throw ConfigError("filter: language whitelist must not be empty");
  }
  if (date_start > date_end) {
    throw ConfigError("filter: date_start is after date_end");
  }
}

bool CorpusFilter::matches_hashtags(const Post& p) const {
  return std::any_of(p.hashtags.begin(), p.hashtags.end(),
                     [this](const std::string& t) {
                       return hashtag_whitelist.count(t) > 0;
                     });
}

bool CorpusFilter::matches_date(const Post& p) const {
  return p.created_at >= date_start && p.created_at <= date_end;
}

bool CorpusFilter::matches_lang(const Post& p) const {
  return lang_whitelist.count(lang_primary_subtag(p.lang)) > 0;
}

std::string normalize_hashtag(std::string_view tag) {
  std::string lowered = lower_utf8(tag);
  std::string out;
  out.reserve(lowered.size());
  for (char c : lowered) {
    if (c == '#' || c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
    out.push_back(c);
  }
  return out;
}

std::string lang_primary_subtag(std::string_view lang) {
  std::string lowered = lower_utf8(lang);
  std::size_t dash = lowered.find('-');
  if (dash == std::string::npos) dash = lowered.find('_');
  if (dash != std::string::npos) lowered.resize(dash);
  return lowered;
}

namespace {

bool is_url_token(const std::string& t) {
  return starts_with_icase(t, "http://") || starts_with_icase(t, "https://") ||
         starts_with_icase(t, "www.");
}

}  // namespace

std::string normalize_text(std::string_view text) {
  std::string composed = nfc(text);
  std::vector<std::string> tokens = split_ws(composed);

  // '#' stripping happens before the other checks so that a second pass sees
  // exactly the tokens a first pass kept (idempotence).
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  for (std::string& t : tokens) {
    std::size_t h = 0;
    while (h < t.size() && t[h] == '#') ++h;
    if (h == t.size()) continue;
    std::string word = h > 0 ? t.substr(h) : std::move(t);
    if (kept.empty() && word == "RT") continue;  // retweet marker(s)
    if (word[0] == '@') continue;
    if (is_url_token(word)) continue;
    kept.push_back(std::move(word));
  }

  std::string out;
  for (const std::string& t : kept) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

namespace {

using nlohmann::json;

// Schema check for one input line. Returns nullopt on any violation, which
// the caller counts as parse_error.
std::optional<Post> parse_post_line(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;

  if (!j.contains("id") || !j["id"].is_string()) return std::nullopt;
  if (!j.contains("text") || !j["text"].is_string()) return std::nullopt;
  if (!j.contains("created_at") || !j["created_at"].is_string()) {
    return std::nullopt;
  }
  if (!j.contains("hashtags") || !j["hashtags"].is_array()) return std::nullopt;
  if (!j.contains("lang") || !j["lang"].is_string()) return std::nullopt;

  Post p;
  p.id = j["id"].get<std::string>();
  if (p.id.empty()) return std::nullopt;
  p.text = j["text"].get<std::string>();
  auto ts = parse_timestamp(j["created_at"].get<std::string>());
  if (!ts) return std::nullopt;
  p.created_at = *ts;
  for (const auto& tag : j["hashtags"]) {
    if (!tag.is_string()) return std::nullopt;
    std::string norm = normalize_hashtag(tag.get<std::string>());
    if (!norm.empty()) p.hashtags.push_back(std::move(norm));
  }
  std::sort(p.hashtags.begin(), p.hashtags.end());
  p.hashtags.erase(std::unique(p.hashtags.begin(), p.hashtags.end()),
                   p.hashtags.end());
  p.lang = j["lang"].get<std::string>();

  if (j.contains("user_location") && j["user_location"].is_string()) {
    p.raw_location = j["user_location"].get<std::string>();
  }
  if (j.contains("user_occupation") && j["user_occupation"].is_string()) {
    p.user_occupation = j["user_occupation"].get<std::string>();
  }
  if (j.contains("user_verified") && j["user_verified"].is_boolean()) {
    p.user_verified = j["user_verified"].get<bool>();
  }
  return p;
}

}  // namespace

IngestResult ingest(std::istream& stream, const CorpusFilter& filter) {
  filter.validate();
  if (stream.bad()) throw DataError("ingest: unreadable input stream");

  IngestResult result;
  std::unordered_set<std::string> emitted_ids;
  std::string line;
  while (std::getline(stream, line)) {
    if (trim(line).empty()) continue;

    std::optional<Post> post = parse_post_line(line);
    if (!post) {
      result.stats.filtered_out[kReasonParseError] += 1;
      continue;
    }
    if (!filter.matches_hashtags(*post)) {
      result.stats.filtered_out[kReasonFilteredHashtag] += 1;
      continue;
    }
    if (!filter.matches_date(*post)) {
      result.stats.filtered_out[kReasonFilteredDate] += 1;
      continue;
    }
    if (!filter.matches_lang(*post)) {
      result.stats.filtered_out[kReasonFilteredLang] += 1;
      continue;
    }
    if (!emitted_ids.insert(post->id).second) {
      result.stats.filtered_out[kReasonDuplicateId] += 1;
      continue;
    }
    result.stats.total_posts += 1;
    result.stats.posts_per_month[month_key(post->created_at)] += 1;
    result.posts.push_back(std::move(*post));
  }
  if (stream.bad()) throw DataError("ingest: read error on input stream");
  return result;
}

CorpusStats monthly_counts(const std::vector<Post>& posts) {
  CorpusStats stats;
  stats.total_posts = posts.size();
  for (const Post& p : posts) {
    stats.posts_per_month[month_key(p.created_at)] += 1;
  }
  return stats;
}

std::string post_to_json_line(const Post& p) {
  nlohmann::json j;
  j["id"] = p.id;
  j["text"] = p.text;
  j["created_at"] = format_timestamp(p.created_at);
  j["hashtags"] = p.hashtags;
  j["user_location"] =
      p.raw_location ? nlohmann::json(*p.raw_location) : nlohmann::json();
  j["user_occupation"] = p.user_occupation ? nlohmann::json(*p.user_occupation)
                                           : nlohmann::json();
  j["user_verified"] =
      p.user_verified ? nlohmann::json(*p.user_verified) : nlohmann::json();
  j["lang"] = p.lang;
  return j.dump();
}

void write_corpus(const std::vector<Post>& posts, std::ostream& out) {
  for (const Post& p : posts) {
    out << post_to_json_line(p) << '\n';
  }
}

std::vector<Post> read_corpus(std::istream& in) {
  std::vector<Post> posts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::optional<Post> p = parse_post_line(line);
    if (!p) {
      throw DataError("corpus file: malformed record at line " +
                      std::to_string(lineno));
    }
    posts.push_back(std::move(*p));
  }
  return posts;
}

}  // namespace atlas
