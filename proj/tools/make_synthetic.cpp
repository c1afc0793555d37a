// Generates the bundled synthetic corpus: a deterministic stream of posts
// about AI-ethics themes spanning 2015..2022, with a controlled share of
// records that the ingest filters must reject (wrong language, no
// whitelisted hashtag, out-of-range dates, malformed lines, duplicates).
//
// The generator uses its own splitmix64 so the byte stream is identical on
// every platform; the committed corpus file is its canonical output.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct Rng {
  std::uint64_t state;

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t below(std::uint64_t n) { return next() % n; }
  bool chance(unsigned pct) { return below(100) < pct; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }
};

struct Family {
  std::string stem;
  std::vector<std::string> suffixes;
  unsigned weight;  // percent
};

const std::vector<Family> kFamilies = {
    {"data privacy", {"law", "rules", "consent", "breach", "audit", "rights",
                      "policy", "reform"}, 56},
    {"algorithmic bias", {"hiring", "testing", "review", "claims", "scandal",
                          "report"}, 8},
    {"facial recognition", {"ban", "rollout", "lawsuit", "accuracy", "protest",
                            "moratorium"}, 8},
    {"job automation", {"risk", "wave", "impact", "forecast", "anxiety",
                        "debate"}, 7},
    {"medical diagnosis", {"tool", "trial", "approval", "adoption", "error",
                           "safety"}, 7},
    {"autonomous weapons", {"treaty", "pledge", "summit", "funding",
                            "oversight", "petition"}, 7},
    {"content moderation", {"backlash", "guidelines", "outsourcing", "burnout",
                            "transparency", "appeal"}, 7},
};

// Template halves are written so that the token adjacent to the injected
// phrase is always a stoplist word: no template n-gram can straddle the
// phrase boundary and outscore it.
const std::vector<std::string> kTemplatesHead = {
    "The debate over ", "A new report on ", "Our team keeps talking about ",
    "Regulators are eyeing the ", "Long thread on ", "Saw a panel about ",
    "Another week, another story on ", "Can we talk about ",
    "My quick take on ", "Students asked about ",
};

const std::vector<std::string> kTemplatesTail = {
    " is heating up and it feels ", " was released today and honestly it looks ",
    " at work, the outlook is ", " again, which seems ",
    " and why the current approach is ", " at the conference, came away feeling ",
    " in the news, all of it a bit ", "? The whole thing is ",
    " after reading the draft: it is ", " in class today and the mood was ",
};

const std::vector<std::string> kPositive = {
    "promising", "hopeful", "encouraging", "excellent", "beneficial",
    "fair", "transparent", "helpful", "trustworthy", "impressive",
};

const std::vector<std::string> kNegative = {
    "worrying", "harmful", "dangerous", "creepy", "unfair",
    "invasive", "alarming", "terrible", "dystopian", "reckless",
};

const std::vector<std::string> kNeutralFill = {
    "unclear", "mixed", "open", "complicated", "unresolved",
};

const std::vector<std::string> kGoodTags = {
    "#AIEthics", "aiethics", "#EthicalAI", "EthicsOfAI", "#EthicsInAI",
    "ArtificialIntelligenceEthics", "#AIEthics2",
};

const std::vector<std::string> kNoiseTags = {"#ai", "#tech", "#future", "#ml"};

const std::vector<std::string> kLocations = {
    "Berlin, Germany", "Munich", "München", "Hamburg", "London, UK",
    "Paris, France", "Toronto, Canada", "San Francisco, CA", "New York, NY",
    "Seattle, Washington", "Austin, Texas", "Boston", "Cambridge",
    "remote", "the cloud", "Earth",
};

const std::vector<std::string> kOccupations = {
    "researcher", "journalist", "engineer", "policy analyst", "student",
};

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (static_cast<unsigned char>(c) < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "\\u%04x", c);
      out += buf;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string timestamp(int year, int month, Rng& rng) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02u:%02u:%02uZ", year, month,
                static_cast<int>(1 + rng.below(28)),
                static_cast<unsigned>(rng.below(24)),
                static_cast<unsigned>(rng.below(60)),
                static_cast<unsigned>(rng.below(60)));
  return buf;
}

const Family& pick_family(Rng& rng) {
  unsigned roll = static_cast<unsigned>(rng.below(100));
  for (const Family& f : kFamilies) {
    if (roll < f.weight) return f;
    roll -= f.weight;
  }
  return kFamilies.back();
}

std::string make_text(const Family& family, Rng& rng) {
  const std::size_t t = rng.below(kTemplatesHead.size());
  const std::string phrase = family.stem + " " + rng.pick(family.suffixes);
  std::string mood;
  const unsigned roll = static_cast<unsigned>(rng.below(100));
  if (roll < 35) {
    mood = rng.pick(kPositive);
  } else if (roll < 65) {
    mood = rng.pick(kNegative);
  } else {
    mood = rng.pick(kNeutralFill);
  }
  std::string text = kTemplatesHead[t] + phrase + kTemplatesTail[t] + mood;
  if (rng.chance(15)) text = "RT @ethicsbot: " + text;
  if (rng.chance(10)) text += " via @newsdesk";
  if (rng.chance(20)) {
    text += " https://news.example.com/item/" + std::to_string(rng.below(10000));
  }
  return text;
}

std::string make_post_line(const std::string& id, const std::string& created,
                           const std::string& text, const std::string& tag,
                           const std::string& lang, Rng& rng) {
  std::string line = "{\"id\":\"" + id + "\",\"text\":\"" + json_escape(text) +
                     "\",\"created_at\":\"" + created + "\",\"hashtags\":[\"" +
                     json_escape(tag) + "\"";
  if (rng.chance(30)) line += ",\"" + json_escape(rng.pick(kNoiseTags)) + "\"";
  line += "]";
  if (rng.chance(70)) {
    line += ",\"user_location\":\"" + json_escape(rng.pick(kLocations)) + "\"";
  }
  if (rng.chance(25)) {
    line += ",\"user_occupation\":\"" + json_escape(rng.pick(kOccupations)) + "\"";
  }
  if (rng.chance(30)) {
    line += ",\"user_verified\":true";
  } else if (rng.chance(20)) {
    line += ",\"user_verified\":false";
  }
  line += ",\"lang\":\"" + lang + "\"}";
  return line;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out_path = argc > 1 ? argv[1] : "synthetic_corpus.jsonl";
  const std::size_t good_posts = argc > 2 ? std::stoul(argv[2]) : 2000;

  Rng rng{20150101};
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "cannot write " << out_path << "\n";
    return 1;
  }

  std::size_t serial = 0;
  auto next_id = [&serial] {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "p%06zu", serial++);
    return std::string(buf);
  };

  std::string last_good_line;
  int reject_kind = 0;
  for (std::size_t n = 0; n < good_posts; ++n) {
    // The first posts pin January 2015 so the corpus always has a non-empty
    // first month with the head theme clearly on top.
    const Family& family = n < 8 ? kFamilies.front() : pick_family(rng);
    int year;
    int month;
    if (n < 8) {
      year = 2015;
      month = 1;
    } else {
      const std::uint64_t mi = rng.below(96);
      year = 2015 + static_cast<int>(mi / 12);
      month = 1 + static_cast<int>(mi % 12);
    }
    std::string text;
    if (n < 8 && n % 2 == 0) {
      text = "Here is the data privacy law again and it reads as " +
             std::string(n % 4 == 0 ? "promising" : "worrying");
    } else {
      text = make_text(family, rng);
    }
    const std::string lang = rng.chance(80) ? "en" : (rng.chance(75) ? "en-US" : "en-GB");
    const std::string line =
        make_post_line(next_id(), timestamp(year, month, rng), text,
                       rng.pick(kGoodTags), lang, rng);
    out << line << "\n";
    last_good_line = line;

    if (n > 0 && n % 250 == 0) {
      out << last_good_line << "\n";  // exact duplicate, same id
    }
    if (rng.chance(7)) {
      switch (reject_kind++ % 4) {
        case 0:  // language outside the whitelist
          out << make_post_line(next_id(), timestamp(year, month, rng),
                                "Der neue Entwurf zum Datenschutz ist da",
                                rng.pick(kGoodTags),
                                reject_kind % 2 ? "de" : "fr", rng)
              << "\n";
          break;
        case 1:  // no whitelisted hashtag
          out << make_post_line(next_id(), timestamp(year, month, rng),
                                make_text(family, rng), rng.pick(kNoiseTags),
                                "en", rng)
              << "\n";
          break;
        case 2:  // outside the date range
          out << make_post_line(next_id(),
                                timestamp(reject_kind % 2 ? 2013 : 2024, 6, rng),
                                make_text(family, rng), rng.pick(kGoodTags),
                                "en", rng)
              << "\n";
          break;
        default:  // malformed line
          switch ((reject_kind / 4) % 3) {
            case 0:
              out << "{\"id\":\"" << next_id() << "\",\"text\":\"broken\n";
              break;
            case 1:
              out << "{\"id\":\"" << next_id()
                  << "\",\"created_at\":\"2016-99-99T00:00:00Z\",\"text\":\"x\","
                     "\"hashtags\":[\"#AIEthics\"],\"lang\":\"en\"}\n";
              break;
            default:
              out << "{\"text\":\"record without an id\",\"hashtags\":[],"
                     "\"lang\":\"en\",\"created_at\":\"2016-01-01T00:00:00Z\"}\n";
              break;
          }
          break;
      }
    }
  }

  std::cerr << "wrote " << out_path << " (" << serial << " records)\n";
  return 0;
}
