#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace atlas {

// 64-bit FNV-1a. Stable across runs and platforms, unlike std::hash.
// Used for the trigram feature hashing in the builtin embedder and for
// manifest staleness hashes.
class Fnv1a64 {
 public:
  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  constexpr void update(std::uint8_t byte) { hash_ = (hash_ ^ byte) * kPrime; }

  constexpr void update(std::string_view bytes) {
    for (char c : bytes) update(static_cast<std::uint8_t>(c));
  }

  constexpr std::uint64_t digest() const { return hash_; }

  static constexpr std::uint64_t of(std::string_view bytes) {
    Fnv1a64 h;
    h.update(bytes);
    return h.digest();
  }

 private:
  std::uint64_t hash_ = kOffset;
};

// 16 lowercase hex chars.
std::string hex_digest(std::uint64_t value);

// FNV-1a over a whole file. Throws DataError if the file cannot be read.
std::uint64_t hash_file(const std::string& path);

}  // namespace atlas
