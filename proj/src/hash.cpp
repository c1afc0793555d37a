#include "atlas/hash.hpp"

#include <fstream>

#include "atlas/errors.hpp"

namespace atlas {

std::string hex_digest(std::uint64_t value) {
  static const char* kHex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[value & 0xF];
    value >>= 4;
  }
  return out;
}

std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path);
  Fnv1a64 h;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h.update(static_cast<std::uint8_t>(buf[i]));
    }
    if (in.eof()) break;
  }
  return h.digest();
}

}  // namespace atlas
