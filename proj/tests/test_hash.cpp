#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"

#include "atlas/errors.hpp"
#include "atlas/hash.hpp"

using namespace atlas;

TEST_CASE("fnv1a64 matches the published reference vectors") {
  CHECK(Fnv1a64::of("") == 0xcbf29ce484222325ULL);
  CHECK(Fnv1a64::of("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(Fnv1a64::of("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("fnv1a64 incremental updates equal one-shot hashing") {
  Fnv1a64 h;
  h.update("foo");
  h.update("bar");
  CHECK(h.digest() == Fnv1a64::of("foobar"));

  Fnv1a64 bytewise;
  for (char c : std::string("foobar")) {
    bytewise.update(static_cast<std::uint8_t>(c));
  }
  CHECK(bytewise.digest() == Fnv1a64::of("foobar"));
}

TEST_CASE("hex_digest is 16 lowercase zero-padded hex chars") {
  CHECK(hex_digest(0xcbf29ce484222325ULL) == "cbf29ce484222325");
  CHECK(hex_digest(0) == "0000000000000000");
  CHECK(hex_digest(0xfULL) == "000000000000000f");
}

TEST_CASE("hash_file hashes exact bytes and fails loudly on absence") {
  std::string path = "hash_probe.tmp";
  {
    std::ofstream out(path, std::ios::binary);
    out << "foobar";
  }
  CHECK(hash_file(path) == Fnv1a64::of("foobar"));
  std::remove(path.c_str());
  CHECK_THROWS_AS(hash_file(path), DataError);
}
