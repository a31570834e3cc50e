#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace rfsynth {

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Lowercase 16-digit hex rendering of a 64-bit value.
std::string hex64(std::uint64_t v);

/// Hex FNV-1a digest of a byte string; used for config and manifest hashes.
std::string digest(std::string_view data);

}  // namespace rfsynth
