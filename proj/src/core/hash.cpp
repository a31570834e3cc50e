#include "rfsynth/core/hash.hpp"

#include <cstdio>

namespace rfsynth {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string digest(std::string_view data) { return hex64(fnv1a64(data)); }

}  // namespace rfsynth
