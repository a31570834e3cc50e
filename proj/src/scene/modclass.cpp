#include "rfsynth/scene/modclass.hpp"

#include <algorithm>
#include <set>

#include "rfsynth/core/error.hpp"

namespace rfsynth::scene {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::psk: return "psk";
    case Family::qam: return "qam";
    case Family::fsk: return "fsk";
    case Family::ofdm: return "ofdm";
    case Family::am: return "am";
    case Family::fm: return "fm";
  }
  return "psk";
}

Family family_from_string(std::string_view s) {
  for (Family f : {Family::psk, Family::qam, Family::fsk, Family::ofdm, Family::am, Family::fm})
    if (to_string(f) == s) return f;
  throw RegistryError("unknown modulation family: " + std::string(s));
}

Family family_of(std::string_view name) {
  auto ends_with = [&](std::string_view suffix) {
    return name.size() >= suffix.size() &&
           name.substr(name.size() - suffix.size()) == suffix;
  };
  if (name.starts_with("ofdm")) return Family::ofdm;
  if (name.starts_with("am-")) return Family::am;
  if (name.starts_with("fm-")) return Family::fm;
  if (ends_with("qam")) return Family::qam;
  if (ends_with("fsk") || name == "msk") return Family::fsk;
  if (ends_with("psk")) return Family::psk;
  throw RegistryError("class name outside the family naming convention: " + std::string(name));
}

double bandwidth_for_rate(const ModClass& mc, double rate, double rolloff) {
  switch (mc.family) {
    case Family::psk:
    case Family::qam:
      return rate * (1.0 + rolloff);
    case Family::fsk:
      if (mc.name == "msk") return 1.5 * rate;
      if (mc.name == "gfsk") return 1.0 * rate;
      // Tone spread plus main-lobe width.
      return (mc.params.order - 1) * mc.params.mod_index * rate + 2.0 * rate;
    case Family::ofdm:
      return mc.params.order * rate;
    case Family::am:
      return mc.name == "am-ssb" ? rate : 2.0 * rate;
    case Family::fm:
      return 2.0 * (mc.params.mod_index + 1.0) * rate;  // Carson
  }
  return rate;
}

double rate_for_bandwidth(const ModClass& mc, double bandwidth, double rolloff) {
  return bandwidth / bandwidth_for_rate(mc, 1.0, rolloff);
}

ModRegistry::ModRegistry(std::vector<ModClass> classes) : classes_(std::move(classes)) {
  std::set<std::string> seen;
  for (auto& c : classes_) {
    if (!seen.insert(c.name).second) throw RegistryError("duplicate class: " + c.name);
    if (family_of(c.name) != c.family)
      throw RegistryError("class " + c.name + " declares a family that contradicts its name");
  }
}

const ModClass& ModRegistry::get(std::string_view name) const {
  auto it = std::find_if(classes_.begin(), classes_.end(),
                         [&](const ModClass& c) { return c.name == name; });
  if (it == classes_.end()) throw RegistryError("unknown modulation class: " + std::string(name));
  return *it;
}

bool ModRegistry::contains(std::string_view name) const {
  return std::any_of(classes_.begin(), classes_.end(),
                     [&](const ModClass& c) { return c.name == name; });
}

std::vector<std::string> ModRegistry::names() const {
  std::vector<std::string> out;
  for (auto& c : classes_) out.push_back(c.name);
  return out;
}

const ModRegistry& default_registry() {
  static const ModRegistry reg({
      {"bpsk", Family::psk, {2, 0, 0}, 0.002, 0.25},
      {"qpsk", Family::psk, {4, 0, 0}, 0.002, 0.25},
      {"8psk", Family::psk, {8, 0, 0}, 0.002, 0.25},
      {"16qam", Family::qam, {16, 0, 0}, 0.002, 0.25},
      {"64qam", Family::qam, {64, 0, 0}, 0.002, 0.25},
      {"256qam", Family::qam, {256, 0, 0}, 0.002, 0.25},
      {"2fsk", Family::fsk, {2, 1.0, 0}, 0.002, 0.10},
      {"4fsk", Family::fsk, {4, 1.0, 0}, 0.002, 0.10},
      {"gfsk", Family::fsk, {2, 0.5, 0.5}, 0.002, 0.10},
      {"msk", Family::fsk, {2, 0.5, 0}, 0.002, 0.10},
      {"ofdm-64", Family::ofdm, {64, 0, 0}, 0.01, 0.30},
      {"ofdm-256", Family::ofdm, {256, 0, 0}, 0.02, 0.30},
      {"am-dsb", Family::am, {0, 0.8, 0}, 0.002, 0.04},
      {"am-ssb", Family::am, {0, 0.8, 0}, 0.002, 0.04},
      {"fm-nb", Family::fm, {0, 1.0, 0}, 0.002, 0.05},
      {"fm-wb", Family::fm, {0, 5.0, 0}, 0.01, 0.15},
  });
  return reg;
}

}  // namespace rfsynth::scene
