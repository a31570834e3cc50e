#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rfsynth::scene {

enum class Family { psk, qam, fsk, ofdm, am, fm };

std::string_view to_string(Family f);
Family family_from_string(std::string_view s);

/// Class-specific synthesis parameters. `order` is the constellation size
/// (PSK/QAM), tone count (FSK) or subcarrier count (OFDM).
struct ModParams {
  int order = 0;
  double mod_index = 0.0;   // FSK h, FM beta, AM depth
  double gaussian_bt = 0.0; // GFSK only
};

struct ModClass {
  std::string name;
  Family family;
  ModParams params;
  /// Allowed occupied bandwidth as a fraction of the sample rate.
  double min_bw_frac = 0.0;
  double max_bw_frac = 1.0;
};

/// Total function from class name to family, by naming convention:
/// "*psk" -> psk, "*qam" -> qam, "*fsk"/"msk" -> fsk, "ofdm*" -> ofdm,
/// "am-*" -> am, "fm-*" -> fm. Throws RegistryError for names outside the
/// convention.
Family family_of(std::string_view name);

/// Single-carrier root-raised-cosine roll-off.
inline constexpr double kRrcRolloff = 0.35;

/// Declared occupied bandwidth for a class at a given rate. For linear
/// modulations the rate is the symbol rate; for OFDM it is the subcarrier
/// spacing; for AM/FM it is the message bandwidth.
double bandwidth_for_rate(const ModClass& mc, double rate, double rolloff = kRrcRolloff);
double rate_for_bandwidth(const ModClass& mc, double bandwidth, double rolloff = kRrcRolloff);

class ModRegistry {
 public:
  explicit ModRegistry(std::vector<ModClass> classes);

  const ModClass& get(std::string_view name) const;
  bool contains(std::string_view name) const;
  const std::vector<ModClass>& classes() const { return classes_; }
  std::vector<std::string> names() const;

  /// Relative tolerance on bandwidth/rate consistency.
  double tolerance() const { return 0.02; }

 private:
  std::vector<ModClass> classes_;
};

/// The 16-class default registry.
const ModRegistry& default_registry();

}  // namespace rfsynth::scene
