#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rfsynth/scene/types.hpp"

namespace rfsynth::scene {

/// Optional overrides for the technology emulators. Unset fields are drawn.
struct TechOptions {
  std::optional<int> scs_khz;
  std::optional<std::string> ssb_pattern;
  std::optional<int> csirs_count;
  std::optional<int> srs_count;
  std::optional<int> ue_count;
  std::optional<std::string> wlan_standard;
  std::optional<int> wlan_users;
  double snr_min_db = 10.0;
  double snr_max_db = 40.0;
  int max_rejections = 1000;
};

bool supported(Technology tech, Link link);

struct TechPlan {
  std::vector<SignalRecord> records;
  int rejections = 0;
};

/// Structural layout of one technology capture: every burst, reference
/// signal, and allocation as a SignalRecord, with latent attributes in
/// tech_attrs. Throws ConfigError for unsupported (tech, link) pairs or a
/// sample rate the numerology cannot use, RejectionError if no valid layout
/// is found within the rejection budget.
TechPlan plan_technology(Technology tech, Link link, std::uint64_t seed, double fs,
                         std::size_t num_samples, const TechOptions& opts = {});

struct Emulation {
  std::vector<std::complex<double>> iq;
  std::vector<SignalRecord> records;
};

/// plan_technology() followed by rendering with AWGN.
Emulation emulate_technology(Technology tech, Link link, std::uint64_t seed, double fs,
                             double duration, const TechOptions& opts = {});

/// SSB first-symbol indices for a pattern within `n_symbols` OFDM symbols.
std::vector<int> ssb_start_symbols(const std::string& pattern, int n_symbols);
/// SSB pattern compatible with a subcarrier spacing, or empty.
std::vector<std::string> ssb_patterns_for_scs(int scs_khz);

}  // namespace rfsynth::scene
