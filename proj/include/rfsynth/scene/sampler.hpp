#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rfsynth/impair/impair.hpp"
#include "rfsynth/scene/modclass.hpp"
#include "rfsynth/scene/tech.hpp"
#include "rfsynth/scene/types.hpp"

namespace rfsynth::scene {

struct TechChoice {
  Technology tech;
  Link link;
  double weight = 1.0;
  /// WLAN standard pinned for this choice ("11ax"/"11be"), empty to draw.
  std::string wlan_standard;
};

/// Scene configuration space. With an empty `technologies` list the scene is
/// a wideband mix of registry classes; otherwise a single technology
/// emulation drawn from the weighted list.
struct SceneSpec {
  std::string task = "wbmc";
  double fs = 61.44e6;
  std::size_t num_samples = 131072;
  int min_signals = 2;
  int max_signals = 5;
  double overlap_prob = 0.0;
  double snr_min_db = 10.0;
  double snr_max_db = 40.0;
  double bw_min_frac = 0.005;
  double bw_max_frac = 0.12;
  double dur_min_frac = 0.1;
  double dur_max_frac = 1.0;
  std::vector<std::string> classes;
  std::vector<TechChoice> technologies;
  TechOptions tech_options;
  int max_rejections = 1000;
  std::vector<impair::ImpairmentSpec> impairments;
};

/// Task presets.
SceneSpec wbmc_spec();  // 2-5 signals, no co-channel overlap
SceneSpec wbod_spec();  // 2-5 signals, co-channel overlap 0.6, SNR 10-50 dB
SceneSpec wtr_spec();   // one of the eight technology/link classes
SceneSpec wnuc_spec();  // WLAN 11ax / 11be
SceneSpec nrie_spec();  // NR DL / UL
SceneSpec spec_for_task(const std::string& task);

/// Draws a validated scene configuration by rejection sampling. Deterministic
/// in (seed, spec). The returned record has no IQ (iq_path empty).
/// Throws RejectionError after spec.max_rejections rejected candidates.
SceneRecord sample_scene_config(std::uint64_t seed, const SceneSpec& spec,
                                const ModRegistry& reg = default_registry());

}  // namespace rfsynth::scene
