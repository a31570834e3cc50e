#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rfsynth/impair/impair.hpp"

namespace rfsynth::scene {

inline constexpr int kSceneSchemaVersion = 1;

enum class Technology { NR, LTE, UMTS, WLAN, DVBS2, BT, GENERIC };
enum class Link { DL, UL, NA };

std::string_view to_string(Technology t);
std::string_view to_string(Link l);
Technology technology_from_string(std::string_view s);
Link link_from_string(std::string_view s);

/// Closed interval [lo, hi] with lo < hi for valid records.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

struct NrAttrs {
  int scs_khz = 30;
  std::string ssb_pattern = "NA";  // A, B, C, D or NA
  int csirs_count = 0;
  int srs_count = 0;
  int ue_count = 1;
  int n_prb = 0;
  bool operator==(const NrAttrs&) const = default;
};

/// One OFDMA resource unit occupied by this record's user.
struct RuAssignment {
  int ppdu = 0;
  int ru_index = 0;
  int tones = 26;
  bool operator==(const RuAssignment&) const = default;
};

struct WlanAttrs {
  std::string standard = "11ax";  // 11ax or 11be
  int user_count = 1;
  int channel_mhz = 20;
  RuAssignment ru;
  bool operator==(const WlanAttrs&) const = default;
};

using OpaqueAttrs = std::map<std::string, std::string>;
using TechAttrs = std::variant<OpaqueAttrs, NrAttrs, WlanAttrs>;

enum class Waveform { native, ofdm_grid };

/// How a record is rendered to IQ. For `native` the class synthesizer is
/// used; `ofdm_grid` renders an OFDM allocation with subcarrier spacing
/// `symbol_rate` and the class constellation on every subcarrier.
struct RenderHint {
  Waveform waveform = Waveform::native;
  double symbol_rate = 0.0;
  double rolloff = 0.35;
  double cp_ratio = 0.125;
  bool operator==(const RenderHint&) const = default;
};

struct SignalRecord {
  int id = 0;
  Technology technology = Technology::GENERIC;
  Link link = Link::NA;
  std::string mod_class;
  Interval t_interval;
  Interval f_interval;
  double snr_db = 0.0;
  TechAttrs tech_attrs;
  /// Structural role inside a technology emulation ("burst", "pdsch", "ssb",
  /// "csirs", "srs", "ru", ...).
  std::string role = "burst";
  int user = -1;
  RenderHint render;

  double f_center() const { return 0.5 * (f_interval.lo + f_interval.hi); }
  double bandwidth() const { return f_interval.length(); }
  bool operator==(const SignalRecord&) const = default;
};

struct SceneRecord {
  int schema_version = kSceneSchemaVersion;
  std::string scene_id;
  std::string task;
  double fs = 0.0;
  double duration = 0.0;
  std::vector<SignalRecord> signals;
  double overlap_prob = 0.0;
  std::uint64_t seed = 0;
  std::string iq_path;
  int rejections = 0;
  std::vector<impair::ImpairmentSpec> impairments;

  std::size_t num_samples() const;
  bool operator==(const SceneRecord&) const = default;
};

/// Scene-level technology label when all records share one technology.
Technology scene_technology(const SceneRecord& rec);
Link scene_link(const SceneRecord& rec);
const NrAttrs* nr_attrs(const SceneRecord& rec);
const WlanAttrs* wlan_attrs(const SceneRecord& rec);
/// Distinct users across WLAN RU records.
int wlan_distinct_users(const SceneRecord& rec);

/// Validates record invariants; returns an empty string on success or the
/// name of the violated invariant.
std::string check_signal(const SignalRecord& s, double fs, double duration);
std::string check_scene(const SceneRecord& rec);

void to_json(nlohmann::json& j, const Interval& v);
void from_json(const nlohmann::json& j, Interval& v);
void to_json(nlohmann::json& j, const SignalRecord& v);
void from_json(const nlohmann::json& j, SignalRecord& v);
void to_json(nlohmann::json& j, const SceneRecord& v);
void from_json(const nlohmann::json& j, SceneRecord& v);

std::string to_json_string(const SceneRecord& rec);
SceneRecord scene_from_json_string(std::string_view text);
SceneRecord load_scene(const std::string& path);
void save_scene(const SceneRecord& rec, const std::string& path);

}  // namespace rfsynth::scene

namespace rfsynth::impair {
void to_json(nlohmann::json& j, const ImpairmentSpec& v);
void from_json(const nlohmann::json& j, ImpairmentSpec& v);
}  // namespace rfsynth::impair
