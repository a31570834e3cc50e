#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rfsynth/scene/types.hpp"

namespace rfsynth::caption {

enum class Level { summary, global_visual, global_context, signal_visual, signal_context };
inline constexpr std::array<Level, 5> kAllLevels = {Level::summary, Level::global_visual, Level::global_context,
                                                    Level::signal_visual, Level::signal_context};
std::string_view to_string(Level l);
Level level_from_string(std::string_view s);

/// Subset of the five levels.
class LevelSet {
 public:
  constexpr LevelSet() = default;
  constexpr LevelSet(std::initializer_list<Level> ls) {
    for (auto l : ls) insert(l);
  }
  static constexpr LevelSet all() { return LevelSet{Level::summary, Level::global_visual, Level::global_context,
                                                    Level::signal_visual, Level::signal_context}; }
  constexpr void insert(Level l) { bits_ |= 1u << static_cast<unsigned>(l); }
  constexpr bool contains(Level l) const { return bits_ >> static_cast<unsigned>(l) & 1u; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool subset_of(LevelSet o) const { return (bits_ & ~o.bits_) == 0; }
  std::vector<Level> levels() const;
  constexpr bool operator==(const LevelSet&) const = default;

 private:
  unsigned bits_ = 0;
};

/// Which caption level renders each caption field. A field is rendered from
/// the metadata named in `source` and appears in exactly one level.
struct FieldLevel {
  std::string_view field;
  Level level;
  std::string_view source;
};

inline constexpr FieldLevel kFieldLevels[] = {
    {"technology", Level::summary, "scene technology"},
    {"link", Level::summary, "scene link"},
    {"signal_count", Level::summary, "number of generic bursts"},
    {"ue_count", Level::summary, "tech_attrs.ue_count (NR, LTE)"},
    {"user_count", Level::summary, "tech_attrs.user_count (WLAN)"},
    {"ssb_bursts", Level::global_visual, "records with role ssb"},
    {"csirs_count", Level::global_visual, "tech_attrs.csirs_count (NR DL)"},
    {"srs_count", Level::global_visual, "tech_attrs.srs_count (NR UL)"},
    {"overlap", Level::global_visual, "pairwise interval overlap of generic bursts"},
    {"ppdu_count", Level::global_visual, "distinct ru.ppdu (WLAN)"},
    {"hop_count", Level::global_visual, "records with role hop (BT)"},
    {"carrier_count", Level::global_visual, "records with role carrier (UMTS, DVB-S2)"},
    {"sample_rate", Level::global_context, "fs"},
    {"duration", Level::global_context, "duration"},
    {"scs", Level::global_context, "tech_attrs.scs_khz (NR)"},
    {"ssb_pattern", Level::global_context, "tech_attrs.ssb_pattern (NR DL)"},
    {"n_prb", Level::global_context, "tech_attrs.n_prb (NR, LTE)"},
    {"standard", Level::global_context, "tech_attrs.standard (WLAN)"},
    {"channel", Level::global_context, "tech_attrs.channel_mhz (WLAN)"},
    {"impairments", Level::global_context, "impairments"},
    {"duration_tier", Level::signal_visual, "t_interval"},
    {"time_fraction", Level::signal_visual, "t_interval"},
    {"start_time", Level::signal_visual, "t_interval"},
    {"band_fraction", Level::signal_visual, "f_interval"},
    {"center_freq", Level::signal_visual, "f_interval"},
    {"power_tier", Level::signal_visual, "snr_db"},
    {"mod_class", Level::signal_context, "mod_class"},
    {"family", Level::signal_context, "mod_class"},
    {"role", Level::signal_context, "role"},
    {"user", Level::signal_context, "user"},
};

Level level_of_field(std::string_view field);

struct VisualAttrs {
  int signal_id = 0;
  std::string duration_tier;  // short, moderate, long
  std::string power_tier;     // low, moderate, high
  double band_fraction = 0.0;
  double time_fraction = 0.0;
};

inline constexpr double kShortTimeFraction = 0.25;
inline constexpr double kModerateTimeFraction = 0.75;
inline constexpr double kLowSnrDb = 15.0;
inline constexpr double kModerateSnrDb = 35.0;

std::string duration_tier(double time_fraction);
/// Thirds of [lo, hi]; absolute 15/35 dB cutoffs when single or lo == hi.
std::string power_tier(double snr_db, double lo, double hi, bool single);

std::vector<VisualAttrs> derive_visual_attrs(const scene::SceneRecord& rec);

/// One rendered claim. `value` is the exact token that appears in `text`.
struct Fact {
  Level level;
  std::string key;
  std::string value;
  std::string text;
  int signal = -1;
};

struct CaptionRecord {
  std::string scene_id;
  std::string summary;
  std::vector<std::string> global_visual;
  std::vector<std::string> global_context;
  std::vector<std::vector<std::string>> signal_visual;
  std::vector<std::vector<std::string>> signal_context;
  nlohmann::json attrs;
  std::vector<Fact> facts;
  LevelSet levels;

  /// Text of the requested levels in level order, one line per sentence.
  std::string render(LevelSet which) const;
};

/// Display names used in caption text.
std::string technology_display(scene::Technology t);
std::string link_display(scene::Link l);

/// Renders the requested levels from metadata. Template variants are chosen
/// by a hash of (seed, field, value), so the text does not depend on
/// scene_id. Throws ConfigError for an empty level set.
CaptionRecord build_caption(const scene::SceneRecord& rec, const std::vector<VisualAttrs>& attrs,
                            LevelSet levels = LevelSet::all(), std::uint64_t seed = 0);

void to_json(nlohmann::json& j, const CaptionRecord& c);
void from_json(const nlohmann::json& j, CaptionRecord& c);

/// JSONL shards `<dir>/captions-00000.jsonl`, ... with `shard_size` records
/// each. Returns the written paths.
std::vector<std::string> write_captions(const std::vector<CaptionRecord>& caps, const std::string& dir,
                                        std::size_t shard_size = 1000);
std::vector<CaptionRecord> read_captions(const std::string& dir);

}  // namespace rfsynth::caption
