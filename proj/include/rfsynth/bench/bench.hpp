#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rfsynth/bench/overlap.hpp"
#include "rfsynth/scene/types.hpp"

namespace rfsynth::bench {

enum class Task { WBMC, WBOD, WTR, WNUC, NRIE };
enum class Difficulty { easy, medium, hard };
inline constexpr Task kAllTasks[] = {Task::WBMC, Task::WBOD, Task::WTR, Task::WNUC, Task::NRIE};
inline constexpr Difficulty kAllDifficulties[] = {Difficulty::easy, Difficulty::medium, Difficulty::hard};

std::string_view to_string(Task t);
std::string_view to_string(Difficulty d);
Task task_from_string(std::string_view s);
Difficulty difficulty_from_string(std::string_view s);
/// Difficulties a task defines (WTR has a single level).
std::vector<Difficulty> difficulties_for(Task t);

enum class TieRule { half_away_from_zero, half_to_even };
enum class WbmcEasyMode { ordered, set };

struct BenchOptions {
  WbmcEasyMode wbmc_easy = WbmcEasyMode::ordered;
  TieRule wnuc_tie = TieRule::half_away_from_zero;
  int distractors_per_class = 2;
};

// ------------------------------------------------------------ formulas ----

/// s = floor((U - 1) / B) * B + 1, e = s + B - 1.
std::pair<int, int> wnuc_bucket(int users, int bucket);
/// U below 10, otherwise the nearest multiple of 10.
int wnuc_hard_target(int users, TieRule tie = TieRule::half_away_from_zero);

/// Positionwise mean of matches; 0 when the lengths differ or both are empty.
double score_wbmc(std::span<const std::string> truth, std::span<const std::string> pred);
/// 1 when the sets of distinct labels coincide, else 0.
double score_wbmc_set(std::span<const std::string> truth, std::span<const std::string> pred);

/// Class labels ordered by signal start time (ties by id).
std::vector<std::string> wbmc_truth(const scene::SceneRecord& rec, bool families);

inline const std::vector<std::string> kWtrLabels = {"DVB-S2", "BT", "UMTS", "LTE", "NR-DL", "NR-UL", "WLAN-AX", "WLAN-BE"};
/// Technology/link label of a technology scene; throws InputError otherwise.
std::string wtr_label(const scene::SceneRecord& rec);

enum class NrAttribute { ue_count, scs, ssb_pattern, csirs_count, srs_count };
inline constexpr NrAttribute kAllNrAttributes[] = {NrAttribute::ue_count, NrAttribute::scs, NrAttribute::ssb_pattern,
                                                   NrAttribute::csirs_count, NrAttribute::srs_count};
std::string_view to_string(NrAttribute a);
NrAttribute nr_attribute_from_string(std::string_view s);
bool nrie_applicable(NrAttribute a, scene::Link link);
/// scs and ssb_pattern are easy, ue_count medium, the reference-signal
/// counts hard.
Difficulty nrie_difficulty(NrAttribute a);
/// Canonical truth string: integers in decimal, SCS in kHz, SSB letter or
/// "N/A". Throws InputError for an attribute not applicable to the link.
std::string nrie_truth(const scene::SceneRecord& rec, NrAttribute a);
inline const std::vector<int> kScsCandidatesKhz = {15, 30, 60, 120};

/// "the signal starting at 12.3 us centred at -5.21 MHz"; how questions name a burst.
std::string describe_signal(const scene::SignalRecord& s);

// ------------------------------------------------------------- parsing ----

struct ParsedAnswer {
  bool ok = false;
  std::string reason;
  nlohmann::json value;
};

/// Text after the last "answer:" marker (case-insensitive), else the whole text.
std::string answer_segment(std::string_view raw);
/// First decimal integer or English number word ("three", "twenty-one").
std::optional<long> parse_integer(std::string_view text);
std::optional<std::pair<long, long>> parse_interval(std::string_view text);
std::optional<OverlapType> parse_overlap_type(std::string_view text);
std::optional<std::pair<OverlapLevel, OverlapLevel>> parse_overlap_strength(std::string_view text);
std::optional<std::string> parse_wtr_label(std::string_view text);
/// Registry class names (or family names with `families`) in order of appearance.
std::vector<std::string> parse_label_list(std::string_view text, bool families);

struct ItemKey {
  Task task;
  Difficulty difficulty;
  std::string attribute;  // NRIE only
};

ParsedAnswer parse_answer(std::string_view raw, const ItemKey& key, const BenchOptions& opts = {});
/// Canonical "Answer: ..." rendering of a structured answer; parses back to it.
std::string render_answer(const ItemKey& key, const nlohmann::json& value);
/// Score in [0, 1] of a parsed answer against the truth; failures score 0.
double score_answer(const ItemKey& key, const nlohmann::json& truth, const ParsedAnswer& parsed,
                    const BenchOptions& opts = {});

// ----------------------------------------------------------- datasets ----

struct BenchmarkItem {
  std::string item_id;
  std::string scene_id;
  std::string image_path;
  Task task = Task::WBMC;
  Difficulty difficulty = Difficulty::easy;
  std::string question;
  nlohmann::json ground_truth;
  std::vector<std::string> candidate_list;
  std::string attribute;
  /// Per-class reporting key (WTR label, WLAN standard, NR link, ...).
  std::string group;

  ItemKey key() const { return {task, difficulty, attribute}; }
};

struct SceneEntry {
  scene::SceneRecord rec;
  std::string image_path;
};

/// Every item a scene can contribute to (task, difficulty); empty when the
/// scene is not eligible.
std::vector<BenchmarkItem> candidate_items(const SceneEntry& scene, Task task, Difficulty difficulty,
                                           const BenchOptions& opts = {});

/// Draws `n` items (all available when n = 0) deterministically from the
/// candidates, or `n` per group when `per_group`. Output ordered by item_id.
/// Throws InputError naming the deficit when too few candidates exist.
std::vector<BenchmarkItem> build_benchmark(std::span<const SceneEntry> scenes, Task task, Difficulty difficulty,
                                           std::size_t n, std::uint64_t seed, bool per_group = false,
                                           const BenchOptions& opts = {});

struct Prediction {
  std::string item_id;
  std::string raw_text;
};

std::vector<Prediction> oracle_predictions(std::span<const BenchmarkItem> items);
/// Oracle answers permuted across items of the same task and difficulty.
std::vector<Prediction> shuffled_predictions(std::span<const BenchmarkItem> items, std::uint64_t seed);

struct ClassStats {
  std::size_t n = 0;
  double score = 0.0;
};

struct CellReport {
  Task task;
  Difficulty difficulty;
  std::size_t n = 0;
  double score_sum = 0.0;
  std::size_t parse_failures = 0;
  std::size_t missing = 0;
  std::map<std::string, ClassStats> per_class;
  /// WTR only: rows are truth labels, columns predictions (kWtrLabels order
  /// plus a trailing "unparsed" column).
  std::vector<std::vector<std::size_t>> confusion;

  double accuracy() const { return n ? score_sum / static_cast<double>(n) : 0.0; }
  double parse_failure_rate() const { return n ? static_cast<double>(parse_failures) / n : 0.0; }
  std::vector<std::vector<double>> confusion_normalized() const;
};

struct ScoreReport {
  std::vector<CellReport> cells;
  std::vector<std::string> warnings;

  const CellReport* find(Task t, Difficulty d) const;
  nlohmann::json to_json() const;
  /// Row-normalized WTR confusion matrix; empty when no WTR cell exists.
  std::string confusion_csv() const;
};

ScoreReport score(std::span<const BenchmarkItem> items, std::span<const Prediction> preds,
                  const BenchOptions& opts = {});

nlohmann::json to_json(const BenchmarkItem& item);
BenchmarkItem item_from_json(const nlohmann::json& j);
void write_items(std::span<const BenchmarkItem> items, const std::string& path);
std::vector<BenchmarkItem> read_items(const std::string& path);
void write_predictions(std::span<const Prediction> preds, const std::string& path);
std::vector<Prediction> read_predictions(const std::string& path);

}  // namespace rfsynth::bench
