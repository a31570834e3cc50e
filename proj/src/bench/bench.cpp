#include "rfsynth/bench/bench.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "rfsynth/core/error.hpp"
#include "rfsynth/core/hash.hpp"
#include "rfsynth/core/rng.hpp"
#include "rfsynth/scene/modclass.hpp"

namespace rfsynth::bench {

namespace {

using nlohmann::json;
using scene::Link;
using scene::SceneRecord;
using scene::Technology;

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

/// Earliest whole-word occurrence of `needle` in `hay`, or npos.
std::size_t find_word(const std::string& hay, std::string_view needle) {
  for (std::size_t p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) {
    const bool left = p == 0 || !is_word_char(hay[p - 1]);
    const std::size_t end = p + needle.size();
    const bool right = end >= hay.size() || !is_word_char(hay[end]);
    if (left && right) return p;
  }
  return std::string::npos;
}

/// Member of `options` whose earliest synonym occurs first in `text`.
template <typename T>
std::optional<T> earliest(const std::string& text, const std::vector<std::pair<std::string_view, T>>& options) {
  std::size_t best = std::string::npos, best_len = 0;
  std::optional<T> out;
  for (const auto& [syn, val] : options) {
    const auto p = find_word(text, syn);
    if (p == std::string::npos) continue;
    if (p < best || (p == best && syn.size() > best_len)) {
      best = p;
      best_len = syn.size();
      out = val;
    }
  }
  return out;
}

const std::map<std::string, long, std::less<>>& number_words() {
  static const std::map<std::string, long, std::less<>> m = {
      {"zero", 0},     {"one", 1},        {"two", 2},       {"three", 3},     {"four", 4},     {"five", 5},
      {"six", 6},      {"seven", 7},      {"eight", 8},     {"nine", 9},      {"ten", 10},     {"eleven", 11},
      {"twelve", 12},  {"thirteen", 13},  {"fourteen", 14}, {"fifteen", 15},  {"sixteen", 16}, {"seventeen", 17},
      {"eighteen", 18}, {"nineteen", 19}, {"twenty", 20},   {"thirty", 30},   {"forty", 40},   {"fifty", 50},
      {"sixty", 60},   {"seventy", 70},   {"eighty", 80},   {"ninety", 90},   {"hundred", 100}, {"no", 0},
      {"none", 0},     {"single", 1}};
  return m;
}

std::string overlap_display(OverlapType t) {
  switch (t) {
    case OverlapType::neither: return "neither";
    case OverlapType::time_only: return "time-only";
    case OverlapType::frequency_only: return "frequency-only";
    case OverlapType::both: return "both";
  }
  return {};
}

std::string level_display(OverlapLevel l) { return l == OverlapLevel::almost_fully ? "almost fully" : std::string(to_string(l)); }

std::string join(const std::vector<std::string>& v, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? std::string(sep) : std::string()) + v[i];
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

const scene::SignalRecord& by_id(const SceneRecord& rec, int id) {
  for (const auto& s : rec.signals)
    if (s.id == id) return s;
  throw InputError("signal id " + std::to_string(id) + " not in scene " + rec.scene_id);
}

std::string item_prefix(Task t, Difficulty d) {
  return lower(to_string(t)) + "-" + std::string(to_string(d));
}

}  // namespace

// ----------------------------------------------------------- enums ----

std::string_view to_string(Task t) {
  switch (t) {
    case Task::WBMC: return "WBMC";
    case Task::WBOD: return "WBOD";
    case Task::WTR: return "WTR";
    case Task::WNUC: return "WNUC";
    case Task::NRIE: return "NRIE";
  }
  return "?";
}

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::easy: return "easy";
    case Difficulty::medium: return "medium";
    case Difficulty::hard: return "hard";
  }
  return "?";
}

Task task_from_string(std::string_view s) {
  const auto l = lower(s);
  for (auto t : kAllTasks)
    if (lower(to_string(t)) == l) return t;
  throw ConfigError("unknown benchmark task '" + std::string(s) + "'");
}

Difficulty difficulty_from_string(std::string_view s) {
  const auto l = lower(s);
  for (auto d : kAllDifficulties)
    if (to_string(d) == l) return d;
  throw ConfigError("unknown difficulty '" + std::string(s) + "'");
}

std::vector<Difficulty> difficulties_for(Task t) {
  if (t == Task::WTR) return {Difficulty::easy};
  return {Difficulty::easy, Difficulty::medium, Difficulty::hard};
}

std::string_view to_string(NrAttribute a) {
  switch (a) {
    case NrAttribute::ue_count: return "ue_count";
    case NrAttribute::scs: return "scs";
    case NrAttribute::ssb_pattern: return "ssb_pattern";
    case NrAttribute::csirs_count: return "csirs_count";
    case NrAttribute::srs_count: return "srs_count";
  }
  return "?";
}

NrAttribute nr_attribute_from_string(std::string_view s) {
  for (auto a : kAllNrAttributes)
    if (to_string(a) == s) return a;
  throw ConfigError("unknown NR attribute '" + std::string(s) + "'");
}

bool nrie_applicable(NrAttribute a, Link link) {
  switch (a) {
    case NrAttribute::ssb_pattern:
    case NrAttribute::csirs_count: return link == Link::DL;
    case NrAttribute::srs_count: return link == Link::UL;
    default: return link == Link::DL || link == Link::UL;
  }
}

Difficulty nrie_difficulty(NrAttribute a) {
  switch (a) {
    case NrAttribute::scs:
    case NrAttribute::ssb_pattern: return Difficulty::easy;
    case NrAttribute::ue_count: return Difficulty::medium;
    default: return Difficulty::hard;
  }
}

std::string nrie_truth(const SceneRecord& rec, NrAttribute a) {
  const auto* nr = scene::nr_attrs(rec);
  if (!nr) throw InputError("scene " + rec.scene_id + " is not an NR scene");
  const auto link = scene::scene_link(rec);
  if (!nrie_applicable(a, link))
    throw InputError("attribute " + std::string(to_string(a)) + " does not apply to " + std::string(scene::to_string(link)));
  switch (a) {
    case NrAttribute::ue_count: return std::to_string(nr->ue_count);
    case NrAttribute::scs: return std::to_string(nr->scs_khz);
    case NrAttribute::ssb_pattern: return nr->ssb_pattern == "NA" ? "N/A" : nr->ssb_pattern;
    case NrAttribute::csirs_count: return std::to_string(nr->csirs_count);
    case NrAttribute::srs_count: return std::to_string(nr->srs_count);
  }
  return {};
}

std::string describe_signal(const scene::SignalRecord& s) {
  return "the signal starting at " + fixed(s.t_interval.lo * 1e6, 1) + " us centred at " + fixed(s.f_center() / 1e6, 2) +
         " MHz";
}

// -------------------------------------------------------- formulas ----

std::pair<int, int> wnuc_bucket(int users, int bucket) {
  if (users < 1 || bucket < 1) throw InputError("bucket formula needs U >= 1 and B >= 1");
  const int s = (users - 1) / bucket * bucket + 1;
  return {s, s + bucket - 1};
}

int wnuc_hard_target(int users, TieRule tie) {
  if (users < 1) throw InputError("user count must be positive");
  if (users < 10) return users;
  const int q = users / 10, r = users % 10;
  if (r > 5) return 10 * (q + 1);
  if (r < 5) return 10 * q;
  if (tie == TieRule::half_away_from_zero) return 10 * (q + 1);
  return 10 * (q % 2 == 0 ? q : q + 1);
}

double score_wbmc(std::span<const std::string> truth, std::span<const std::string> pred) {
  if (truth.size() != pred.size() || truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == pred[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double score_wbmc_set(std::span<const std::string> truth, std::span<const std::string> pred) {
  const std::set<std::string> a(truth.begin(), truth.end()), b(pred.begin(), pred.end());
  return !a.empty() && a == b ? 1.0 : 0.0;
}

std::vector<std::string> wbmc_truth(const SceneRecord& rec, bool families) {
  std::vector<const scene::SignalRecord*> order;
  for (const auto& s : rec.signals) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) {
    return a->t_interval.lo != b->t_interval.lo ? a->t_interval.lo < b->t_interval.lo : a->id < b->id;
  });
  std::vector<std::string> out;
  for (auto* s : order)
    out.push_back(families ? std::string(scene::to_string(scene::family_of(s->mod_class))) : s->mod_class);
  return out;
}

std::string wtr_label(const SceneRecord& rec) {
  const auto tech = scene::scene_technology(rec);
  const auto link = scene::scene_link(rec);
  switch (tech) {
    case Technology::DVBS2: return "DVB-S2";
    case Technology::BT: return "BT";
    case Technology::UMTS: return "UMTS";
    case Technology::LTE: return "LTE";
    case Technology::NR: return link == Link::UL ? "NR-UL" : "NR-DL";
    case Technology::WLAN: {
      const auto* w = scene::wlan_attrs(rec);
      return w && w->standard == "11be" ? "WLAN-BE" : "WLAN-AX";
    }
    default: throw InputError("scene " + rec.scene_id + " has no technology label");
  }
}

// --------------------------------------------------------- parsing ----

std::string answer_segment(std::string_view raw) {
  const auto l = lower(raw);
  const auto p = l.rfind("answer:");
  if (p == std::string::npos) return std::string(raw);
  return std::string(raw.substr(p + 7));
}

std::optional<long> parse_integer(std::string_view text) {
  const auto l = lower(text);
  const auto& words = number_words();
  std::size_t i = 0;
  while (i < l.size()) {
    if (!is_word_char(l[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < l.size() && is_word_char(l[j])) ++j;
    const std::string tok = l.substr(i, j - i);
    if (std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      if (tok.size() > 9) return std::nullopt;
      return std::stol(tok);
    }
    if (auto it = words.find(tok); it != words.end()) {
      long v = it->second;
      // Compound tens: "twenty-one", "twenty one".
      if (v >= 20 && v < 100 && v % 10 == 0) {
        std::size_t k = j;
        while (k < l.size() && (l[k] == '-' || l[k] == ' ')) ++k;
        std::size_t m = k;
        while (m < l.size() && is_word_char(l[m])) ++m;
        if (auto u = words.find(l.substr(k, m - k)); k > j && u != words.end() && u->second >= 1 && u->second <= 9 &&
                                                    u->first != "no" && u->first != "single")
          v += u->second;
      }
      return v;
    }
    i = j;
  }
  return std::nullopt;
}

std::optional<std::pair<long, long>> parse_interval(std::string_view text) {
  static const std::regex bracket(R"(\[\s*(\d+)\s*(?:,|-|to)\s*(\d+)\s*\])", std::regex::icase);
  static const std::regex bare(R"((?:between\s+)?(\d+)\s*(?:-|to|and)\s*(\d+))", std::regex::icase);
  const std::string s(text);
  std::smatch m;
  if (std::regex_search(s, m, bracket) || std::regex_search(s, m, bare)) {
    if (m[1].length() > 9 || m[2].length() > 9) return std::nullopt;
    return std::make_pair(std::stol(m[1]), std::stol(m[2]));
  }
  return std::nullopt;
}

std::optional<OverlapType> parse_overlap_type(std::string_view text) {
  static const std::vector<std::pair<std::string_view, OverlapType>> syn = {
      {"neither", OverlapType::neither},          {"no overlap", OverlapType::neither},
      {"none", OverlapType::neither},             {"time-only", OverlapType::time_only},
      {"time only", OverlapType::time_only},      {"time_only", OverlapType::time_only},
      {"only in time", OverlapType::time_only},   {"frequency-only", OverlapType::frequency_only},
      {"frequency only", OverlapType::frequency_only}, {"frequency_only", OverlapType::frequency_only},
      {"freq-only", OverlapType::frequency_only}, {"only in frequency", OverlapType::frequency_only},
      {"both", OverlapType::both}};
  return earliest(lower(text), syn);
}

std::optional<std::pair<OverlapLevel, OverlapLevel>> parse_overlap_strength(std::string_view text) {
  static const std::string lv = R"((none|slightly|considerably|almost[ _-]?fully))";
  static const std::regex time_re(R"(\btime\s*[:=-]?\s*)" + lv);
  static const std::regex freq_re(R"(\bfreq(?:uency)?\s*[:=-]?\s*)" + lv);
  const auto l = lower(text);
  std::smatch mt, mf;
  if (!std::regex_search(l, mt, time_re) || !std::regex_search(l, mf, freq_re)) return std::nullopt;
  auto level = [](std::string v) {
    if (v.rfind("almost", 0) == 0) return OverlapLevel::almost_fully;
    return overlap_level_from_string(v);
  };
  return std::make_pair(level(mt[1]), level(mf[1]));
}

std::optional<std::string> parse_wtr_label(std::string_view text) {
  static const std::vector<std::pair<std::string_view, std::string>> syn = {
      {"nr-dl", "NR-DL"},       {"nr dl", "NR-DL"},       {"nr_dl", "NR-DL"},       {"nrdl", "NR-DL"},
      {"5g-nr dl", "NR-DL"},    {"5g-nr downlink", "NR-DL"}, {"nr downlink", "NR-DL"},
      {"nr-ul", "NR-UL"},       {"nr ul", "NR-UL"},       {"nr_ul", "NR-UL"},       {"nrul", "NR-UL"},
      {"5g-nr ul", "NR-UL"},    {"5g-nr uplink", "NR-UL"}, {"nr uplink", "NR-UL"},
      {"wlan-ax", "WLAN-AX"},   {"wlan ax", "WLAN-AX"},   {"wlan_ax", "WLAN-AX"},   {"802.11ax", "WLAN-AX"},
      {"wlan-be", "WLAN-BE"},   {"wlan be", "WLAN-BE"},   {"wlan_be", "WLAN-BE"},   {"802.11be", "WLAN-BE"},
      {"dvb-s2", "DVB-S2"},     {"dvbs2", "DVB-S2"},      {"dvb s2", "DVB-S2"},     {"dvb_s2", "DVB-S2"},
      {"umts", "UMTS"},         {"lte", "LTE"},           {"bt", "BT"},             {"bluetooth", "BT"}};
  return earliest(lower(text), syn);
}

std::vector<std::string> parse_label_list(std::string_view text, bool families) {
  std::set<std::string, std::less<>> vocab;
  if (families) {
    for (auto f : {scene::Family::psk, scene::Family::qam, scene::Family::fsk, scene::Family::ofdm, scene::Family::am,
                   scene::Family::fm})
      vocab.insert(std::string(scene::to_string(f)));
  } else {
    for (const auto& n : scene::default_registry().names()) vocab.insert(n);
  }
  const auto l = lower(text);
  std::vector<std::string> out;
  std::size_t i = 0;
  auto tok_char = [](char c) { return is_word_char(c) || c == '-'; };
  while (i < l.size()) {
    if (!tok_char(l[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < l.size() && tok_char(l[j])) ++j;
    std::string tok = l.substr(i, j - i);
    while (!tok.empty() && tok.back() == '-') tok.pop_back();
    if (vocab.count(tok)) out.push_back(tok);
    i = j;
  }
  return out;
}

ParsedAnswer parse_answer(std::string_view raw, const ItemKey& key, const BenchOptions&) {
  ParsedAnswer p;
  const std::string seg = answer_segment(raw);
  auto fail = [&](std::string why) {
    p.ok = false;
    p.reason = std::move(why);
    p.value = nullptr;
    return p;
  };
  if (std::all_of(seg.begin(), seg.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); }))
    return fail("empty answer");
  switch (key.task) {
    case Task::WBMC: {
      auto labels = parse_label_list(seg, key.difficulty == Difficulty::easy);
      if (labels.empty()) return fail("no modulation labels found");
      p.value = labels;
      break;
    }
    case Task::WBOD: {
      if (key.difficulty == Difficulty::hard) {
        auto s = parse_overlap_strength(seg);
        if (!s) return fail("expected 'time: <level>, frequency: <level>'");
        p.value = json::array({to_string(s->first), to_string(s->second)});
      } else {
        auto t = parse_overlap_type(seg);
        if (!t) return fail("no overlap category found");
        p.value = to_string(*t);
      }
      break;
    }
    case Task::WTR: {
      auto l = parse_wtr_label(seg);
      if (!l) return fail("no technology label found");
      p.value = *l;
      break;
    }
    case Task::WNUC: {
      if (key.difficulty == Difficulty::hard) {
        auto v = parse_integer(seg);
        if (!v) return fail("no integer found");
        p.value = *v;
      } else {
        auto iv = parse_interval(seg);
        if (!iv) return fail("no interval found");
        p.value = json::array({iv->first, iv->second});
      }
      break;
    }
    case Task::NRIE: {
      const auto attr = nr_attribute_from_string(key.attribute);
      if (attr == NrAttribute::ssb_pattern) {
        const auto l = lower(seg);
        static const std::regex case_re(R"(\b(?:case|pattern)\s*([a-d])\b)");
        static const std::regex na_re(R"((^|[^a-z])(n/a|na|none|no ssb)([^a-z]|$))");
        static const std::regex letter_re(R"(\b([A-D])\b)");
        std::smatch m;
        const bool has_na = std::regex_search(l, m, na_re);
        const std::size_t na_pos = has_na ? static_cast<std::size_t>(m.position(0)) : std::string::npos;
        std::smatch mc;
        std::optional<std::pair<std::size_t, std::string>> letter;
        if (std::regex_search(l, mc, case_re))
          letter = {static_cast<std::size_t>(mc.position(0)), lower(mc[1].str())};
        else if (std::regex_search(seg, mc, letter_re))
          letter = {static_cast<std::size_t>(mc.position(0)), mc[1].str()};
        if (!letter && !has_na) return fail("no SSB pattern found");
        if (has_na && (!letter || na_pos < letter->first)) {
          p.value = "N/A";
        } else {
          std::string v = letter->second;
          v[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(v[0])));
          p.value = v;
        }
      } else {
        auto v = parse_integer(seg);
        if (!v) return fail("no integer found");
        if (attr == NrAttribute::scs &&
            std::find(kScsCandidatesKhz.begin(), kScsCandidatesKhz.end(), *v) == kScsCandidatesKhz.end())
          return fail("subcarrier spacing outside the candidate set");
        p.value = std::to_string(*v);
      }
      break;
    }
  }
  p.ok = true;
  return p;
}

std::string render_answer(const ItemKey& key, const json& v) {
  switch (key.task) {
    case Task::WBMC: return "Answer: " + join(v.get<std::vector<std::string>>(), ", ");
    case Task::WBOD:
      if (key.difficulty == Difficulty::hard)
        return "Answer: time: " + level_display(overlap_level_from_string(v.at(0).get<std::string>())) +
               ", frequency: " + level_display(overlap_level_from_string(v.at(1).get<std::string>()));
      return "Answer: " + overlap_display(overlap_type_from_string(v.get<std::string>()));
    case Task::WTR: return "Answer: " + v.get<std::string>();
    case Task::WNUC:
      if (key.difficulty == Difficulty::hard) return "Answer: " + std::to_string(v.get<long>());
      return "Answer: [" + std::to_string(v.at(0).get<long>()) + ", " + std::to_string(v.at(1).get<long>()) + "]";
    case Task::NRIE: {
      const auto s = v.get<std::string>();
      if (key.attribute == "ssb_pattern" && s != "N/A") return "Answer: Case " + s;
      if (key.attribute == "scs") return "Answer: " + s + " kHz";
      return "Answer: " + s;
    }
  }
  return {};
}

double score_answer(const ItemKey& key, const json& truth, const ParsedAnswer& parsed, const BenchOptions& opts) {
  if (!parsed.ok) return 0.0;
  if (key.task == Task::WBMC) {
    const auto t = truth.get<std::vector<std::string>>();
    const auto p = parsed.value.get<std::vector<std::string>>();
    if (key.difficulty == Difficulty::easy && opts.wbmc_easy == WbmcEasyMode::set) return score_wbmc_set(t, p);
    return score_wbmc(t, p);
  }
  return parsed.value == truth ? 1.0 : 0.0;
}

// -------------------------------------------------------- datasets ----

std::vector<BenchmarkItem> candidate_items(const SceneEntry& entry, Task task, Difficulty difficulty,
                                           const BenchOptions& opts) {
  const auto& rec = entry.rec;
  std::vector<BenchmarkItem> out;
  if (rec.signals.empty()) return out;
  const auto tech = scene::scene_technology(rec);
  auto base = [&](std::string suffix) {
    BenchmarkItem it;
    it.item_id = item_prefix(task, difficulty) + "-" + rec.scene_id + suffix;
    it.scene_id = rec.scene_id;
    it.image_path = entry.image_path;
    it.task = task;
    it.difficulty = difficulty;
    return it;
  };
  switch (task) {
    case Task::WBMC: {
      if (tech != Technology::GENERIC) break;
      const bool fam = difficulty == Difficulty::easy;
      auto it = base("");
      const auto truth = wbmc_truth(rec, fam);
      it.ground_truth = truth;
      it.group = "S=" + std::to_string(truth.size());
      if (difficulty == Difficulty::easy) {
        it.question = opts.wbmc_easy == WbmcEasyMode::set
                          ? "Which modulation families (psk, qam, fsk, ofdm, am, fm) are present in this spectrogram? "
                            "List each family once, comma-separated."
                          : "Identify the modulation family (psk, qam, fsk, ofdm, am, fm) of every signal in this "
                            "spectrogram, ordered by start time. Answer with a comma-separated list.";
      } else if (difficulty == Difficulty::medium) {
        std::set<std::string> chosen(truth.begin(), truth.end());
        std::vector<std::string> pool;
        for (const auto& n : scene::default_registry().names())
          if (!chosen.count(n)) pool.push_back(n);
        // Seeded by scene content so renaming a scene keeps its candidate list.
        Rng rng(derive_seed(rec.seed, "wbmc-distractors"));
        rng.shuffle(pool);
        const std::size_t want = std::min(pool.size(), chosen.size() * static_cast<std::size_t>(opts.distractors_per_class));
        std::vector<std::string> cands(chosen.begin(), chosen.end());
        cands.insert(cands.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(want));
        std::sort(cands.begin(), cands.end());
        it.candidate_list = cands;
        it.question = "Identify the modulation class of every signal in this spectrogram, ordered by start time. "
                      "Choose from: " + join(cands, ", ") + ". Answer with a comma-separated list.";
      } else {
        it.question = "Identify the modulation class of every signal in this spectrogram, ordered by start time. "
                      "Possible classes: " + join(scene::default_registry().names(), ", ") +
                      ". Answer with a comma-separated list.";
      }
      out.push_back(std::move(it));
      break;
    }
    case Task::WBOD: {
      if (tech != Technology::GENERIC || rec.signals.size() < 2) break;
      if (difficulty == Difficulty::easy) {
        auto it = base("");
        it.ground_truth = to_string(global_overlap_label(rec));
        it.group = it.ground_truth.get<std::string>();
        it.question = "Considering all signals in this spectrogram, do they overlap in time, in frequency, in both, "
                      "or neither? Answer with one of: neither, time-only, frequency-only, both.";
        out.push_back(std::move(it));
        break;
      }
      for (const auto& [a, b] : adjacent_pairs(rec)) {
        const auto& sa = by_id(rec, a);
        const auto& sb = by_id(rec, b);
        auto it = base("-" + std::to_string(a) + "-" + std::to_string(b));
        it.attribute = std::to_string(a) + "," + std::to_string(b);
        if (difficulty == Difficulty::medium) {
          it.ground_truth = to_string(overlap_type(sa, sb));
          it.question = "Consider " + describe_signal(sa) + " and " + describe_signal(sb) +
                        ". How do they overlap? Answer with one of: neither, time-only, frequency-only, both.";
        } else {
          const auto [rt, rf] = overlap_ratios(sa, sb);
          it.ground_truth = json::array({to_string(quantize_ratio(rt)), to_string(quantize_ratio(rf))});
          it.question = "Consider " + describe_signal(sa) + " and " + describe_signal(sb) +
                        ". How strongly do they overlap in time and in frequency? Answer in the form "
                        "'time: <level>, frequency: <level>' with levels none, slightly, considerably, almost fully.";
        }
        it.group = it.ground_truth.dump();
        out.push_back(std::move(it));
      }
      break;
    }
    case Task::WTR: {
      if (tech == Technology::GENERIC || difficulty != Difficulty::easy) break;
      auto it = base("");
      it.ground_truth = wtr_label(rec);
      it.group = it.ground_truth.get<std::string>();
      it.question = "Which technology and link direction does this spectrogram show? Answer with one of: " +
                    join(kWtrLabels, ", ") + ".";
      out.push_back(std::move(it));
      break;
    }
    case Task::WNUC: {
      const auto* w = scene::wlan_attrs(rec);
      if (!w) break;
      auto it = base("");
      it.group = w->standard;
      const int u = w->user_count;
      if (difficulty == Difficulty::hard) {
        it.ground_truth = wnuc_hard_target(u, opts.wnuc_tie);
        it.question = "How many distinct WLAN users are active in this spectrogram? Give the exact number if it is "
                      "below 10, otherwise round to the nearest multiple of 10. Answer with a single integer.";
      } else {
        const int b = difficulty == Difficulty::easy ? 15 : 10;
        const auto [s, e] = wnuc_bucket(u, b);
        it.ground_truth = json::array({s, e});
        it.question = "How many distinct WLAN users are active in this spectrogram? Answer with the bucket [s, e] of "
                      "width " + std::to_string(b) + " that contains the count (buckets [1, " + std::to_string(b) +
                      "], [" + std::to_string(b + 1) + ", " + std::to_string(2 * b) + "], ...).";
      }
      out.push_back(std::move(it));
      break;
    }
    case Task::NRIE: {
      if (!scene::nr_attrs(rec)) break;
      const auto link = scene::scene_link(rec);
      for (auto a : kAllNrAttributes) {
        if (!nrie_applicable(a, link) || nrie_difficulty(a) != difficulty) continue;
        auto it = base("-" + std::string(to_string(a)));
        it.attribute = std::string(to_string(a));
        it.ground_truth = nrie_truth(rec, a);
        it.group = std::string(scene::to_string(link));
        switch (a) {
          case NrAttribute::ue_count:
            it.question = "How many distinct UE transmissions are present in this 5G NR spectrogram? Answer with a single integer.";
            break;
          case NrAttribute::scs:
            it.question = "What is the subcarrier spacing of this 5G NR signal? Answer with one of: 15, 30, 60, 120 (kHz).";
            break;
          case NrAttribute::ssb_pattern:
            it.question = "Which SSB pattern (A, B, C, D) does this 5G NR downlink use? Answer N/A if no SSB is present.";
            break;
          case NrAttribute::csirs_count:
            it.question = "How many CSI-RS resources are configured in this 5G NR downlink? Answer with a single integer.";
            break;
          case NrAttribute::srs_count:
            it.question = "How many SRS resources are present in this 5G NR uplink? Answer with a single integer.";
            break;
        }
        out.push_back(std::move(it));
      }
      break;
    }
  }
  return out;
}

std::vector<BenchmarkItem> build_benchmark(std::span<const SceneEntry> scenes, Task task, Difficulty difficulty,
                                           std::size_t n, std::uint64_t seed, bool per_group,
                                           const BenchOptions& opts) {
  std::vector<BenchmarkItem> pool;
  for (const auto& s : scenes) {
    auto items = candidate_items(s, task, difficulty, opts);
    pool.insert(pool.end(), std::make_move_iterator(items.begin()), std::make_move_iterator(items.end()));
  }
  std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.item_id < b.item_id; });
  Rng rng(derive_seed(seed, "bench-" + item_prefix(task, difficulty)));
  std::vector<BenchmarkItem> out;
  const std::string cell = std::string(to_string(task)) + "/" + std::string(to_string(difficulty));
  if (!per_group) {
    if (n > pool.size())
      throw InputError("insufficient scenes for " + cell + ": need " + std::to_string(n) + " items, have " +
                       std::to_string(pool.size()) + " (deficit " + std::to_string(n - pool.size()) + ")");
    rng.shuffle(pool);
    if (n > 0) pool.resize(n);
    out = std::move(pool);
  } else {
    std::map<std::string, std::vector<BenchmarkItem>> groups;
    if (task == Task::WTR)
      for (const auto& l : kWtrLabels) groups[l];
    if (task == Task::WNUC) groups["11ax"], groups["11be"];
    for (auto& it : pool) groups[it.group].push_back(std::move(it));
    std::string deficits;
    for (auto& [g, items] : groups)
      if (n > items.size())
        deficits += (deficits.empty() ? "" : "; ") + g + " needs " + std::to_string(n) + ", has " + std::to_string(items.size());
    if (!deficits.empty()) throw InputError("insufficient scenes for " + cell + ": " + deficits);
    for (auto& [g, items] : groups) {
      rng.shuffle(items);
      if (n > 0) items.resize(n);
      out.insert(out.end(), std::make_move_iterator(items.begin()), std::make_move_iterator(items.end()));
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.item_id < b.item_id; });
  return out;
}

std::vector<Prediction> oracle_predictions(std::span<const BenchmarkItem> items) {
  std::vector<Prediction> out;
  for (const auto& it : items) out.push_back({it.item_id, render_answer(it.key(), it.ground_truth)});
  return out;
}

std::vector<Prediction> shuffled_predictions(std::span<const BenchmarkItem> items, std::uint64_t seed) {
  auto out = oracle_predictions(items);
  std::map<std::string, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < items.size(); ++i)
    cells[item_prefix(items[i].task, items[i].difficulty)].push_back(i);
  for (auto& [name, idx] : cells) {
    std::vector<std::string> answers;
    for (auto i : idx) answers.push_back(out[i].raw_text);
    Rng rng(derive_seed(seed, "shuffle-" + name));
    rng.shuffle(answers);
    for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]].raw_text = answers[k];
  }
  return out;
}

std::vector<std::vector<double>> CellReport::confusion_normalized() const {
  std::vector<std::vector<double>> out;
  for (const auto& row : confusion) {
    double total = 0.0;
    for (auto v : row) total += static_cast<double>(v);
    std::vector<double> r;
    for (auto v : row) r.push_back(total > 0 ? static_cast<double>(v) / total : 0.0);
    out.push_back(r);
  }
  return out;
}

const CellReport* ScoreReport::find(Task t, Difficulty d) const {
  for (const auto& c : cells)
    if (c.task == t && c.difficulty == d) return &c;
  return nullptr;
}

ScoreReport score(std::span<const BenchmarkItem> items, std::span<const Prediction> preds, const BenchOptions& opts) {
  ScoreReport rep;
  std::map<std::string, const Prediction*> by_id;
  std::set<std::string> known;
  for (const auto& it : items) known.insert(it.item_id);
  for (const auto& p : preds) {
    if (!known.count(p.item_id)) {
      rep.warnings.push_back("prediction for unknown item '" + p.item_id + "' ignored");
      continue;
    }
    if (!by_id.emplace(p.item_id, &p).second) rep.warnings.push_back("duplicate prediction for '" + p.item_id + "' ignored");
  }
  std::map<std::pair<int, int>, CellReport> cells;
  for (const auto& it : items) {
    auto& c = cells.try_emplace({static_cast<int>(it.task), static_cast<int>(it.difficulty)},
                                CellReport{it.task, it.difficulty, 0, 0.0, 0, 0, {}, {}}).first->second;
    if (it.task == Task::WTR && c.confusion.empty())
      c.confusion.assign(kWtrLabels.size(), std::vector<std::size_t>(kWtrLabels.size() + 1, 0));
    ++c.n;
    auto& cls = c.per_class[it.group];
    ++cls.n;
    auto found = by_id.find(it.item_id);
    ParsedAnswer parsed;
    if (found == by_id.end()) {
      ++c.missing;
      parsed.reason = "missing prediction";
    } else {
      parsed = parse_answer(found->second->raw_text, it.key(), opts);
      if (!parsed.ok) ++c.parse_failures;
    }
    const double s = score_answer(it.key(), it.ground_truth, parsed, opts);
    c.score_sum += s;
    cls.score += s;
    if (it.task == Task::WTR) {
      const auto row = std::find(kWtrLabels.begin(), kWtrLabels.end(), it.ground_truth.get<std::string>()) - kWtrLabels.begin();
      std::size_t col = kWtrLabels.size();
      if (parsed.ok)
        col = static_cast<std::size_t>(std::find(kWtrLabels.begin(), kWtrLabels.end(), parsed.value.get<std::string>()) -
                                       kWtrLabels.begin());
      ++c.confusion[static_cast<std::size_t>(row)][col];
    }
  }
  for (auto& [k, c] : cells) rep.cells.push_back(std::move(c));
  return rep;
}

json ScoreReport::to_json() const {
  json cells_j = json::array();
  for (const auto& c : cells) {
    json pc = json::object();
    for (const auto& [g, s] : c.per_class) pc[g] = {{"n", s.n}, {"accuracy", s.n ? s.score / s.n : 0.0}};
    json cj = {{"task", to_string(c.task)},
               {"difficulty", to_string(c.difficulty)},
               {"n", c.n},
               {"accuracy", c.accuracy()},
               {"parse_failures", c.parse_failures},
               {"parse_failure_rate", c.parse_failure_rate()},
               {"missing", c.missing},
               {"per_class", pc}};
    if (!c.confusion.empty()) {
      auto cols = kWtrLabels;
      cols.push_back("unparsed");
      cj["confusion"] = {{"rows", kWtrLabels}, {"cols", cols}, {"counts", c.confusion}, {"normalized", c.confusion_normalized()}};
    }
    cells_j.push_back(cj);
  }
  return {{"cells", cells_j}, {"warnings", warnings}};
}

std::string ScoreReport::confusion_csv() const {
  for (const auto& c : cells) {
    if (c.confusion.empty()) continue;
    std::ostringstream out;
    out << "truth";
    for (const auto& l : kWtrLabels) out << "," << l;
    out << ",unparsed\n";
    const auto norm = c.confusion_normalized();
    for (std::size_t r = 0; r < norm.size(); ++r) {
      out << kWtrLabels[r];
      for (double v : norm[r]) out << "," << fixed(v, 4);
      out << "\n";
    }
    return out.str();
  }
  return {};
}

json to_json(const BenchmarkItem& it) {
  json j = {{"item_id", it.item_id},       {"scene_id", it.scene_id},
            {"image_path", it.image_path}, {"task", to_string(it.task)},
            {"difficulty", to_string(it.difficulty)}, {"question", it.question},
            {"ground_truth", it.ground_truth}, {"group", it.group}};
  if (!it.candidate_list.empty()) j["candidate_list"] = it.candidate_list;
  if (!it.attribute.empty()) j["attribute"] = it.attribute;
  return j;
}

BenchmarkItem item_from_json(const json& j) {
  BenchmarkItem it;
  it.item_id = j.at("item_id").get<std::string>();
  it.scene_id = j.at("scene_id").get<std::string>();
  it.image_path = j.value("image_path", "");
  it.task = task_from_string(j.at("task").get<std::string>());
  it.difficulty = difficulty_from_string(j.at("difficulty").get<std::string>());
  it.question = j.value("question", "");
  it.ground_truth = j.at("ground_truth");
  it.candidate_list = j.value("candidate_list", std::vector<std::string>{});
  it.attribute = j.value("attribute", "");
  it.group = j.value("group", "");
  return it;
}

namespace {

template <typename F>
void write_jsonl(const std::string& path, std::size_t count, F row) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (std::size_t i = 0; i < count; ++i) out << row(i).dump() << "\n";
  if (!out) throw IoError("write failed for '" + path + "'");
}

template <typename F>
void read_jsonl(const std::string& path, F row) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    try {
      row(json::parse(line));
    } catch (const json::exception& e) {
      throw InputError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

void write_items(std::span<const BenchmarkItem> items, const std::string& path) {
  write_jsonl(path, items.size(), [&](std::size_t i) { return to_json(items[i]); });
}

std::vector<BenchmarkItem> read_items(const std::string& path) {
  std::vector<BenchmarkItem> out;
  read_jsonl(path, [&](const json& j) { out.push_back(item_from_json(j)); });
  return out;
}

void write_predictions(std::span<const Prediction> preds, const std::string& path) {
  write_jsonl(path, preds.size(), [&](std::size_t i) { return json{{"item_id", preds[i].item_id}, {"raw_text", preds[i].raw_text}}; });
}

std::vector<Prediction> read_predictions(const std::string& path) {
  std::vector<Prediction> out;
  read_jsonl(path, [&](const json& j) { out.push_back({j.at("item_id").get<std::string>(), j.value("raw_text", "")}); });
  return out;
}

}  // namespace rfsynth::bench
