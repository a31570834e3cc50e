#include "rfsynth/caption/caption.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "rfsynth/bench/overlap.hpp"
#include "rfsynth/core/error.hpp"
#include "rfsynth/core/hash.hpp"
#include "rfsynth/scene/modclass.hpp"

namespace rfsynth::caption {

namespace {

using scene::Link;
using scene::SceneRecord;
using scene::SignalRecord;
using scene::Technology;
using Variants = std::vector<std::string_view>;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string fill(std::string_view pattern, std::string_view value) {
  std::string out(pattern);
  for (std::size_t p; (p = out.find("{v}")) != std::string::npos;) out.replace(p, 3, value);
  return out;
}

std::string_view choose(std::uint64_t seed, std::string_view key, std::string_view value, const Variants& v) {
  const auto h = fnv1a64(std::string(key) + "=" + std::string(value), splitmix64(seed));
  return v[h % v.size()];
}

std::string plural(int n, std::string_view one, std::string_view many) {
  return std::to_string(n) + " " + std::string(n == 1 ? one : many);
}

/// Accumulates text and facts for one level (or one signal within a level).
struct Renderer {
  std::uint64_t seed;
  Level level;
  int signal;
  std::vector<Fact>* facts;

  std::string emit(std::string_view key, const std::string& value, const Variants& variants) {
    auto text = fill(choose(seed, key, value, variants), value);
    facts->push_back({level, std::string(key), value, text, signal});
    return text;
  }
};

std::string sentence(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  if (s.empty() || s.back() != '.') s += '.';
  return s;
}

std::string role_display(const std::string& role) {
  if (role == "pdsch") return "PDSCH";
  if (role == "pusch") return "PUSCH";
  if (role == "ssb") return "SSB";
  if (role == "csirs") return "CSI-RS";
  if (role == "srs") return "SRS";
  if (role == "pdcch") return "PDCCH";
  if (role == "sync") return "PSS/SSS";
  if (role == "ru") return "RU";
  return role;
}

int count_role(const SceneRecord& rec, std::string_view role) {
  return static_cast<int>(std::count_if(rec.signals.begin(), rec.signals.end(),
                                        [&](const SignalRecord& s) { return s.role == role; }));
}

std::string overlap_phrase(bench::OverlapType t) {
  switch (t) {
    case bench::OverlapType::neither: return "no overlap";
    case bench::OverlapType::time_only: return "overlap in time only";
    case bench::OverlapType::frequency_only: return "overlap in frequency only";
    case bench::OverlapType::both: return "overlap in both time and frequency";
  }
  return {};
}

std::string opaque(const SceneRecord& rec, const std::string& key) {
  if (rec.signals.empty()) return {};
  const auto* m = std::get_if<scene::OpaqueAttrs>(&rec.signals.front().tech_attrs);
  if (!m) return {};
  auto it = m->find(key);
  return it == m->end() ? std::string() : it->second;
}

std::string render_summary(const SceneRecord& rec, std::uint64_t seed, std::vector<Fact>& facts) {
  const auto tech = scene::scene_technology(rec);
  if (tech == Technology::GENERIC) {
    const int n = static_cast<int>(rec.signals.size());
    const std::string v = std::to_string(n);
    std::string text = fill(choose(seed, "signal_count", v,
                                   {"The spectrogram contains {v} signal%s.", "{v} distinct signal%s are present in this wideband capture.",
                                    "This wideband capture holds {v} signal%s.", "A wideband scene with {v} signal%s is shown."}),
                            v);
    const auto p = text.find("%s");
    text.replace(p, 2, n == 1 ? "" : "s");
    if (n == 1) {
      if (auto q = text.find("signal are"); q != std::string::npos) text.replace(q, 10, "signal is");
    }
    facts.push_back({Level::summary, "signal_count", v, text, -1});
    return text;
  }
  const auto link = scene::scene_link(rec);
  const std::string tname = technology_display(tech);
  const std::string lname = link_display(link);
  std::string subject = tname + (lname.empty() ? "" : " " + lname);
  std::string count_key, count_value, count_phrase;
  if (const auto* nr = scene::nr_attrs(rec)) {
    count_key = "ue_count";
    count_value = std::to_string(nr->ue_count);
    count_phrase = plural(nr->ue_count, "UE", "UEs");
  } else if (const auto* w = scene::wlan_attrs(rec)) {
    count_key = "user_count";
    count_value = std::to_string(w->user_count);
    count_phrase = plural(w->user_count, "user", "users");
  } else if (tech == Technology::LTE) {
    count_key = "ue_count";
    count_value = opaque(rec, "ue_count");
    count_phrase = plural(std::stoi(count_value), "UE", "UEs");
  }
  const Variants with_count = {"The spectrogram shows a {s} capture with {c} active.",
                               "A {s} capture in which {c} are scheduled.",
                               "This is a {s} capture carrying {c}.",
                               "The capture contains {s} traffic from {c}."};
  const Variants without_count = {"The spectrogram shows a {s} capture.", "A {s} transmission is captured.",
                                  "This is a {s} capture.", "The capture contains a {s} signal."};
  const std::string key = tname + "|" + lname + "|" + count_value;
  std::string text(choose(seed, "summary", key, count_key.empty() ? without_count : with_count));
  auto replace = [&](std::string_view tok, const std::string& val) {
    if (auto p = text.find(tok); p != std::string::npos) text.replace(p, tok.size(), val);
  };
  replace("{s}", subject);
  replace("{c}", count_phrase);
  facts.push_back({Level::summary, "technology", tname, text, -1});
  if (!lname.empty()) facts.push_back({Level::summary, "link", lname, text, -1});
  if (!count_key.empty()) facts.push_back({Level::summary, count_key, count_value, text, -1});
  return text;
}

std::vector<std::string> render_global_visual(const SceneRecord& rec, std::uint64_t seed, std::vector<Fact>& facts) {
  Renderer r{seed, Level::global_visual, -1, &facts};
  std::vector<std::string> out;
  const auto tech = scene::scene_technology(rec);
  if (const auto* nr = scene::nr_attrs(rec)) {
    if (scene::scene_link(rec) == Link::DL) {
      const int k = count_role(rec, "ssb");
      if (k == 0)
        out.push_back(r.emit("ssb_bursts", "No", {"No SSB bursts are visible.", "No SSB blocks appear in the capture.",
                                                  "No SSB bursts can be seen.", "No synchronization blocks are visible."}));
      else
        out.push_back(r.emit("ssb_bursts", std::to_string(k),
                             {"{v} SSB bursts appear as short narrowband blocks.", "{v} SSB blocks are visible.",
                              "The capture shows {v} SSB bursts.", "SSB bursts are visible at {v} positions."}));
      if (nr->csirs_count == 0)
        out.push_back(r.emit("csirs_count", "No",
                             {"No CSI-RS traces are visible.", "No CSI-RS traces are visible across the carrier.",
                              "No CSI-RS traces are visible, so CSI-RS transmission appears disabled.",
                              "No CSI-RS traces are visible in any symbol."}));
      else
        out.push_back(r.emit("csirs_count", std::to_string(nr->csirs_count),
                             {"{v} CSI-RS symbols span the full carrier.", "The carrier shows {v} full-band CSI-RS traces.",
                              "{v} thin full-band CSI-RS lines are visible.", "CSI-RS appears in {v} symbols."}));
    } else {
      if (nr->srs_count == 0)
        out.push_back(r.emit("srs_count", "No", {"No SRS symbols are visible.", "No SRS traces appear at slot ends.",
                                                 "No sounding reference signals are visible.", "No SRS transmissions can be seen."}));
      else
        out.push_back(r.emit("srs_count", std::to_string(nr->srs_count),
                             {"{v} SRS symbols appear at slot ends.", "The capture shows {v} SRS transmissions.",
                              "{v} sounding reference signals are visible.", "SRS occupies {v} symbols."}));
    }
  } else if (tech == Technology::GENERIC) {
    if (rec.signals.size() >= 2)
      out.push_back(r.emit("overlap", overlap_phrase(bench::global_overlap_label(rec)),
                           {"The signals show {v}.", "Overall the scene exhibits {v}.",
                            "Across all signal pairs there is {v}.", "Taken together the bursts show {v}."}));
  } else if (tech == Technology::WLAN) {
    std::set<int> ppdus;
    for (const auto& s : rec.signals)
      if (const auto* w = std::get_if<scene::WlanAttrs>(&s.tech_attrs)) ppdus.insert(w->ru.ppdu);
    out.push_back(r.emit("ppdu_count", std::to_string(ppdus.size()),
                         {"{v} PPDUs are visible in time.", "The capture contains {v} PPDUs.",
                          "{v} separate PPDU bursts appear.", "Time axis shows {v} PPDUs."}));
  } else if (tech == Technology::BT) {
    out.push_back(r.emit("hop_count", std::to_string(count_role(rec, "hop")),
                         {"{v} hop bursts are visible.", "The capture shows {v} frequency hops.",
                          "{v} short hopping bursts appear.", "Hopping activity shows {v} bursts."}));
  } else if (tech == Technology::UMTS || tech == Technology::DVBS2) {
    out.push_back(r.emit("carrier_count", std::to_string(count_role(rec, "carrier")),
                         {"{v} continuous carriers are visible.", "The capture shows {v} carriers.",
                          "{v} carriers occupy the full duration.", "Spectrum shows {v} steady carriers."}));
  }
  for (auto& s : out) s = sentence(s);
  for (auto& f : facts)
    if (f.level == Level::global_visual) f.text = sentence(f.text);
  return out;
}

std::vector<std::string> render_global_context(const SceneRecord& rec, std::uint64_t seed, std::vector<Fact>& facts) {
  Renderer r{seed, Level::global_context, -1, &facts};
  std::vector<std::string> out;
  out.push_back(r.emit("sample_rate", fixed(rec.fs / 1e6, 2) + " MHz",
                       {"The capture is sampled at {v}.", "Sample rate is {v}.", "IQ samples are taken at {v}.",
                        "The receiver samples at {v}."}));
  out.push_back(r.emit("duration", fixed(rec.duration * 1e3, 3) + " ms",
                       {"It spans {v}.", "The observation window is {v}.", "Capture length is {v}.",
                        "The recording lasts {v}."}));
  if (const auto* nr = scene::nr_attrs(rec)) {
    out.push_back(r.emit("scs", std::to_string(nr->scs_khz) + " kHz",
                         {"The numerology uses {v} subcarrier spacing.", "Subcarrier spacing is {v}.",
                          "It is configured with {v} SCS.", "The OFDM grid has {v} spacing."}));
    if (scene::scene_link(rec) == Link::DL) {
      if (nr->ssb_pattern == "NA")
        out.push_back(r.emit("ssb_pattern", "N/A", {"The SSB pattern is {v}.", "SSB pattern: {v}.",
                                                    "No SSB is configured, so the pattern is {v}.", "SSB case is {v}."}));
      else
        out.push_back(r.emit("ssb_pattern", "Case " + nr->ssb_pattern,
                             {"SSBs follow {v}.", "The SSB pattern is {v}.", "SSB timing matches {v}.",
                              "Synchronization blocks use {v}."}));
    }
    out.push_back(r.emit("n_prb", std::to_string(nr->n_prb) + " PRBs",
                         {"The carrier spans {v}.", "Carrier width is {v}.", "{v} are configured.", "The grid has {v}."}));
  } else if (const auto* w = scene::wlan_attrs(rec)) {
    out.push_back(r.emit("standard", "802." + w->standard,
                         {"The PHY follows IEEE {v}.", "Frames use the {v} format.", "This is {v} OFDMA.",
                          "The standard is {v}."}));
    out.push_back(r.emit("channel", std::to_string(w->channel_mhz) + " MHz",
                         {"The channel is {v} wide.", "Channel width is {v}.", "It occupies a {v} channel.",
                          "A {v} channel is used."}));
  } else if (scene::scene_technology(rec) == Technology::LTE) {
    out.push_back(r.emit("n_prb", opaque(rec, "n_prb") + " PRBs",
                         {"The carrier spans {v}.", "Carrier width is {v}.", "{v} are configured.", "The grid has {v}."}));
  }
  for (const auto& imp : rec.impairments)
    out.push_back(r.emit("impairments", std::string(impair::to_string(imp.kind)) + " at level " + fixed(imp.lambda, 2),
                         {"The capture is impaired by {v}.", "An impairment is applied: {v}.",
                          "It includes {v}.", "Channel effects: {v}."}));
  for (auto& s : out) s = sentence(s);
  for (auto& f : facts)
    if (f.level == Level::global_context) f.text = sentence(f.text);
  return out;
}

std::vector<std::string> render_signal_visual(const SceneRecord& rec, const SignalRecord& s, const VisualAttrs& va,
                                              std::uint64_t seed, std::vector<Fact>& facts) {
  Renderer r{seed, Level::signal_visual, s.id, &facts};
  std::vector<std::string> parts;
  parts.push_back(r.emit("duration_tier", va.duration_tier,
                         {"{v} duration", "a {v} burst length", "{v} in time", "{v} time extent"}));
  parts.push_back(r.emit("time_fraction", fixed(100.0 * va.time_fraction, 1) + "%",
                         {"covering {v} of the capture", "active for {v} of the window", "{v} of the time axis",
                          "occupying {v} of the duration"}));
  parts.push_back(r.emit("start_time", fixed(s.t_interval.lo * 1e6, 1) + " us",
                         {"starting at {v}", "beginning at {v}", "onset at {v}", "first visible at {v}"}));
  parts.push_back(r.emit("band_fraction", fixed(100.0 * va.band_fraction, 2) + "%",
                         {"{v} of the band", "spanning {v} of the spectrum", "band occupancy {v}", "using {v} of the bandwidth"}));
  parts.push_back(r.emit("center_freq", fixed(s.f_center() / 1e6, 2) + " MHz",
                         {"centred at {v}", "around {v}", "at a centre frequency of {v}", "located at {v}"}));
  parts.push_back(r.emit("power_tier", va.power_tier,
                         {"{v} power", "{v} relative power", "appearing with {v} intensity", "{v} brightness"}));
  (void)rec;
  std::string line = "Signal " + std::to_string(s.id) + ": ";
  for (std::size_t i = 0; i < parts.size(); ++i) line += (i ? ", " : "") + parts[i];
  return {line + "."};
}

std::vector<std::string> render_signal_context(const SignalRecord& s, std::uint64_t seed, std::vector<Fact>& facts) {
  Renderer r{seed, Level::signal_context, s.id, &facts};
  std::vector<std::string> parts;
  if (s.role != "burst")
    parts.push_back(r.emit("role", role_display(s.role),
                           {"{v} allocation", "a {v} region", "the {v} part of the frame", "{v} resource"}));
  if (s.user >= 0) {
    const bool wlan = s.technology == Technology::WLAN;
    parts.push_back(r.emit("user", std::to_string(s.user),
                           wlan ? Variants{"for user {v}", "assigned to user {v}", "serving user {v}", "carrying user {v}"}
                                : Variants{"for UE {v}", "assigned to UE {v}", "serving UE {v}", "scheduled to UE {v}"}));
  }
  parts.push_back(r.emit("mod_class", s.mod_class, {"modulated with {v}", "{v} modulation", "carrying {v} symbols", "using {v}"}));
  parts.push_back(r.emit("family", std::string(scene::to_string(scene::family_of(s.mod_class))),
                         {"from the {v} family", "{v} family", "a member of the {v} family", "in the {v} class"}));
  std::string line = "Signal " + std::to_string(s.id) + ": ";
  for (std::size_t i = 0; i < parts.size(); ++i) line += (i ? ", " : "") + parts[i];
  return {line + "."};
}

}  // namespace

std::string_view to_string(Level l) {
  switch (l) {
    case Level::summary: return "summary";
    case Level::global_visual: return "global_visual";
    case Level::global_context: return "global_context";
    case Level::signal_visual: return "signal_visual";
    case Level::signal_context: return "signal_context";
  }
  return "?";
}

Level level_from_string(std::string_view s) {
  for (auto l : kAllLevels)
    if (to_string(l) == s) return l;
  throw ConfigError("unknown caption level '" + std::string(s) + "'");
}

std::vector<Level> LevelSet::levels() const {
  std::vector<Level> out;
  for (auto l : kAllLevels)
    if (contains(l)) out.push_back(l);
  return out;
}

Level level_of_field(std::string_view field) {
  for (const auto& f : kFieldLevels)
    if (f.field == field) return f.level;
  throw ConfigError("unknown caption field '" + std::string(field) + "'");
}

std::string duration_tier(double tf) {
  if (tf < kShortTimeFraction) return "short";
  if (tf < kModerateTimeFraction) return "moderate";
  return "long";
}

std::string power_tier(double snr, double lo, double hi, bool single) {
  if (single || !(hi > lo)) {
    if (snr < kLowSnrDb) return "low";
    if (snr < kModerateSnrDb) return "moderate";
    return "high";
  }
  const double third = (hi - lo) / 3.0;
  if (snr < lo + third) return "low";
  if (snr < lo + 2 * third) return "moderate";
  return "high";
}

std::vector<VisualAttrs> derive_visual_attrs(const SceneRecord& rec) {
  std::vector<VisualAttrs> out;
  if (rec.signals.empty()) return out;
  double lo = rec.signals.front().snr_db, hi = lo;
  for (const auto& s : rec.signals) {
    lo = std::min(lo, s.snr_db);
    hi = std::max(hi, s.snr_db);
  }
  const bool single = rec.signals.size() == 1;
  for (const auto& s : rec.signals) {
    VisualAttrs v;
    v.signal_id = s.id;
    v.time_fraction = rec.duration > 0.0 ? std::clamp(s.t_interval.length() / rec.duration, 0.0, 1.0) : 0.0;
    v.band_fraction = rec.fs > 0.0 ? std::clamp(s.bandwidth() / rec.fs, 0.0, 1.0) : 0.0;
    v.duration_tier = duration_tier(v.time_fraction);
    v.power_tier = power_tier(s.snr_db, lo, hi, single);
    out.push_back(v);
  }
  return out;
}

std::string technology_display(Technology t) {
  switch (t) {
    case Technology::NR: return "5G-NR";
    case Technology::LTE: return "LTE";
    case Technology::UMTS: return "UMTS";
    case Technology::WLAN: return "Wi-Fi";
    case Technology::DVBS2: return "DVB-S2";
    case Technology::BT: return "Bluetooth";
    case Technology::GENERIC: return "wideband";
  }
  return "?";
}

std::string link_display(Link l) {
  switch (l) {
    case Link::DL: return "downlink";
    case Link::UL: return "uplink";
    case Link::NA: return "";
  }
  return "";
}

CaptionRecord build_caption(const SceneRecord& rec, const std::vector<VisualAttrs>& attrs, LevelSet levels,
                            std::uint64_t seed) {
  if (levels.empty()) throw ConfigError("caption level set must be nonempty");
  if (attrs.size() != rec.signals.size()) throw InputError("visual attributes do not match the scene's signals");
  CaptionRecord c;
  c.scene_id = rec.scene_id;
  c.levels = levels;
  if (levels.contains(Level::summary)) c.summary = render_summary(rec, seed, c.facts);
  if (levels.contains(Level::global_visual)) c.global_visual = render_global_visual(rec, seed, c.facts);
  if (levels.contains(Level::global_context)) c.global_context = render_global_context(rec, seed, c.facts);
  if (levels.contains(Level::signal_visual))
    for (std::size_t i = 0; i < rec.signals.size(); ++i)
      c.signal_visual.push_back(render_signal_visual(rec, rec.signals[i], attrs[i], seed, c.facts));
  if (levels.contains(Level::signal_context))
    for (const auto& s : rec.signals) c.signal_context.push_back(render_signal_context(s, seed, c.facts));

  nlohmann::json va = nlohmann::json::array();
  for (const auto& v : attrs)
    va.push_back({{"signal_id", v.signal_id}, {"duration_tier", v.duration_tier}, {"power_tier", v.power_tier},
                  {"band_fraction", v.band_fraction}, {"time_fraction", v.time_fraction}});
  c.attrs = {{"technology", scene::to_string(scene::scene_technology(rec))},
             {"link", scene::to_string(scene::scene_link(rec))},
             {"num_signals", rec.signals.size()},
             {"visual", va}};
  if (!rec.signals.empty()) {
    nlohmann::json sig = rec.signals.front();
    c.attrs["tech_attrs"] = sig.at("tech_attrs");
  }
  return c;
}

std::string CaptionRecord::render(LevelSet which) const {
  std::string out;
  auto add = [&](const std::string& line) {
    if (!line.empty()) out += line + "\n";
  };
  if (which.contains(Level::summary)) add(summary);
  if (which.contains(Level::global_visual))
    for (const auto& l : global_visual) add(l);
  if (which.contains(Level::global_context))
    for (const auto& l : global_context) add(l);
  if (which.contains(Level::signal_visual))
    for (const auto& v : signal_visual)
      for (const auto& l : v) add(l);
  if (which.contains(Level::signal_context))
    for (const auto& v : signal_context)
      for (const auto& l : v) add(l);
  return out;
}

void to_json(nlohmann::json& j, const CaptionRecord& c) {
  nlohmann::json facts = nlohmann::json::array();
  for (const auto& f : c.facts)
    facts.push_back({{"level", to_string(f.level)}, {"key", f.key}, {"value", f.value}, {"text", f.text}, {"signal", f.signal}});
  nlohmann::json levels = nlohmann::json::array();
  for (auto l : c.levels.levels()) levels.push_back(to_string(l));
  j = {{"scene_id", c.scene_id},           {"summary", c.summary},
       {"global_visual", c.global_visual}, {"global_context", c.global_context},
       {"signal_visual", c.signal_visual}, {"signal_context", c.signal_context},
       {"attrs", c.attrs},                 {"facts", facts},
       {"levels", levels}};
}

void from_json(const nlohmann::json& j, CaptionRecord& c) {
  c.scene_id = j.at("scene_id").get<std::string>();
  c.summary = j.at("summary").get<std::string>();
  c.global_visual = j.at("global_visual").get<std::vector<std::string>>();
  c.global_context = j.at("global_context").get<std::vector<std::string>>();
  c.signal_visual = j.at("signal_visual").get<std::vector<std::vector<std::string>>>();
  c.signal_context = j.at("signal_context").get<std::vector<std::vector<std::string>>>();
  c.attrs = j.value("attrs", nlohmann::json::object());
  c.facts.clear();
  for (const auto& f : j.value("facts", nlohmann::json::array()))
    c.facts.push_back({level_from_string(f.at("level").get<std::string>()), f.at("key").get<std::string>(),
                       f.at("value").get<std::string>(), f.at("text").get<std::string>(), f.value("signal", -1)});
  c.levels = {};
  for (const auto& l : j.value("levels", nlohmann::json::array())) c.levels.insert(level_from_string(l.get<std::string>()));
}

std::vector<std::string> write_captions(const std::vector<CaptionRecord>& caps, const std::string& dir,
                                        std::size_t shard_size) {
  if (shard_size == 0) throw ConfigError("shard size must be positive");
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  for (std::size_t start = 0, shard = 0; start < caps.size(); start += shard_size, ++shard) {
    char name[48];
    std::snprintf(name, sizeof name, "captions-%05zu.jsonl", shard);
    const auto path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    for (std::size_t i = start; i < std::min(caps.size(), start + shard_size); ++i) out << nlohmann::json(caps[i]).dump() << "\n";
    if (!out) throw IoError("write failed for caption shard " + std::to_string(shard));
    paths.push_back(path);
  }
  return paths;
}

std::vector<CaptionRecord> read_captions(const std::string& dir) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(dir)) throw IoError("caption directory '" + dir + "' not found");
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".jsonl" && e.path().filename().string().rfind("captions-", 0) == 0) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<CaptionRecord> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    for (std::string line; std::getline(in, line);)
      if (!line.empty()) out.push_back(nlohmann::json::parse(line).get<CaptionRecord>());
  }
  return out;
}

}  // namespace rfsynth::caption
