#include "rfsynth/scene/types.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "rfsynth/core/error.hpp"

namespace rfsynth::scene {

using nlohmann::json;

std::string_view to_string(Technology t) {
  switch (t) {
    case Technology::NR: return "NR";
    case Technology::LTE: return "LTE";
    case Technology::UMTS: return "UMTS";
    case Technology::WLAN: return "WLAN";
    case Technology::DVBS2: return "DVBS2";
    case Technology::BT: return "BT";
    case Technology::GENERIC: return "GENERIC";
  }
  return "GENERIC";
}

std::string_view to_string(Link l) {
  switch (l) {
    case Link::DL: return "DL";
    case Link::UL: return "UL";
    case Link::NA: return "NA";
  }
  return "NA";
}

Technology technology_from_string(std::string_view s) {
  for (auto t : {Technology::NR, Technology::LTE, Technology::UMTS, Technology::WLAN,
                 Technology::DVBS2, Technology::BT, Technology::GENERIC})
    if (to_string(t) == s) return t;
  throw ConfigError("unknown technology: " + std::string(s));
}

Link link_from_string(std::string_view s) {
  for (auto l : {Link::DL, Link::UL, Link::NA})
    if (to_string(l) == s) return l;
  throw ConfigError("unknown link: " + std::string(s));
}

std::size_t SceneRecord::num_samples() const {
  return static_cast<std::size_t>(std::llround(duration * fs));
}

Technology scene_technology(const SceneRecord& rec) {
  if (rec.signals.empty()) return Technology::GENERIC;
  return rec.signals.front().technology;
}

Link scene_link(const SceneRecord& rec) {
  if (rec.signals.empty()) return Link::NA;
  return rec.signals.front().link;
}

const NrAttrs* nr_attrs(const SceneRecord& rec) {
  for (auto& s : rec.signals)
    if (auto* a = std::get_if<NrAttrs>(&s.tech_attrs)) return a;
  return nullptr;
}

const WlanAttrs* wlan_attrs(const SceneRecord& rec) {
  for (auto& s : rec.signals)
    if (auto* a = std::get_if<WlanAttrs>(&s.tech_attrs)) return a;
  return nullptr;
}

int wlan_distinct_users(const SceneRecord& rec) {
  std::set<int> users;
  for (auto& s : rec.signals)
    if (s.role == "ru" && s.user >= 0) users.insert(s.user);
  return static_cast<int>(users.size());
}

std::string check_signal(const SignalRecord& s, double fs, double duration) {
  // Allow half a sample of slack for interval endpoints derived from
  // sample indices.
  const double t_eps = 0.5 / fs;
  if (!(s.t_interval.lo < s.t_interval.hi)) return "t_order";
  if (!(s.f_interval.lo < s.f_interval.hi)) return "f_order";
  if (s.t_interval.lo < -t_eps || s.t_interval.hi > duration + t_eps) return "in_time";
  if (s.f_interval.lo < -fs / 2 * (1 + 1e-12) || s.f_interval.hi > fs / 2 * (1 + 1e-12))
    return "in_band";
  if (const auto* nr = std::get_if<NrAttrs>(&s.tech_attrs)) {
    if (s.link == Link::UL && (nr->ssb_pattern != "NA" || nr->csirs_count != 0))
      return "nr_ul_has_dl_features";
    if (s.link == Link::DL && nr->srs_count != 0) return "nr_dl_has_srs";
    if (nr->ue_count < 1) return "nr_ue_count";
  }
  return {};
}

std::string check_scene(const SceneRecord& rec) {
  if (rec.signals.empty()) return "signals_nonempty";
  for (auto& s : rec.signals) {
    auto why = check_signal(s, rec.fs, rec.duration);
    if (!why.empty()) return why;
  }
  if (auto* w = wlan_attrs(rec)) {
    if (w->user_count != wlan_distinct_users(rec)) return "wlan_user_count";
  }
  return {};
}

void to_json(json& j, const Interval& v) { j = json::array({v.lo, v.hi}); }
void from_json(const json& j, Interval& v) {
  v.lo = j.at(0).get<double>();
  v.hi = j.at(1).get<double>();
}

namespace {

std::string_view waveform_name(Waveform w) {
  return w == Waveform::native ? "native" : "ofdm_grid";
}

json attrs_to_json(const TechAttrs& a) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, NrAttrs>) {
          return {{"kind", "NR"},           {"scs_khz", v.scs_khz},
                  {"ssb_pattern", v.ssb_pattern}, {"csirs_count", v.csirs_count},
                  {"srs_count", v.srs_count},   {"ue_count", v.ue_count},
                  {"n_prb", v.n_prb}};
        } else if constexpr (std::is_same_v<T, WlanAttrs>) {
          return {{"kind", "WLAN"},
                  {"standard", v.standard},
                  {"user_count", v.user_count},
                  {"channel_mhz", v.channel_mhz},
                  {"ru_layout", {{"ppdu", v.ru.ppdu}, {"ru_index", v.ru.ru_index},
                                 {"tones", v.ru.tones}}}};
        } else {
          json o = {{"kind", "other"}};
          o["attrs"] = v;
          return o;
        }
      },
      a);
}

TechAttrs attrs_from_json(const json& j) {
  const auto kind = j.value("kind", std::string("other"));
  if (kind == "NR") {
    NrAttrs a;
    a.scs_khz = j.at("scs_khz");
    a.ssb_pattern = j.at("ssb_pattern");
    a.csirs_count = j.at("csirs_count");
    a.srs_count = j.at("srs_count");
    a.ue_count = j.at("ue_count");
    a.n_prb = j.value("n_prb", 0);
    return a;
  }
  if (kind == "WLAN") {
    WlanAttrs a;
    a.standard = j.at("standard");
    a.user_count = j.at("user_count");
    a.channel_mhz = j.value("channel_mhz", 20);
    const auto& ru = j.at("ru_layout");
    a.ru = {ru.at("ppdu"), ru.at("ru_index"), ru.at("tones")};
    return a;
  }
  return j.value("attrs", OpaqueAttrs{});
}

}  // namespace

void to_json(json& j, const SignalRecord& v) {
  j = json{{"id", v.id},
           {"technology", to_string(v.technology)},
           {"link", to_string(v.link)},
           {"mod_class", v.mod_class},
           {"t_interval", v.t_interval},
           {"f_interval", v.f_interval},
           {"snr_db", v.snr_db},
           {"tech_attrs", attrs_to_json(v.tech_attrs)},
           {"role", v.role},
           {"user", v.user},
           {"render",
            {{"waveform", waveform_name(v.render.waveform)},
             {"symbol_rate", v.render.symbol_rate},
             {"rolloff", v.render.rolloff},
             {"cp_ratio", v.render.cp_ratio}}}};
}

void from_json(const json& j, SignalRecord& v) {
  v.id = j.at("id");
  v.technology = technology_from_string(j.at("technology").get<std::string>());
  v.link = link_from_string(j.at("link").get<std::string>());
  v.mod_class = j.at("mod_class");
  v.t_interval = j.at("t_interval").get<Interval>();
  v.f_interval = j.at("f_interval").get<Interval>();
  v.snr_db = j.at("snr_db");
  v.tech_attrs = attrs_from_json(j.at("tech_attrs"));
  v.role = j.value("role", std::string("burst"));
  v.user = j.value("user", -1);
  if (j.contains("render")) {
    const auto& r = j.at("render");
    v.render.waveform =
        r.value("waveform", std::string("native")) == "ofdm_grid" ? Waveform::ofdm_grid
                                                                  : Waveform::native;
    v.render.symbol_rate = r.value("symbol_rate", 0.0);
    v.render.rolloff = r.value("rolloff", 0.35);
    v.render.cp_ratio = r.value("cp_ratio", 0.125);
  }
}

void to_json(json& j, const SceneRecord& v) {
  j = json{{"schema_version", v.schema_version},
           {"scene_id", v.scene_id},
           {"task", v.task},
           {"fs", v.fs},
           {"duration", v.duration},
           {"signals", v.signals},
           {"overlap_prob", v.overlap_prob},
           {"seed", v.seed},
           {"iq_path", v.iq_path},
           {"rejections", v.rejections},
           {"impairments", v.impairments}};
}

void from_json(const json& j, SceneRecord& v) {
  v.schema_version = j.value("schema_version", kSceneSchemaVersion);
  if (v.schema_version != kSceneSchemaVersion)
    throw InputError("unsupported scene schema version " + std::to_string(v.schema_version));
  v.scene_id = j.at("scene_id");
  v.task = j.value("task", std::string());
  v.fs = j.at("fs");
  v.duration = j.at("duration");
  v.signals = j.at("signals").get<std::vector<SignalRecord>>();
  v.overlap_prob = j.value("overlap_prob", 0.0);
  v.seed = j.value("seed", std::uint64_t{0});
  v.iq_path = j.value("iq_path", std::string());
  v.rejections = j.value("rejections", 0);
  v.impairments = j.value("impairments", std::vector<impair::ImpairmentSpec>{});
}

std::string to_json_string(const SceneRecord& rec) { return json(rec).dump(2) + "\n"; }

SceneRecord scene_from_json_string(std::string_view text) {
  return json::parse(text).get<SceneRecord>();
}

SceneRecord load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scene_from_json_string(ss.str());
}

void save_scene(const SceneRecord& rec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write scene file " + path);
  out << to_json_string(rec);
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace rfsynth::scene

namespace rfsynth::impair {

void to_json(nlohmann::json& j, const ImpairmentSpec& v) {
  j = nlohmann::json{{"kind", to_string(v.kind)},
                     {"lambda", v.lambda},
                     {"seed", v.seed},
                     {"params", v.params}};
}

void from_json(const nlohmann::json& j, ImpairmentSpec& v) {
  v.kind = kind_from_string(j.at("kind").get<std::string>());
  v.lambda = j.at("lambda");
  v.seed = j.value("seed", std::uint64_t{0});
  v.params = j.value("params", std::map<std::string, double>{});
}

}  // namespace rfsynth::impair
