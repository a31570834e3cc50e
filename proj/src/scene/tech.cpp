#include "rfsynth/scene/tech.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rfsynth/core/error.hpp"
#include "rfsynth/core/rng.hpp"
#include "rfsynth/scene/synth.hpp"

namespace rfsynth::scene {

namespace {

/// Time-frequency rectangle in (symbol, subcarrier) units, half-open.
struct Tile {
  int t0, t1, k0, k1;
};

bool overlaps(const Tile& a, const Tile& b) {
  return a.t0 < b.t1 && b.t0 < a.t1 && a.k0 < b.k1 && b.k0 < a.k1;
}

bool overlaps_any(const Tile& a, const std::vector<Tile>& others) {
  return std::any_of(others.begin(), others.end(), [&](const Tile& b) { return overlaps(a, b); });
}

/// Rejection bookkeeping shared by the planners.
class Budget {
 public:
  explicit Budget(int cap) : cap_(cap) {}
  void reject(const std::string& why) {
    ++count_;
    ++by_name_[why];
    if (count_ >= cap_) {
      auto it = std::max_element(by_name_.begin(), by_name_.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
      throw RejectionError(it->first, count_);
    }
  }
  int count() const { return count_; }

 private:
  int cap_;
  int count_ = 0;
  std::map<std::string, int> by_name_;
};

std::int64_t pick(Rng& rng, std::int64_t lo, std::int64_t hi) { return rng.uniform_int(lo, hi); }

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(v.size()) - 1))];
}

/// OFDM numerology grid: FFT size, cyclic prefix, symbol period in samples.
struct Grid {
  double fs;
  double scs;
  int fft_len;
  int cp;
  int n_symbols;
  int sym_len() const { return fft_len + cp; }
};

Grid make_grid(double fs, double scs, double cp_ratio, std::size_t num_samples) {
  const double l = fs / scs;
  if (std::abs(l - std::round(l)) > 1e-9 * l)
    throw ConfigError("sample rate " + std::to_string(fs) + " is not a multiple of subcarrier spacing " +
                      std::to_string(scs));
  Grid g{fs, scs, static_cast<int>(std::lround(l)), 0, 0};
  g.cp = static_cast<int>(std::lround(g.fft_len * cp_ratio));
  g.n_symbols = static_cast<int>(num_samples / static_cast<std::size_t>(g.sym_len()));
  return g;
}

/// Record spanning tile `t` of a carrier whose lowest subcarrier edge is at
/// `k_origin` subcarriers from DC.
SignalRecord grid_record(const Grid& g, const Tile& t, int k_origin) {
  SignalRecord r;
  r.t_interval = {static_cast<double>(t.t0) * g.sym_len() / g.fs, static_cast<double>(t.t1) * g.sym_len() / g.fs};
  r.f_interval = {(k_origin + t.k0) * g.scs, (k_origin + t.k1) * g.scs};
  r.render = {Waveform::ofdm_grid, g.scs, 0.35, static_cast<double>(g.cp) / g.fft_len};
  return r;
}

double clamp_snr(double v, const TechOptions& o) { return std::clamp(v, o.snr_min_db, o.snr_max_db); }

const std::vector<std::string> kDataMods = {"qpsk", "16qam", "64qam", "256qam"};

// ---------------------------------------------------------------- NR ----

constexpr int kSsbPrb = 20;
constexpr int kSymbolsPerSlot = 14;
/// Placement attempts per element before the whole layout is redrawn.
constexpr int kPlaceTries = 64;

TechPlan plan_nr(Link link, Rng& rng, double fs, std::size_t num_samples, const TechOptions& o) {
  Budget budget(o.max_rejections);
  std::vector<int> scs_set = {15, 30, 60, 120};
  if (o.scs_khz) {
    if (std::find(scs_set.begin(), scs_set.end(), *o.scs_khz) == scs_set.end())
      throw ConfigError("unsupported NR subcarrier spacing " + std::to_string(*o.scs_khz) + " kHz");
    scs_set = {*o.scs_khz};
  }
  if (link == Link::UL && o.ssb_pattern && *o.ssb_pattern != "NA")
    throw ConfigError("NR uplink carries no SSB");
  const std::vector<int> prb_choices = {24, 32, 51, 66, 79, 106, 133, 162, 217, 273};

  for (;;) {
    const int scs = pick(rng, scs_set);
    const Grid g = make_grid(fs, scs * 1e3, 144.0 / 2048.0, num_samples);
    const int n_prb = pick(rng, prb_choices);
    const int n_sc = 12 * n_prb;
    if (n_sc * g.scs > 0.9 * fs) { budget.reject("carrier_fits"); continue; }
    if (g.n_symbols < kSymbolsPerSlot) { budget.reject("min_slot"); continue; }
    const int k_origin = -n_sc / 2;

    NrAttrs attrs;
    attrs.scs_khz = scs;
    attrs.n_prb = n_prb;
    std::vector<SignalRecord> recs;
    std::vector<Tile> reserved;  // SSB, SRS
    std::vector<Tile> ue_tiles;
    const double base_snr = rng.uniform(o.snr_min_db, o.snr_max_db);
    bool ok = true;

    if (link == Link::DL) {
      std::string pattern = "NA";
      const auto compatible = ssb_patterns_for_scs(scs);
      if (o.ssb_pattern) {
        pattern = *o.ssb_pattern;
        if (pattern != "NA" && std::find(compatible.begin(), compatible.end(), pattern) == compatible.end()) {
          budget.reject("ssb_numerology");
          continue;
        }
      } else if (!compatible.empty() && rng.bernoulli(0.8)) {
        pattern = pick(rng, compatible);
      }
      if (pattern != "NA") {
        if (n_prb < kSsbPrb) { budget.reject("ssb_fits"); continue; }
        const auto starts = ssb_start_symbols(pattern, g.n_symbols);
        if (starts.empty()) { budget.reject("ssb_in_window"); continue; }
        const int prb_off = static_cast<int>(pick(rng, 0, n_prb - kSsbPrb));
        for (int s0 : starts) {
          Tile t{s0, s0 + 4, 12 * prb_off, 12 * (prb_off + kSsbPrb)};
          reserved.push_back(t);
          auto r = grid_record(g, t, k_origin);
          r.mod_class = "qpsk";
          r.role = "ssb";
          r.snr_db = clamp_snr(base_snr + 3.0, o);
          recs.push_back(r);
        }
      }
      attrs.ssb_pattern = pattern;

      const int n_csirs = o.csirs_count ? *o.csirs_count : static_cast<int>(pick(rng, 0, 3));
      std::set<int> used;
      for (int c = 0; c < n_csirs && ok; ++c) {
        bool placed = false;
        for (int tries = 0; !placed; ++tries) {
          if (tries == kPlaceTries) { ok = false; break; }
          const int sym = static_cast<int>(pick(rng, 0, g.n_symbols - 1));
          Tile t{sym, sym + 1, 0, n_sc};
          if (used.count(sym)) { budget.reject("csirs_distinct"); continue; }
          if (overlaps_any(t, reserved)) { budget.reject("csirs_ssb_collision"); continue; }
          used.insert(sym);
          auto r = grid_record(g, t, k_origin);
          r.mod_class = "qpsk";
          r.role = "csirs";
          r.snr_db = clamp_snr(base_snr, o);
          recs.push_back(r);
          placed = true;
        }
      }
      attrs.csirs_count = n_csirs;
    } else {
      const int n_slots = g.n_symbols / kSymbolsPerSlot;
      const int n_srs = o.srs_count ? *o.srs_count : static_cast<int>(pick(rng, 0, 3));
      for (int c = 0; c < n_srs && ok; ++c) {
        bool placed = false;
        for (int tries = 0; !placed; ++tries) {
          if (tries == kPlaceTries) { ok = false; break; }
          const int slot = static_cast<int>(pick(rng, 0, n_slots - 1));
          const int sym = slot * kSymbolsPerSlot + kSymbolsPerSlot - 1;
          const int len_prb = 4 * static_cast<int>(pick(rng, 1, std::max(1, n_prb / 4)));
          const int start_prb = static_cast<int>(pick(rng, 0, n_prb - len_prb));
          Tile t{sym, sym + 1, 12 * start_prb, 12 * (start_prb + len_prb)};
          if (overlaps_any(t, reserved)) { budget.reject("srs_distinct"); continue; }
          reserved.push_back(t);
          auto r = grid_record(g, t, k_origin);
          r.mod_class = "qpsk";
          r.role = "srs";
          r.snr_db = clamp_snr(base_snr, o);
          recs.push_back(r);
          placed = true;
        }
      }
      attrs.srs_count = n_srs;
    }

    const int n_ue = o.ue_count ? *o.ue_count : static_cast<int>(pick(rng, 1, 4));
    if (n_ue < 1 || n_ue > n_prb / 2) { budget.reject("ue_capacity"); continue; }
    attrs.ue_count = n_ue;
    for (int u = 0; u < n_ue && ok; ++u) {
      bool placed = false;
      for (int tries = 0; !placed; ++tries) {
        if (tries == kPlaceTries) { ok = false; break; }
        const int max_len = std::max(2, n_prb / n_ue);
        const int len_prb = static_cast<int>(pick(rng, 2, max_len));
        const int start_prb = static_cast<int>(pick(rng, 0, n_prb - len_prb));
        const int s_len = static_cast<int>(pick(rng, 4, g.n_symbols));
        const int s0 = static_cast<int>(pick(rng, 0, g.n_symbols - s_len));
        Tile t{s0, s0 + s_len, 12 * start_prb, 12 * (start_prb + len_prb)};
        if (overlaps_any(t, ue_tiles)) { budget.reject("ue_collision"); continue; }
        if (overlaps_any(t, reserved)) { budget.reject(link == Link::DL ? "ue_ssb_collision" : "ue_srs_collision"); continue; }
        ue_tiles.push_back(t);
        auto r = grid_record(g, t, k_origin);
        r.mod_class = pick(rng, kDataMods);
        r.role = link == Link::DL ? "pdsch" : "pusch";
        r.user = u;
        r.snr_db = clamp_snr(base_snr + rng.uniform(-6.0, 6.0), o);
        recs.push_back(r);
        placed = true;
      }
    }

    if (!ok) continue;
    for (auto& r : recs) {
      r.technology = Technology::NR;
      r.link = link;
      r.tech_attrs = attrs;
    }
    return {std::move(recs), budget.count()};
  }
}

// --------------------------------------------------------------- LTE ----

TechPlan plan_lte(Rng& rng, double fs, std::size_t num_samples, const TechOptions& o) {
  Budget budget(o.max_rejections);
  const Grid g = make_grid(fs, 15e3, 144.0 / 2048.0, num_samples);
  const std::vector<int> prb_choices = {25, 50, 75, 100};
  for (;;) {
    const int n_prb = pick(rng, prb_choices);
    const int n_sc = 12 * n_prb;
    if (n_sc * g.scs > 0.9 * fs) { budget.reject("carrier_fits"); continue; }
    const int k_origin = -n_sc / 2;
    const int cfi = static_cast<int>(pick(rng, 1, 3));
    const double base_snr = rng.uniform(o.snr_min_db, o.snr_max_db);
    std::vector<SignalRecord> recs;
    std::vector<Tile> reserved;
    const int n_sub = (g.n_symbols + kSymbolsPerSlot - 1) / kSymbolsPerSlot;
    for (int sf = 0; sf < n_sub; ++sf) {
      const int s0 = sf * kSymbolsPerSlot;
      Tile ctrl{s0, std::min(s0 + cfi, g.n_symbols), 0, n_sc};
      if (ctrl.t1 > ctrl.t0) {
        reserved.push_back(ctrl);
        auto r = grid_record(g, ctrl, k_origin);
        r.mod_class = "qpsk";
        r.role = "pdcch";
        r.snr_db = clamp_snr(base_snr, o);
        recs.push_back(r);
      }
      if (sf % 5 == 0 && s0 + 7 <= g.n_symbols) {
        // SSS and PSS on the last two symbols of the first slot, centre 72 subcarriers.
        Tile sync{s0 + 5, s0 + 7, n_sc / 2 - 36, n_sc / 2 + 36};
        reserved.push_back(sync);
        auto r = grid_record(g, sync, k_origin);
        r.mod_class = "bpsk";
        r.role = "sync";
        r.snr_db = clamp_snr(base_snr + 3.0, o);
        recs.push_back(r);
      }
    }
    const int n_ue = o.ue_count ? *o.ue_count : static_cast<int>(pick(rng, 1, 4));
    std::vector<Tile> ue_tiles;
    bool ok = true;
    for (int u = 0; u < n_ue && ok; ++u) {
      bool placed = false;
      for (int tries = 0; !placed; ++tries) {
        if (tries == kPlaceTries) { ok = false; break; }
        const int len_prb = static_cast<int>(pick(rng, 2, std::max(2, n_prb / n_ue)));
        const int start_prb = static_cast<int>(pick(rng, 0, n_prb - len_prb));
        const int sf = static_cast<int>(pick(rng, 0, n_sub - 1));
        Tile t{sf * kSymbolsPerSlot + cfi, std::min((sf + 1) * kSymbolsPerSlot, g.n_symbols),
               12 * start_prb, 12 * (start_prb + len_prb)};
        if (t.t1 - t.t0 < 4) { budget.reject("min_symbols"); continue; }
        if (overlaps_any(t, ue_tiles)) { budget.reject("ue_collision"); continue; }
        if (overlaps_any(t, reserved)) { budget.reject("ue_sync_collision"); continue; }
        ue_tiles.push_back(t);
        auto r = grid_record(g, t, k_origin);
        r.mod_class = pick(rng, kDataMods);
        r.role = "pdsch";
        r.user = u;
        r.snr_db = clamp_snr(base_snr + rng.uniform(-6.0, 6.0), o);
        recs.push_back(r);
        placed = true;
      }
    }
    if (!ok) continue;
    OpaqueAttrs attrs{{"n_prb", std::to_string(n_prb)}, {"cfi", std::to_string(cfi)},
                      {"ue_count", std::to_string(n_ue)}};
    for (auto& r : recs) {
      r.technology = Technology::LTE;
      r.link = Link::DL;
      r.tech_attrs = attrs;
    }
    return {std::move(recs), budget.count()};
  }
}

// -------------------------------------------------- single-carrier techs ----

SignalRecord native_record(const std::string& mod, double t0, double t1, double fc, double bw,
                           double rate, double rolloff, double snr) {
  SignalRecord r;
  r.mod_class = mod;
  r.t_interval = {t0, t1};
  r.f_interval = {fc - bw / 2, fc + bw / 2};
  r.snr_db = snr;
  r.render = {Waveform::native, rate, rolloff, 0.125};
  return r;
}

TechPlan plan_umts(Rng& rng, double fs, std::size_t num_samples, const TechOptions& o) {
  constexpr double kChip = 3.84e6;
  constexpr double kRolloff = 0.22;
  constexpr double kSpacing = 5e6;
  Budget budget(o.max_rejections);
  const double dur = num_samples / fs;
  for (;;) {
    const int n_car = static_cast<int>(pick(rng, 1, 3));
    const double bw = kChip * (1 + kRolloff);
    const double offset = rng.uniform(-0.3, 0.3) * fs / 2;
    const double span = (n_car - 1) * kSpacing;
    if (std::abs(offset) + span / 2 + bw / 2 > 0.95 * fs / 2) { budget.reject("in_band"); continue; }
    std::vector<SignalRecord> recs;
    for (int c = 0; c < n_car; ++c) {
      const double fc = offset - span / 2 + c * kSpacing;
      auto r = native_record("qpsk", 0.0, dur, fc, bw, kChip, kRolloff, rng.uniform(o.snr_min_db, o.snr_max_db));
      r.role = "carrier";
      r.technology = Technology::UMTS;
      r.link = Link::DL;
      r.tech_attrs = OpaqueAttrs{{"carriers", std::to_string(n_car)}, {"chip_rate", "3.84e6"}};
      recs.push_back(r);
    }
    return {std::move(recs), budget.count()};
  }
}

TechPlan plan_dvbs2(Rng& rng, double fs, std::size_t num_samples, const TechOptions& o) {
  Budget budget(o.max_rejections);
  const std::vector<double> rolloffs = {0.2, 0.25, 0.35};
  const std::vector<std::string> mods = {"qpsk", "8psk"};
  const double dur = num_samples / fs;
  for (;;) {
    const double a = pick(rng, rolloffs);
    const double rs = rng.uniform(5e6, std::min(45e6, 0.9 * fs / (1 + a)));
    const double bw = rs * (1 + a);
    const double fc = rng.uniform(-0.5, 0.5) * (fs - bw) / 2;
    if (std::abs(fc) + bw / 2 > fs / 2) { budget.reject("in_band"); continue; }
    if (fs / rs < 1.25) { budget.reject("samples_per_symbol"); continue; }
    auto r = native_record(pick(rng, mods), 0.0, dur, fc, bw, rs, a, rng.uniform(o.snr_min_db, o.snr_max_db));
    r.role = "carrier";
    r.technology = Technology::DVBS2;
    r.link = Link::NA;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", a);
    r.tech_attrs = OpaqueAttrs{{"rolloff", buf}, {"symbol_rate", std::to_string(std::lround(rs))}};
    return {{r}, budget.count()};
  }
}

TechPlan plan_bt(Rng& rng, double fs, std::size_t num_samples, const TechOptions& o) {
  constexpr double kRate = 1e6;
  constexpr double kSlot = 625e-6;
  Budget budget(o.max_rejections);
  const double dur = num_samples / fs;
  const int max_ch = static_cast<int>(std::floor((0.45 * fs - 0.5e6) / 1e6));
  if (max_ch < 1) throw ConfigError("sample rate too low for Bluetooth hopping");
  const int n_slots = std::max(1, static_cast<int>(std::ceil(dur / kSlot)));
  for (;;) {
    std::vector<SignalRecord> recs;
    int prev_ch = 1 << 20;
    for (int s = 0; s < n_slots; ++s) {
      if (rng.bernoulli(0.2)) continue;
      const double t0 = s * kSlot;
      const double len = rng.uniform(126e-6, 366e-6);
      if (t0 + len > dur) { budget.reject("in_time"); continue; }
      int ch = static_cast<int>(pick(rng, -max_ch, max_ch));
      if (ch == prev_ch) ch = ch == max_ch ? ch - 1 : ch + 1;
      prev_ch = ch;
      auto r = native_record("gfsk", t0, t0 + len, ch * 1e6, kRate, kRate, 0.35,
                             rng.uniform(o.snr_min_db, o.snr_max_db));
      r.role = "hop";
      r.technology = Technology::BT;
      r.link = Link::NA;
      r.tech_attrs = OpaqueAttrs{{"channel", std::to_string(ch)}};
      recs.push_back(r);
    }
    if (recs.empty()) { budget.reject("signals_nonempty"); continue; }
    return {std::move(recs), budget.count()};
  }
}

// -------------------------------------------------------------- WLAN ----

/// RU layout of one 20 MHz segment: slots 0..8 of 27 tones each, slot 4 is
/// the centre 26-tone RU. An RU starts at its first slot and spans `tones`.
struct RuTile {
  int slot0, slots, tones;
};

std::vector<RuTile> draw_half(Rng& rng, int base) {
  switch (pick(rng, 0, 4)) {
    case 0: return {{base, 4, 106}};
    case 1: return {{base, 2, 52}, {base + 2, 2, 52}};
    case 2: return {{base, 2, 52}, {base + 2, 1, 26}, {base + 3, 1, 26}};
    case 3: return {{base, 1, 26}, {base + 1, 1, 26}, {base + 2, 2, 52}};
    default: return {{base, 1, 26}, {base + 1, 1, 26}, {base + 2, 1, 26}, {base + 3, 1, 26}};
  }
}

std::vector<RuTile> draw_segment(Rng& rng) {
  if (rng.bernoulli(0.25)) return {{0, 9, 242}};
  auto out = draw_half(rng, 0);
  out.push_back({4, 1, 26});
  auto right = draw_half(rng, 5);
  out.insert(out.end(), right.begin(), right.end());
  return out;
}

TechPlan plan_wlan(Rng& rng, double fs, std::size_t num_samples, const TechOptions& o) {
  constexpr double kNominalScs = 78.125e3;
  constexpr int kSlotTones = 27;
  constexpr int kSegTones = 256;
  constexpr int kPreambleSymbols = 4;
  Budget budget(o.max_rejections);
  const int fft_len = static_cast<int>(std::lround(fs / kNominalScs));
  const Grid g = make_grid(fs, fs / fft_len, 1.0 / 16.0, num_samples);
  if (o.wlan_standard && *o.wlan_standard != "11ax" && *o.wlan_standard != "11be")
    throw ConfigError("unsupported WLAN standard " + *o.wlan_standard);
  std::vector<int> channels;
  for (int ch : {20, 40})
    if (ch * 1e6 <= 0.9 * fs && kSegTones * (ch / 20) * g.scs <= fs) channels.push_back(ch);
  if (channels.empty()) throw ConfigError("sample rate too low for a 20 MHz WLAN channel");

  for (;;) {
    const std::string standard = o.wlan_standard ? *o.wlan_standard : (rng.bernoulli(0.5) ? "11ax" : "11be");
    const int ch = pick(rng, channels);
    const int n_seg = ch / 20;
    const int n_ppdu = static_cast<int>(pick(rng, 1, 5));
    const int per_ppdu = g.n_symbols / n_ppdu;
    if (per_ppdu < kPreambleSymbols + 4) { budget.reject("ppdu_fits"); continue; }
    const double base_snr = rng.uniform(o.snr_min_db, o.snr_max_db);
    const int k_origin = -kSegTones * n_seg / 2;

    std::vector<SignalRecord> recs;
    int next_user = 0;
    std::vector<std::set<int>> users_in_ppdu(n_ppdu);
    const bool forced = o.wlan_users.has_value();
    for (int p = 0; p < n_ppdu; ++p) {
      const int min_len = std::max(kPreambleSymbols + 4, per_ppdu * 6 / 10);
      const int len = static_cast<int>(pick(rng, min_len, std::max(min_len, per_ppdu - 1)));
      const int t0 = p * per_ppdu + static_cast<int>(pick(rng, 0, per_ppdu - len));
      const int data0 = t0 + kPreambleSymbols;
      const int t1 = t0 + len;
      {
        Tile pre{t0, data0, 0, kSegTones * n_seg};
        auto r = grid_record(g, pre, k_origin);
        r.mod_class = "bpsk";
        r.role = "preamble";
        r.snr_db = clamp_snr(base_snr, o);
        r.tech_attrs = WlanAttrs{standard, 0, ch, {p, -1, 0}};
        recs.push_back(r);
      }
      int ru_index = 0;
      for (int s = 0; s < n_seg; ++s) {
        for (const auto& ru : draw_segment(rng)) {
          const int seg0 = s * kSegTones + (kSegTones - 9 * kSlotTones) / 2;
          Tile t{data0, t1, seg0 + ru.slot0 * kSlotTones, seg0 + ru.slot0 * kSlotTones + ru.tones};
          int n_users = 1;
          if (standard == "11ax" && ru.tones >= 106) n_users = static_cast<int>(pick(rng, 1, 4));
          const std::string mod = pick(rng, kDataMods);
          const double snr = clamp_snr(base_snr + rng.uniform(-6.0, 6.0), o);
          for (int m = 0; m < n_users; ++m) {
            int user;
            std::vector<int> reusable;
            if (!forced && p > 0 && rng.bernoulli(0.3)) {
              for (int u = 0; u < next_user; ++u)
                if (!users_in_ppdu[p].count(u)) reusable.push_back(u);
            }
            user = reusable.empty() ? next_user++ : pick(rng, reusable);
            users_in_ppdu[p].insert(user);
            auto r = grid_record(g, t, k_origin);
            r.mod_class = mod;
            r.role = "ru";
            r.user = user;
            r.snr_db = snr;
            r.tech_attrs = WlanAttrs{standard, 0, ch, {p, ru_index, ru.tones}};
            recs.push_back(r);
          }
          ++ru_index;
        }
      }
    }
    const int distinct = next_user;
    if (forced && distinct != *o.wlan_users) { budget.reject("wlan_user_count"); continue; }
    for (auto& r : recs) {
      r.technology = Technology::WLAN;
      r.link = Link::NA;
      std::get<WlanAttrs>(r.tech_attrs).user_count = distinct;
    }
    return {std::move(recs), budget.count()};
  }
}

}  // namespace

std::vector<std::string> ssb_patterns_for_scs(int scs_khz) {
  switch (scs_khz) {
    case 15: return {"A"};
    case 30: return {"B", "C"};
    case 120: return {"D"};
    default: return {};
  }
}

std::vector<int> ssb_start_symbols(const std::string& pattern, int n_symbols) {
  std::vector<int> base;
  std::vector<int> ns;
  int period = 14;
  if (pattern == "A" || pattern == "C") {
    base = {2, 8};
    ns = {0, 1, 2, 3};
  } else if (pattern == "B") {
    base = {4, 8, 16, 20};
    ns = {0, 1};
    period = 28;
  } else if (pattern == "D") {
    base = {4, 8, 16, 20};
    ns = {0, 1, 2, 3, 5, 6, 7, 8, 10, 11, 12, 13, 15, 16, 17, 18};
    period = 28;
  } else {
    return {};
  }
  std::vector<int> out;
  for (int n : ns)
    for (int b : base)
      if (const int s = b + period * n; s + 4 <= n_symbols) out.push_back(s);
  std::sort(out.begin(), out.end());
  return out;
}

bool supported(Technology tech, Link link) {
  switch (tech) {
    case Technology::NR: return link == Link::DL || link == Link::UL;
    case Technology::LTE:
    case Technology::UMTS: return link == Link::DL;
    case Technology::WLAN:
    case Technology::DVBS2:
    case Technology::BT: return link == Link::NA;
    default: return false;
  }
}

TechPlan plan_technology(Technology tech, Link link, std::uint64_t seed, double fs,
                         std::size_t num_samples, const TechOptions& opts) {
  if (!supported(tech, link))
    throw ConfigError("unsupported technology/link pair " + std::string(to_string(tech)) + "/" +
                      std::string(to_string(link)));
  if (!(fs > 0.0) || num_samples == 0) throw ConfigError("sample rate and duration must be positive");
  Rng rng(derive_seed(seed, "tech-plan"));
  TechPlan plan;
  switch (tech) {
    case Technology::NR: plan = plan_nr(link, rng, fs, num_samples, opts); break;
    case Technology::LTE: plan = plan_lte(rng, fs, num_samples, opts); break;
    case Technology::UMTS: plan = plan_umts(rng, fs, num_samples, opts); break;
    case Technology::DVBS2: plan = plan_dvbs2(rng, fs, num_samples, opts); break;
    case Technology::BT: plan = plan_bt(rng, fs, num_samples, opts); break;
    case Technology::WLAN: plan = plan_wlan(rng, fs, num_samples, opts); break;
    default: break;
  }
  for (std::size_t i = 0; i < plan.records.size(); ++i) plan.records[i].id = static_cast<int>(i);
  return plan;
}

Emulation emulate_technology(Technology tech, Link link, std::uint64_t seed, double fs,
                             double duration, const TechOptions& opts) {
  const auto n = static_cast<std::size_t>(std::llround(duration * fs));
  auto plan = plan_technology(tech, link, seed, fs, n, opts);
  SceneRecord rec;
  rec.fs = fs;
  rec.duration = duration;
  rec.signals = plan.records;
  return {compose_scene(rec, seed), std::move(plan.records)};
}

}  // namespace rfsynth::scene
