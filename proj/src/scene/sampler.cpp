#include "rfsynth/scene/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rfsynth/core/error.hpp"
#include "rfsynth/core/hash.hpp"
#include "rfsynth/core/rng.hpp"
#include "rfsynth/scene/synth.hpp"

namespace rfsynth::scene {

namespace {

bool freq_overlap(const SignalRecord& a, double lo, double hi) {
  return std::min(a.f_interval.hi, hi) - std::max(a.f_interval.lo, lo) > 0.0;
}

SceneRecord base_record(std::uint64_t seed, const SceneSpec& spec) {
  if (!(spec.fs > 0.0) || spec.num_samples == 0) throw ConfigError("sample rate and length must be positive");
  SceneRecord rec;
  rec.scene_id = spec.task + "-" + hex64(seed);
  rec.task = spec.task;
  rec.fs = spec.fs;
  rec.duration = static_cast<double>(spec.num_samples) / spec.fs;
  rec.overlap_prob = spec.overlap_prob;
  rec.seed = seed;
  for (const auto& imp : spec.impairments) rec.impairments.push_back(impair::with_echoed_params(imp));
  return rec;
}

SceneRecord sample_mixture(std::uint64_t seed, const SceneSpec& spec, const ModRegistry& reg) {
  if (spec.min_signals < 1 || spec.max_signals < spec.min_signals)
    throw ConfigError("invalid signal-count range");
  if (spec.overlap_prob < 0.0 || spec.overlap_prob > 1.0) throw ConfigError("overlap_prob must lie in [0, 1]");
  auto classes = spec.classes.empty() ? reg.names() : spec.classes;
  for (const auto& c : classes)
    if (!reg.contains(c)) throw RegistryError("unknown modulation class '" + c + "'");

  SceneRecord rec = base_record(seed, spec);
  Rng rng(derive_seed(seed, "scene-config"));
  const auto n_total = static_cast<std::int64_t>(spec.num_samples);
  const double fs = spec.fs;
  const auto target = static_cast<std::size_t>(rng.uniform_int(spec.min_signals, spec.max_signals));

  int rejections = 0;
  std::map<std::string, int> by_name;
  auto reject = [&](const std::string& why) {
    ++rejections;
    ++by_name[why];
    if (rejections >= spec.max_rejections) {
      auto it = std::max_element(by_name.begin(), by_name.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
      throw RejectionError(it->first, rejections);
    }
  };

  while (rec.signals.size() < target) {
    const auto& name = classes[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(classes.size()) - 1))];
    const auto& mc = reg.get(name);
    // Log-uniform bandwidth within the spec range intersected with the class range.
    const double bw_lo = std::max(spec.bw_min_frac, mc.min_bw_frac);
    const double bw_hi = std::min(spec.bw_max_frac, mc.max_bw_frac);
    if (!(bw_lo <= bw_hi)) {
      reject("class_bandwidth");
      continue;
    }
    const double bw_frac = bw_lo * std::pow(bw_hi / bw_lo, rng.uniform());
    double bw = bw_frac * fs;
    double rate = rate_for_bandwidth(mc, bw);
    if (mc.family == Family::ofdm) {
      // Subcarrier spacing snapped so the FFT size is an integer.
      rate = fs / std::max(1.0, std::round(fs / rate));
      bw = bandwidth_for_rate(mc, rate);
    }
    const auto len = static_cast<std::int64_t>(std::llround(
        static_cast<double>(n_total) * rng.uniform(spec.dur_min_frac, spec.dur_max_frac)));
    const std::int64_t start = rng.uniform_int(0, std::max<std::int64_t>(0, n_total - len));
    const bool force_overlap = !rec.signals.empty() && rng.bernoulli(spec.overlap_prob);
    double fc;
    if (force_overlap) {
      const auto& other = rec.signals[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(rec.signals.size()) - 1))];
      fc = other.f_center() + rng.uniform(-0.45, 0.45) * (other.bandwidth() + bw);
    } else {
      fc = rng.uniform(-0.5, 0.5) * fs;
    }
    const double snr = rng.uniform(spec.snr_min_db, spec.snr_max_db);

    BurstConfig cfg;
    cfg.mod_class = name;
    cfg.t_start = static_cast<double>(start) / fs;
    cfg.duration = static_cast<double>(len) / fs;
    cfg.f_center = fc;
    cfg.bandwidth = bw;
    cfg.snr_db = snr;
    cfg.symbol_rate = rate;
    if (auto why = check_burst(cfg, fs, rec.duration, reg); !why.empty()) {
      reject(why);
      continue;
    }
    const double lo = fc - bw / 2, hi = fc + bw / 2;
    const bool any_overlap = std::any_of(rec.signals.begin(), rec.signals.end(),
                                         [&](const SignalRecord& s) { return freq_overlap(s, lo, hi); });
    if (force_overlap != any_overlap) {
      reject("co_channel");
      continue;
    }

    SignalRecord s;
    s.id = static_cast<int>(rec.signals.size());
    s.mod_class = name;
    s.t_interval = {cfg.t_start, static_cast<double>(start + len) / fs};
    s.f_interval = {lo, hi};
    s.snr_db = snr;
    s.render = {Waveform::native, rate, kRrcRolloff, 0.125};
    if (auto why = check_signal(s, fs, rec.duration); !why.empty()) {
      reject(why);
      continue;
    }
    rec.signals.push_back(std::move(s));
  }
  rec.rejections = rejections;
  return rec;
}

SceneRecord sample_technology(std::uint64_t seed, const SceneSpec& spec) {
  SceneRecord rec = base_record(seed, spec);
  Rng rng(derive_seed(seed, "scene-config"));
  std::vector<double> weights;
  for (const auto& c : spec.technologies) weights.push_back(c.weight);
  const auto& choice = spec.technologies[rng.weighted_index(weights)];
  TechOptions opts = spec.tech_options;
  opts.snr_min_db = spec.snr_min_db;
  opts.snr_max_db = spec.snr_max_db;
  opts.max_rejections = spec.max_rejections;
  if (!choice.wlan_standard.empty()) opts.wlan_standard = choice.wlan_standard;
  auto plan = plan_technology(choice.tech, choice.link, derive_seed(seed, "tech"), spec.fs,
                              spec.num_samples, opts);
  rec.signals = std::move(plan.records);
  rec.rejections = plan.rejections;
  return rec;
}

}  // namespace

SceneSpec wbmc_spec() {
  SceneSpec s;
  s.task = "wbmc";
  return s;
}

SceneSpec wbod_spec() {
  SceneSpec s;
  s.task = "wbod";
  s.overlap_prob = 0.6;
  s.snr_max_db = 50.0;
  return s;
}

SceneSpec wtr_spec() {
  SceneSpec s;
  s.task = "wtr";
  s.technologies = {{Technology::DVBS2, Link::NA}, {Technology::BT, Link::NA},
                    {Technology::UMTS, Link::DL},  {Technology::LTE, Link::DL},
                    {Technology::NR, Link::DL},    {Technology::NR, Link::UL},
                    {Technology::WLAN, Link::NA, 1.0, "11ax"},
                    {Technology::WLAN, Link::NA, 1.0, "11be"}};
  return s;
}

SceneSpec wnuc_spec() {
  SceneSpec s;
  s.task = "wnuc";
  s.technologies = {{Technology::WLAN, Link::NA, 1.0, "11ax"}, {Technology::WLAN, Link::NA, 1.0, "11be"}};
  return s;
}

SceneSpec nrie_spec() {
  SceneSpec s;
  s.task = "nrie";
  s.technologies = {{Technology::NR, Link::DL}, {Technology::NR, Link::UL}};
  return s;
}

SceneSpec spec_for_task(const std::string& task) {
  if (task == "wbmc") return wbmc_spec();
  if (task == "wbod") return wbod_spec();
  if (task == "wtr") return wtr_spec();
  if (task == "wnuc") return wnuc_spec();
  if (task == "nrie") return nrie_spec();
  throw ConfigError("unknown task '" + task + "'");
}

SceneRecord sample_scene_config(std::uint64_t seed, const SceneSpec& spec, const ModRegistry& reg) {
  if (spec.max_rejections < 1) throw ConfigError("max_rejections must be positive");
  return spec.technologies.empty() ? sample_mixture(seed, spec, reg) : sample_technology(seed, spec);
}

}  // namespace rfsynth::scene
