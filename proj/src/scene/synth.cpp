#include "rfsynth/scene/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rfsynth/core/error.hpp"
#include "rfsynth/core/fft.hpp"
#include "rfsynth/core/rng.hpp"
#include "rfsynth/scene/iq_file.hpp"

namespace rfsynth::scene {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kRrcSpan = 6;  // symbols each side

std::vector<cplx> constellation(Family fam, int order) {
  std::vector<cplx> pts;
  if (fam == Family::psk) {
    const double offset = order == 4 ? kPi / 4 : 0.0;
    for (int m = 0; m < order; ++m) pts.push_back(std::polar(1.0, offset + 2 * kPi * m / order));
    return pts;
  }
  const int side = static_cast<int>(std::lround(std::sqrt(order)));
  double energy = 0.0;
  for (int i = 0; i < side; ++i)
    for (int q = 0; q < side; ++q) {
      cplx p(2 * i - (side - 1), 2 * q - (side - 1));
      pts.push_back(p);
      energy += std::norm(p);
    }
  const double scale = 1.0 / std::sqrt(energy / pts.size());
  for (auto& p : pts) p *= scale;
  return pts;
}

std::vector<cplx> draw_symbols(Rng& rng, const std::vector<cplx>& pts, std::size_t count,
                               bool constant) {
  std::vector<cplx> out(count);
  for (auto& s : out)
    s = constant ? pts.front()
                 : pts[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pts.size()) - 1))];
  return out;
}

std::vector<cplx> linear_waveform(std::size_t len, double fs, double rs, double rolloff,
                                  const std::vector<cplx>& pts, Rng& rng, bool constant) {
  const double sps = fs / rs;
  const auto nsym = static_cast<std::size_t>(std::ceil(len / sps)) + 2 * kRrcSpan + 2;
  auto syms = draw_symbols(rng, pts, nsym, constant);
  std::vector<cplx> out(len);
  for (std::size_t n = 0; n < len; ++n) {
    // Symbol k sits at time (k - span) * T.
    const double t_sym = n / sps;
    const auto kc = static_cast<std::int64_t>(std::floor(t_sym)) + kRrcSpan;
    cplx acc = 0.0;
    for (std::int64_t k = kc - kRrcSpan; k <= kc + kRrcSpan + 1; ++k) {
      if (k < 0 || k >= static_cast<std::int64_t>(nsym)) continue;
      acc += syms[static_cast<std::size_t>(k)] * rrc_pulse(t_sym - (k - kRrcSpan), rolloff);
    }
    out[n] = acc;
  }
  return out;
}

double gauss_q(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

std::vector<cplx> fsk_waveform(std::size_t len, double fs, double rs, const ModClass& mc,
                               Rng& rng, bool constant) {
  const int m = mc.params.order;
  const double h = mc.params.mod_index;
  const double sps = fs / rs;
  const auto nsym = static_cast<std::size_t>(std::ceil(len / sps)) + 4;
  std::vector<double> levels(nsym);
  for (auto& d : levels) {
    const auto idx = constant ? 0 : rng.uniform_int(0, m - 1);
    d = 2.0 * idx - (m - 1);
  }
  std::vector<cplx> out(len);
  double phase = 0.0;
  const bool gaussian = mc.params.gaussian_bt > 0.0;
  const double a = 2 * kPi * mc.params.gaussian_bt / std::sqrt(std::log(2.0));  // per symbol time
  for (std::size_t n = 0; n < len; ++n) {
    const double t = n / sps;  // in symbols; symbol k centered at k + 0.5
    double level;
    if (!gaussian) {
      level = levels[static_cast<std::size_t>(t)];
    } else {
      level = 0.0;
      const auto kc = static_cast<std::int64_t>(t);
      for (std::int64_t k = kc - 2; k <= kc + 2; ++k) {
        if (k < 0 || k >= static_cast<std::int64_t>(nsym)) continue;
        const double tau = t - (k + 0.5);
        level += levels[static_cast<std::size_t>(k)] * (gauss_q(a * (tau - 0.5)) - gauss_q(a * (tau + 0.5)));
      }
    }
    out[n] = std::polar(1.0, phase);
    // Frequency deviation h*Rs/2 per unit level.
    phase += 2 * kPi * (0.5 * h * rs * level) / fs;
  }
  return out;
}

std::vector<cplx> ofdm_waveform(std::size_t len, std::size_t fft_len, std::size_t cp,
                                std::size_t n_sc, const std::vector<cplx>& pts, Rng& rng,
                                bool constant) {
  std::vector<cplx> out;
  out.reserve(len + fft_len + cp);
  FftPlan plan(fft_len, FftPlan::Direction::inverse_unscaled);
  std::vector<cplx> grid(fft_len);
  const double norm = 1.0 / std::sqrt(static_cast<double>(fft_len));
  const auto first = -static_cast<std::int64_t>(n_sc / 2);
  while (out.size() < len) {
    std::fill(grid.begin(), grid.end(), cplx{});
    for (std::size_t i = 0; i < n_sc; ++i) {
      const std::int64_t k = first + static_cast<std::int64_t>(i);
      const auto bin = static_cast<std::size_t>((k % static_cast<std::int64_t>(fft_len) + fft_len) % fft_len);
      grid[bin] = constant ? pts.front()
                           : pts[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pts.size()) - 1))];
    }
    plan.execute(grid);
    for (std::size_t i = fft_len - cp; i < fft_len; ++i) out.push_back(grid[i] * norm);
    for (std::size_t i = 0; i < fft_len; ++i) out.push_back(grid[i] * norm);
  }
  out.resize(len);
  return out;
}

/// Band-limited message: sum of random tones in (0.05 W, W), peak-normalized.
std::vector<double> message_tones(Rng& rng, double w, std::vector<double>& phases) {
  std::vector<double> freqs(8);
  phases.resize(8);
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    freqs[i] = rng.uniform(0.05 * w, w);
    phases[i] = rng.uniform(0.0, 2 * kPi);
  }
  return freqs;
}

std::vector<cplx> analog_waveform(std::size_t len, double fs, double w, const ModClass& mc,
                                  Rng& rng) {
  std::vector<double> phases;
  auto freqs = message_tones(rng, w, phases);
  const double amp = 1.0 / freqs.size();  // keeps |m| <= 1
  std::vector<cplx> out(len);
  if (mc.name == "am-ssb") {
    // Upper sideband, recentred so the occupied band is [-W/2, W/2].
    for (std::size_t n = 0; n < len; ++n) {
      cplx acc = 0.0;
      for (std::size_t i = 0; i < freqs.size(); ++i)
        acc += std::polar(amp, 2 * kPi * (freqs[i] - 0.5 * w) * n / fs + phases[i]);
      out[n] = acc;
    }
    return out;
  }
  if (mc.family == Family::am) {
    const double depth = mc.params.mod_index;
    for (std::size_t n = 0; n < len; ++n) {
      double m = 0.0;
      for (std::size_t i = 0; i < freqs.size(); ++i)
        m += amp * std::cos(2 * kPi * freqs[i] * n / fs + phases[i]);
      out[n] = 1.0 + depth * m;
    }
    return out;
  }
  // FM with peak deviation beta * W.
  const double dev = mc.params.mod_index * w;
  for (std::size_t n = 0; n < len; ++n) {
    double integ = 0.0;
    for (std::size_t i = 0; i < freqs.size(); ++i)
      integ += amp * std::sin(2 * kPi * freqs[i] * n / fs + phases[i]) / (2 * kPi * freqs[i]);
    out[n] = std::polar(1.0, 2 * kPi * dev * integ);
  }
  return out;
}

}  // namespace

double rrc_pulse(double x, double a) {
  if (std::abs(x) < 1e-12) return 1.0 - a + 4.0 * a / kPi;
  if (a > 0.0 && std::abs(std::abs(x) - 1.0 / (4.0 * a)) < 1e-9)
    return a / std::numbers::sqrt2 *
           ((1 + 2 / kPi) * std::sin(kPi / (4 * a)) + (1 - 2 / kPi) * std::cos(kPi / (4 * a)));
  const double num = std::sin(kPi * x * (1 - a)) + 4 * a * x * std::cos(kPi * x * (1 + a));
  const double den = kPi * x * (1 - (4 * a * x) * (4 * a * x));
  return num / den;
}

BurstConfig burst_config_from(const SignalRecord& s) {
  BurstConfig c;
  c.mod_class = s.mod_class;
  c.t_start = s.t_interval.lo;
  c.duration = s.t_interval.length();
  c.f_center = s.f_center();
  c.bandwidth = s.bandwidth();
  c.snr_db = s.snr_db;
  c.symbol_rate = s.render.symbol_rate;
  c.waveform = s.render.waveform;
  c.rolloff = s.render.rolloff;
  c.cp_ratio = s.render.cp_ratio;
  return c;
}

std::string check_burst(const BurstConfig& cfg, double fs, double scene_duration,
                        const ModRegistry& reg) {
  if (!reg.contains(cfg.mod_class)) return "unknown_class";
  const auto& mc = reg.get(cfg.mod_class);
  if (!(cfg.duration > 0.0)) return "duration_positive";
  if (!(cfg.bandwidth > 0.0) || !(cfg.symbol_rate > 0.0)) return "bandwidth_positive";
  const double t_eps = 0.5 / fs;
  if (cfg.t_start < -t_eps || cfg.t_start + cfg.duration > scene_duration + t_eps) return "in_time";
  if (std::abs(cfg.f_center) + cfg.bandwidth / 2 > fs / 2 * (1 + 1e-12)) return "in_band";
  if (cfg.waveform == Waveform::ofdm_grid) {
    const double l = fs / cfg.symbol_rate;
    if (std::abs(l - std::round(l)) > 1e-6 * l) return "ofdm_fft_size";
    if (cfg.bandwidth / cfg.symbol_rate < 1.0 - 1e-9) return "min_symbols";
    return {};
  }
  const double frac = cfg.bandwidth / fs;
  if (frac < mc.min_bw_frac || frac > mc.max_bw_frac) return "class_bandwidth";
  const double expected = bandwidth_for_rate(mc, cfg.symbol_rate, cfg.rolloff);
  if (std::abs(expected - cfg.bandwidth) > reg.tolerance() * cfg.bandwidth) return "rate_consistency";
  const double sps = fs / cfg.symbol_rate;
  switch (mc.family) {
    case Family::psk:
    case Family::qam:
      if (sps < 2.0) return "samples_per_symbol";
      break;
    case Family::fsk:
      if (sps < 4.0) return "samples_per_symbol";
      break;
    case Family::ofdm: {
      if (std::abs(sps - std::round(sps)) > 1e-6 * sps) return "ofdm_fft_size";
      break;
    }
    default: break;
  }
  const double symbols = cfg.duration * cfg.symbol_rate;
  const double min_symbols = mc.family == Family::ofdm ? 1.25 : 4.0;
  if (symbols < min_symbols) return "min_symbols";
  return {};
}

std::vector<cplx> synthesize_burst(const BurstConfig& cfg, double fs, std::uint64_t seed,
                                   const SynthOptions& opts, const ModRegistry& reg) {
  const auto& mc = reg.get(cfg.mod_class);
  const auto len = static_cast<std::size_t>(std::llround(cfg.duration * fs));
  Rng rng(seed);
  std::vector<cplx> x;
  if (cfg.waveform == Waveform::ofdm_grid) {
    const auto fft_len = static_cast<std::size_t>(std::llround(fs / cfg.symbol_rate));
    const auto n_sc = static_cast<std::size_t>(std::llround(cfg.bandwidth / cfg.symbol_rate));
    const auto cp = static_cast<std::size_t>(std::llround(fft_len * cfg.cp_ratio));
    const auto fam = mc.family == Family::qam ? Family::qam : Family::psk;
    const int order = mc.family == Family::qam || mc.family == Family::psk ? mc.params.order : 4;
    x = ofdm_waveform(len, fft_len, cp, n_sc, constellation(fam, order), rng, opts.constant_symbols);
  } else {
    switch (mc.family) {
      case Family::psk:
      case Family::qam:
        x = linear_waveform(len, fs, cfg.symbol_rate, cfg.rolloff,
                            constellation(mc.family, mc.params.order), rng, opts.constant_symbols);
        break;
      case Family::fsk:
        x = fsk_waveform(len, fs, cfg.symbol_rate, mc, rng, opts.constant_symbols);
        break;
      case Family::ofdm: {
        const auto fft_len = static_cast<std::size_t>(std::llround(fs / cfg.symbol_rate));
        const auto cp = static_cast<std::size_t>(std::llround(fft_len * cfg.cp_ratio));
        x = ofdm_waveform(len, fft_len, cp, static_cast<std::size_t>(mc.params.order),
                          constellation(Family::qam, 16), rng, opts.constant_symbols);
        break;
      }
      case Family::am:
      case Family::fm:
        x = analog_waveform(len, fs, cfg.symbol_rate, mc, rng);
        break;
    }
  }
  if (cfg.f_center != 0.0) {
    const double w = 2 * kPi * cfg.f_center / fs;
    for (std::size_t n = 0; n < x.size(); ++n) x[n] *= std::polar(1.0, w * static_cast<double>(n));
  }
  return x;
}

double inband_power(std::span<const cplx> x, double fs, double f_lo, double f_hi) {
  if (x.empty()) return 0.0;
  const auto spec = fft(x);
  const auto n = static_cast<double>(x.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double kk = k < (spec.size() + 1) / 2 ? static_cast<double>(k) : static_cast<double>(k) - n;
    const double f = kk * fs / n;
    if (f >= f_lo && f <= f_hi) acc += std::norm(spec[k]);
  }
  return acc / (n * n);
}

std::vector<cplx> compose_signals(const SceneRecord& rec, std::uint64_t seed,
                                  const ModRegistry& reg) {
  const auto total = rec.num_samples();
  std::vector<cplx> out(total);
  for (const auto& s : rec.signals) {
    const auto cfg = burst_config_from(s);
    auto burst = synthesize_burst(cfg, rec.fs, derive_seed(seed, "burst", static_cast<std::uint64_t>(s.id)), {}, reg);
    const double p_in = inband_power(burst, rec.fs, s.f_interval.lo, s.f_interval.hi);
    const double target = std::pow(10.0, s.snr_db / 10.0) * (s.bandwidth() / rec.fs) * kNoisePower;
    const double scale = p_in > 0.0 ? std::sqrt(target / p_in) : 0.0;
    const auto start = static_cast<std::size_t>(std::max<long long>(0, std::llround(s.t_interval.lo * rec.fs)));
    for (std::size_t i = 0; i < burst.size() && start + i < total; ++i) out[start + i] += scale * burst[i];
  }
  return out;
}

std::vector<cplx> compose_scene(const SceneRecord& rec, std::uint64_t seed, const ModRegistry& reg) {
  auto out = compose_signals(rec, seed, reg);
  for (const auto& spec : rec.impairments) out = impair::impair(out, rec.fs, spec);
  Rng noise(derive_seed(seed, "noise"));
  const double sigma = std::sqrt(kNoisePower / 2.0);
  for (auto& v : out) v += cplx(sigma * noise.normal(), sigma * noise.normal());
  if (!rec.iq_path.empty()) write_iq_file(rec.iq_path, rec.fs, out);
  return out;
}

}  // namespace rfsynth::scene
