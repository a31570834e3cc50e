#include "rfsynth/impair/impair.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rfsynth/core/error.hpp"
#include "rfsynth/core/rng.hpp"

namespace rfsynth::impair {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kTdlTaps = 7;
constexpr int kSosTerms = 16;

std::vector<cplx> copy_of(std::span<const cplx> iq) { return {iq.begin(), iq.end()}; }

}  // namespace

std::string_view to_string(Kind k) {
  switch (k) {
    case Kind::IQ: return "IQ";
    case Kind::PA: return "PA";
    case Kind::CFO: return "CFO";
    case Kind::TDL: return "TDL";
  }
  return "?";
}

Kind kind_from_string(std::string_view s) {
  if (s == "IQ") return Kind::IQ;
  if (s == "PA") return Kind::PA;
  if (s == "CFO") return Kind::CFO;
  if (s == "TDL") return Kind::TDL;
  throw ConfigError("unknown impairment kind '" + std::string(s) + "'");
}

std::string_view to_string(TdlProfile p) { return p == TdlProfile::C_like ? "TDL-C-like" : "TDL-D-like"; }

ResolvedParams resolve(const ImpairmentSpec& spec) {
  if (!(spec.lambda >= 0.0 && spec.lambda <= 1.0))
    throw ConfigError("impairment lambda must lie in [0, 1]");
  const double l = spec.lambda;
  ResolvedParams r;
  switch (spec.kind) {
    case Kind::IQ:
      r.gain_db = kMaxIqGainDb * l;
      r.phase_deg = kMaxIqPhaseDeg * l;
      break;
    case Kind::CFO: r.cfo_hz = kMaxCfoHz * l; break;
    case Kind::PA:
      r.a_sat = 4.0 - 3.0 * l;
      r.knee = 3.0 - 2.0 * l;
      break;
    case Kind::TDL: {
      r.delay_spread_s = kMaxDelaySpreadS * l;
      r.doppler_hz = kMaxDopplerHz * l;
      Rng rng(derive_seed(spec.seed, "tdl-profile"));
      r.profile = rng.bernoulli(0.5) ? TdlProfile::C_like : TdlProfile::D_like;
      break;
    }
  }
  return r;
}

ImpairmentSpec with_echoed_params(ImpairmentSpec spec) {
  const auto r = resolve(spec);
  spec.params.clear();
  switch (spec.kind) {
    case Kind::IQ:
      spec.params["gain_db"] = r.gain_db;
      spec.params["phase_deg"] = r.phase_deg;
      break;
    case Kind::CFO: spec.params["cfo_hz"] = r.cfo_hz; break;
    case Kind::PA:
      spec.params["a_sat"] = r.a_sat;
      spec.params["p"] = r.knee;
      break;
    case Kind::TDL:
      spec.params["delay_spread_s"] = r.delay_spread_s;
      spec.params["doppler_hz"] = r.doppler_hz;
      spec.params["profile_d_like"] = r.profile == TdlProfile::D_like ? 1.0 : 0.0;
      break;
  }
  return spec;
}

bool train_eligible(std::span<const ImpairmentSpec> applied) {
  return std::all_of(applied.begin(), applied.end(),
                     [](const ImpairmentSpec& s) { return s.lambda <= kTrainLambdaMax; });
}

cplx iq_mu(double gain_db, double phase_deg) {
  const double g = std::pow(10.0, gain_db / 20.0);
  return 0.5 * (1.0 + std::polar(g, phase_deg * kPi / 180.0));
}

cplx iq_nu(double gain_db, double phase_deg) {
  const double g = std::pow(10.0, gain_db / 20.0);
  return 0.5 * (1.0 - std::polar(g, phase_deg * kPi / 180.0));
}

std::vector<cplx> iq_imbalance(std::span<const cplx> iq, double gain_db, double phase_deg) {
  if (gain_db < 0.0) throw ConfigError("IQ gain mismatch must be non-negative");
  const cplx mu = iq_mu(gain_db, phase_deg);
  const cplx nu = iq_nu(gain_db, phase_deg);
  std::vector<cplx> out(iq.size());
  for (std::size_t n = 0; n < iq.size(); ++n) out[n] = mu * iq[n] + nu * std::conj(iq[n]);
  return out;
}

std::vector<cplx> rapp_pa(std::span<const cplx> iq, double a_sat, double p) {
  if (!(a_sat > 0.0) || !(p > 0.0)) throw ConfigError("Rapp parameters must be positive");
  std::vector<cplx> out(iq.size());
  for (std::size_t n = 0; n < iq.size(); ++n) {
    const double r = std::abs(iq[n]) / a_sat;
    out[n] = iq[n] / std::pow(1.0 + std::pow(r, 2 * p), 1.0 / (2 * p));
  }
  return out;
}

std::vector<cplx> apply_cfo(std::span<const cplx> iq, double fs, double cfo_hz) {
  std::vector<cplx> out(iq.size());
  const double w = 2 * kPi * cfo_hz / fs;
  for (std::size_t n = 0; n < iq.size(); ++n) {
    // Reduce the phase first so long buffers keep full precision.
    const double ph = std::remainder(w * static_cast<double>(n), 2 * kPi);
    out[n] = iq[n] * cplx(std::cos(ph), std::sin(ph));
  }
  return out;
}

std::vector<TdlTap> tdl_taps(double fs, double delay_spread_s, TdlProfile profile) {
  if (delay_spread_s < 0.0) throw ConfigError("delay spread must be non-negative");
  const double max_delay = delay_spread_s * fs;
  std::vector<double> w(kTdlTaps);
  for (int i = 0; i < kTdlTaps; ++i) w[i] = std::exp(-3.0 * i / (kTdlTaps - 1));
  if (profile == TdlProfile::D_like) {
    double rest = 0.0;
    for (int i = 1; i < kTdlTaps; ++i) rest += w[i];
    for (int i = 1; i < kTdlTaps; ++i) w[i] *= 0.25 / rest;
    w[0] = 0.75;
  }
  double total = 0.0;
  for (double v : w) total += v;
  std::vector<TdlTap> taps;
  for (int i = 0; i < kTdlTaps; ++i) {
    const auto d = static_cast<std::size_t>(std::llround(max_delay * i / (kTdlTaps - 1)));
    if (!taps.empty() && taps.back().delay_samples == d)
      taps.back().power += w[i] / total;
    else
      taps.push_back({d, w[i] / total});
  }
  return taps;
}

std::vector<cplx> tdl_channel(std::span<const cplx> iq, double fs, double delay_spread_s,
                              double doppler_hz, TdlProfile profile, std::uint64_t seed) {
  if (doppler_hz < 0.0) throw ConfigError("Doppler must be non-negative");
  if (delay_spread_s * fs >= static_cast<double>(iq.size()))
    throw ConfigError("delay spread exceeds the buffer duration");
  const auto taps = tdl_taps(fs, delay_spread_s, profile);
  Rng rng(derive_seed(seed, "tdl-fading"));

  struct Sos {
    double freq[kSosTerms];
    double phase[kSosTerms];
  };
  std::vector<Sos> fading(taps.size());
  for (auto& f : fading)
    for (int m = 0; m < kSosTerms; ++m) {
      const double alpha = (2 * kPi * m + rng.uniform(-kPi, kPi)) / kSosTerms;
      f.freq[m] = doppler_hz * std::cos(alpha);
      f.phase[m] = rng.uniform(0.0, 2 * kPi);
    }
  const bool los = profile == TdlProfile::D_like;
  const double los_freq = doppler_hz * std::cos(rng.uniform(0.0, 2 * kPi));
  const double los_phase = rng.uniform(0.0, 2 * kPi);
  const double norm = 1.0 / std::sqrt(static_cast<double>(kSosTerms));

  auto gain = [&](std::size_t i, double t) {
    if (los && i == 0) return std::polar(std::sqrt(taps[0].power), 2 * kPi * los_freq * t + los_phase);
    cplx acc = 0.0;
    for (int m = 0; m < kSosTerms; ++m)
      acc += std::polar(1.0, 2 * kPi * fading[i].freq[m] * t + fading[i].phase[m]);
    return acc * norm * std::sqrt(taps[i].power);
  };

  std::vector<cplx> out(iq.size());
  if (doppler_hz == 0.0) {
    for (std::size_t i = 0; i < taps.size(); ++i) {
      const cplx g = gain(i, 0.0);
      for (std::size_t n = taps[i].delay_samples; n < iq.size(); ++n) out[n] += g * iq[n - taps[i].delay_samples];
    }
    return out;
  }
  // Gains change slowly relative to fs; refresh every block.
  const std::size_t block = std::max<std::size_t>(1, static_cast<std::size_t>(fs / (doppler_hz * 200.0)));
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const std::size_t d = taps[i].delay_samples;
    for (std::size_t b = 0; b < iq.size(); b += block) {
      const cplx g = gain(i, (b + 0.5 * block) / fs);
      const std::size_t end = std::min(iq.size(), b + block);
      for (std::size_t n = std::max(b, d); n < end; ++n) out[n] += g * iq[n - d];
    }
  }
  return out;
}

std::vector<cplx> impair(std::span<const cplx> iq, double fs, const ImpairmentSpec& spec) {
  const auto r = resolve(spec);
  if (spec.lambda == 0.0) return copy_of(iq);
  switch (spec.kind) {
    case Kind::IQ: return iq_imbalance(iq, r.gain_db, r.phase_deg);
    case Kind::CFO: return apply_cfo(iq, fs, r.cfo_hz);
    case Kind::PA: {
      double p = 0.0;
      for (const auto& v : iq) p += std::norm(v);
      const double rms = iq.empty() ? 0.0 : std::sqrt(p / iq.size());
      if (rms == 0.0) return copy_of(iq);
      return rapp_pa(iq, r.a_sat * rms, r.knee);
    }
    case Kind::TDL: return tdl_channel(iq, fs, r.delay_spread_s, r.doppler_hz, r.profile, spec.seed);
  }
  return copy_of(iq);
}

}  // namespace rfsynth::impair
