#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rfsynth/scene/modclass.hpp"
#include "rfsynth/scene/types.hpp"

namespace rfsynth::scene {

using cplx = std::complex<double>;

struct BurstConfig {
  std::string mod_class;
  double t_start = 0.0;
  double duration = 0.0;
  double f_center = 0.0;
  double bandwidth = 0.0;
  double snr_db = 0.0;
  /// Symbol rate (linear/FSK), subcarrier spacing (OFDM), or message
  /// bandwidth (AM/FM).
  double symbol_rate = 0.0;
  Waveform waveform = Waveform::native;
  double rolloff = kRrcRolloff;
  double cp_ratio = 0.125;
};

BurstConfig burst_config_from(const SignalRecord& s);

/// Returns the name of the first violated constraint, or an empty string.
/// Constraint names: unknown_class, duration_positive, bandwidth_positive,
/// in_time, in_band, class_bandwidth, rate_consistency, samples_per_symbol,
/// min_symbols, ofdm_fft_size.
std::string check_burst(const BurstConfig& cfg, double fs, double scene_duration,
                        const ModRegistry& reg = default_registry());

struct SynthOptions {
  /// Repeat the first constellation point instead of drawing random symbols.
  bool constant_symbols = false;
};

/// Baseband burst of round(duration * fs) samples shifted to f_center.
/// Unit-free amplitude; compose_scene() applies the SNR scaling.
std::vector<cplx> synthesize_burst(const BurstConfig& cfg, double fs, std::uint64_t seed,
                                   const SynthOptions& opts = {},
                                   const ModRegistry& reg = default_registry());

/// Root-raised-cosine impulse response at t/T.
double rrc_pulse(double t_over_symbol, double rolloff);

/// Mean power of the DFT components of `x` whose frequency falls in
/// [f_lo, f_hi] (Parseval-normalized, so the full band gives mean |x|^2).
double inband_power(std::span<const cplx> x, double fs, double f_lo, double f_hi);

/// Complex AWGN variance per sample used as the scene noise floor.
inline constexpr double kNoisePower = 1.0;

/// Sum of all bursts scaled to their in-band SNR, impairments from
/// rec.impairments applied to the signal sum, plus AWGN. Writes the IQ file
/// when rec.iq_path is non-empty.
std::vector<cplx> compose_scene(const SceneRecord& rec, std::uint64_t seed,
                                const ModRegistry& reg = default_registry());

/// Signal part only, before impairments and noise (for diagnostics/tests).
std::vector<cplx> compose_signals(const SceneRecord& rec, std::uint64_t seed,
                                  const ModRegistry& reg = default_registry());

}  // namespace rfsynth::scene
