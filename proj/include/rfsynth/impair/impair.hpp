#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rfsynth::impair {

using cplx = std::complex<double>;

enum class Kind { IQ, PA, CFO, TDL };
std::string_view to_string(Kind k);
Kind kind_from_string(std::string_view s);

enum class TdlProfile { C_like, D_like };
std::string_view to_string(TdlProfile p);

/// One impairment at normalized severity lambda in [0, 1]; lambda = 0 is the
/// identity. `params` is filled by resolve() with the concrete physical
/// parameters so they can be echoed into scene metadata.
struct ImpairmentSpec {
  Kind kind = Kind::CFO;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::map<std::string, double> params;
  bool operator==(const ImpairmentSpec&) const = default;
};

/// Concrete parameters implied by (kind, lambda). Linear interpolation
/// between the sweep endpoints.
struct ResolvedParams {
  double gain_db = 0.0, phase_deg = 0.0;  // IQ
  double cfo_hz = 0.0;                    // CFO
  double a_sat = 0.0, knee = 0.0;         // PA, a_sat relative to input RMS
  double delay_spread_s = 0.0, doppler_hz = 0.0;
  TdlProfile profile = TdlProfile::C_like;
};

inline constexpr double kMaxIqGainDb = 8.0;
inline constexpr double kMaxIqPhaseDeg = 15.0;
inline constexpr double kMaxCfoHz = 1200.0;
inline constexpr double kMaxDelaySpreadS = 500e-6;
inline constexpr double kMaxDopplerHz = 200.0;
/// Mild-impairment cut for training eligibility.
inline constexpr double kTrainLambdaMax = 0.3;

ResolvedParams resolve(const ImpairmentSpec& spec);
/// Copy of `spec` with `params` populated from resolve().
ImpairmentSpec with_echoed_params(ImpairmentSpec spec);

bool train_eligible(std::span<const ImpairmentSpec> applied);

/// Apply one impairment family. Output has the input's length; lambda = 0
/// returns the input unchanged.
std::vector<cplx> impair(std::span<const cplx> iq, double fs, const ImpairmentSpec& spec);

/// y = mu x + nu conj(x), mu = (1 + g e^{j phi}) / 2, nu = (1 - g e^{j phi}) / 2.
std::vector<cplx> iq_imbalance(std::span<const cplx> iq, double gain_db, double phase_deg);
cplx iq_mu(double gain_db, double phase_deg);
cplx iq_nu(double gain_db, double phase_deg);

/// Rapp AM/AM: y = x / (1 + (|x|/a_sat)^{2p})^{1/(2p)}; phase preserved.
std::vector<cplx> rapp_pa(std::span<const cplx> iq, double a_sat, double p);

std::vector<cplx> apply_cfo(std::span<const cplx> iq, double fs, double cfo_hz);

struct TdlTap {
  std::size_t delay_samples;
  double power;
};

/// Seven-tap power-delay profile with total power 1. delay_spread is the
/// maximum excess delay.
std::vector<TdlTap> tdl_taps(double fs, double delay_spread_s, TdlProfile profile);

/// Time-varying FIR with sum-of-sinusoids fading on every tap (Doppler
/// bounded by doppler_hz). Throws ConfigError if the delay spread exceeds the
/// buffer duration.
std::vector<cplx> tdl_channel(std::span<const cplx> iq, double fs, double delay_spread_s,
                              double doppler_hz, TdlProfile profile, std::uint64_t seed);

}  // namespace rfsynth::impair
