#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "rfsynth/core/error.hpp"
#include "rfsynth/core/rng.hpp"
#include "rfsynth/impair/impair.hpp"

using namespace rfsynth;
using namespace rfsynth::impair;

namespace {

constexpr double kFs = 61.44e6;
constexpr double kPi = std::numbers::pi;

std::vector<cplx> noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<cplx> x(n);
  for (auto& v : x) v = {rng.normal(), rng.normal()};
  return x;
}

std::vector<cplx> tone(std::size_t n, double f) {
  std::vector<cplx> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::polar(1.0, 2 * kPi * f * static_cast<double>(i) / kFs);
  return x;
}

// Single-bin DFT at frequency f.
cplx dft_at(const std::vector<cplx>& x, double f) {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * std::polar(1.0, -2 * kPi * f * static_cast<double>(i) / kFs);
  return acc / static_cast<double>(x.size());
}

// Phase increment per sample of a rotated copy, averaged over the buffer.
double measured_offset_hz(const std::vector<cplx>& in, const std::vector<cplx>& out) {
  cplx acc = 0.0;
  for (std::size_t n = 1; n < in.size(); ++n) acc += (out[n] * std::conj(in[n])) * std::conj(out[n - 1] * std::conj(in[n - 1]));
  return std::arg(acc) * kFs / (2 * kPi);
}

}  // namespace

TEST_CASE("lambda zero is a bitwise identity for every family") {
  const auto x = noise(4096, 1);
  for (Kind k : {Kind::IQ, Kind::PA, Kind::CFO, Kind::TDL}) {
    const auto y = impair::impair(x, kFs, {k, 0.0, 5, {}});
    REQUIRE(y.size() == x.size());
    CHECK(std::memcmp(x.data(), y.data(), x.size() * sizeof(cplx)) == 0);
  }
}

TEST_CASE("CFO maps lambda linearly onto 0..1200 Hz") {
  CHECK(resolve({Kind::CFO, 1.0, 0, {}}).cfo_hz == 1200.0);
  CHECK(resolve({Kind::CFO, 0.5, 0, {}}).cfo_hz == 600.0);
  const auto x = noise(65536, 2);
  for (double lambda : {0.5, 1.0}) {
    const auto y = impair::impair(x, kFs, {Kind::CFO, lambda, 0, {}});
    CHECK(measured_offset_hz(x, y) == doctest::Approx(1200.0 * lambda).epsilon(1e-6));
  }
}

TEST_CASE("CFO preserves per-sample magnitude") {
  const auto x = noise(10000, 3);
  const auto y = apply_cfo(x, kFs, 987.0);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(std::abs(y[i]) - std::abs(x[i])) < 1e-12);
}

TEST_CASE("IQ imbalance at zero mismatch is the identity") {
  CHECK(std::abs(iq_mu(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(iq_nu(0, 0)) < 1e-15);
  const auto x = noise(100, 4);
  const auto y = iq_imbalance(x, 0.0, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y[i] - x[i]) < 1e-15);
}

TEST_CASE("image-to-signal ratio follows the closed form") {
  // |nu/mu|^2 = (1 - 2g cos phi + g^2) / (1 + 2g cos phi + g^2).
  const double g = std::pow(10.0, 6.0 / 20.0), phi = 10.0 * kPi / 180.0;
  const double expected = (1 - 2 * g * std::cos(phi) + g * g) / (1 + 2 * g * std::cos(phi) + g * g);
  CHECK(std::norm(iq_nu(6, 10) / iq_mu(6, 10)) == doctest::Approx(expected).epsilon(1e-12));
  const double f0 = 4.8e6;
  const auto x = tone(12800, f0);
  const auto y = iq_imbalance(x, 6, 10);
  const double ratio = std::norm(dft_at(y, -f0)) / std::norm(dft_at(y, f0));
  CHECK(ratio == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("a tone with gain mismatch shows an image at the mirrored frequency") {
  const double f0 = 4.8e6;
  const auto x = tone(12800, f0);
  CHECK(std::abs(dft_at(x, -f0)) < 1e-9);
  const auto y = iq_imbalance(x, 1.0, 0.0);
  CHECK(std::abs(dft_at(y, -f0)) > 1e-3);
}

TEST_CASE("image rejection ratio does not increase with lambda") {
  double prev = 1e300;
  for (int i = 1; i <= 20; ++i) {
    const auto r = resolve({Kind::IQ, i / 20.0, 0, {}});
    const double irr = std::norm(iq_mu(r.gain_db, r.phase_deg) / iq_nu(r.gain_db, r.phase_deg));
    CHECK(irr <= prev);
    prev = irr;
  }
  const auto full = with_echoed_params({Kind::IQ, 1.0, 0, {}});
  CHECK(full.params.at("gain_db") == 8.0);
  CHECK(full.params.at("phase_deg") == 15.0);
}

TEST_CASE("Rapp limits") {
  const double a = 2.0;
  const std::vector<cplx> small = {std::polar(a / 100, 0.3)};
  const auto ys = rapp_pa(small, a, 2.0);
  CHECK(std::abs(ys[0] - small[0]) / std::abs(small[0]) < 1e-3);
  CHECK(std::arg(ys[0]) == doctest::Approx(0.3));
  const std::vector<cplx> big = {cplx(1e8, 0)};
  CHECK(std::abs(rapp_pa(big, a, 3.0)[0]) == doctest::Approx(a).epsilon(1e-6));
  const std::vector<cplx> at = {cplx(0, a)};
  CHECK(std::abs(rapp_pa(at, a, 1.0)[0]) == doctest::Approx(a / std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(rapp_pa(small, 0.0, 1.0), ConfigError);
}

TEST_CASE("PA saturation level drops and knee sharpens with lambda") {
  const auto r0 = resolve({Kind::PA, 0.0, 0, {}});
  const auto r1 = resolve({Kind::PA, 1.0, 0, {}});
  CHECK(r0.a_sat == 4.0);
  CHECK(r1.a_sat == 1.0);
  CHECK(r0.knee == 3.0);
  CHECK(r1.knee == 1.0);
}

TEST_CASE("TDL tap powers sum to one") {
  for (auto p : {TdlProfile::C_like, TdlProfile::D_like})
    for (double ds : {0.0, 1e-6, 100e-6, 500e-6}) {
      double total = 0;
      for (const auto& t : tdl_taps(kFs, ds, p)) total += t.power;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  CHECK(tdl_taps(kFs, 0.0, TdlProfile::C_like).size() == 1);
}

TEST_CASE("flat static channel scales the input") {
  const auto x = noise(1000, 5);
  const auto y = tdl_channel(x, kFs, 0.0, 0.0, TdlProfile::C_like, 8);
  const cplx g = y[0] / x[0];
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y[i] - g * x[i]) < 1e-9);
}

TEST_CASE("TDL with zero Doppler is linear") {
  const auto a = noise(8192, 6), b = noise(8192, 7);
  std::vector<cplx> sum(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) sum[i] = a[i] + b[i];
  for (auto p : {TdlProfile::C_like, TdlProfile::D_like}) {
    const auto ya = tdl_channel(a, kFs, 20e-6, 0.0, p, 3);
    const auto yb = tdl_channel(b, kFs, 20e-6, 0.0, p, 3);
    const auto ys = tdl_channel(sum, kFs, 20e-6, 0.0, p, 3);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(ys[i] - ya[i] - yb[i]) < 1e-9);
  }
}

TEST_CASE("TDL delay spread longer than the buffer is rejected") {
  const auto x = noise(100, 1);
  CHECK_THROWS_AS(tdl_channel(x, kFs, 1e-3, 0.0, TdlProfile::C_like, 1), ConfigError);
}

TEST_CASE("impairments are length preserving and deterministic") {
  const auto x = noise(131072, 9);
  for (Kind k : {Kind::IQ, Kind::PA, Kind::CFO, Kind::TDL}) {
    const ImpairmentSpec s{k, 0.7, 11, {}};
    const auto y1 = impair::impair(x, kFs, s);
    const auto y2 = impair::impair(x, kFs, s);
    CHECK(y1.size() == x.size());
    CHECK(std::memcmp(y1.data(), y2.data(), y1.size() * sizeof(cplx)) == 0);
  }
}

TEST_CASE("train eligibility keeps only mild impairments") {
  std::vector<ImpairmentSpec> none;
  CHECK(train_eligible(none));
  std::vector<ImpairmentSpec> mild = {{Kind::CFO, 0.3, 0, {}}, {Kind::IQ, 0.1, 0, {}}};
  CHECK(train_eligible(mild));
  std::vector<ImpairmentSpec> harsh = {{Kind::CFO, 0.1, 0, {}}, {Kind::PA, 0.31, 0, {}}};
  CHECK_FALSE(train_eligible(harsh));
}

TEST_CASE("lambda outside [0, 1] is rejected") {
  CHECK_THROWS_AS(resolve({Kind::CFO, 1.5, 0, {}}), ConfigError);
  CHECK_THROWS_AS(kind_from_string("XYZ"), ConfigError);
  CHECK(kind_from_string(to_string(Kind::TDL)) == Kind::TDL);
}
