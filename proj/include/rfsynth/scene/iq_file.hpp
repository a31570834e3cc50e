#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rfsynth::scene {

/// IQ file layout (all little-endian):
///   bytes 0-3   magic "RFIQ"
///   bytes 4-7   uint32 format version (1)
///   bytes 8-11  float32 sample rate in Hz
///   bytes 12-15 uint32 sample count
///   then count interleaved float32 (I, Q) pairs.
inline constexpr std::uint32_t kIqFormatVersion = 1;

struct IqFile {
  double fs = 0.0;
  std::vector<std::complex<double>> samples;
};

std::vector<std::uint8_t> encode_iq(double fs, std::span<const std::complex<double>> iq);
IqFile decode_iq(std::span<const std::uint8_t> bytes);

void write_iq_file(const std::string& path, double fs, std::span<const std::complex<double>> iq);
IqFile read_iq_file(const std::string& path);

}  // namespace rfsynth::scene
