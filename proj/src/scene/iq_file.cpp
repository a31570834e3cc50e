#include "rfsynth/scene/iq_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rfsynth/core/error.hpp"

namespace rfsynth::scene {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[off + i]) << (8 * i);
  return v;
}

float get_f32(std::span<const std::uint8_t> b, std::size_t off) {
  return std::bit_cast<float>(get_u32(b, off));
}

}  // namespace

std::vector<std::uint8_t> encode_iq(double fs, std::span<const std::complex<double>> iq) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + iq.size() * 8);
  out.insert(out.end(), {'R', 'F', 'I', 'Q'});
  put_u32(out, kIqFormatVersion);
  put_f32(out, static_cast<float>(fs));
  put_u32(out, static_cast<std::uint32_t>(iq.size()));
  for (const auto& s : iq) {
    put_f32(out, static_cast<float>(s.real()));
    put_f32(out, static_cast<float>(s.imag()));
  }
  return out;
}

IqFile decode_iq(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), "RFIQ", 4) != 0)
    throw InputError("not an IQ file (bad magic)");
  if (get_u32(bytes, 4) != kIqFormatVersion) throw InputError("unsupported IQ format version");
  IqFile f;
  f.fs = get_f32(bytes, 8);
  const auto n = get_u32(bytes, 12);
  if (bytes.size() != 16 + static_cast<std::size_t>(n) * 8) throw InputError("IQ file length mismatch");
  f.samples.resize(n);
  for (std::uint32_t i = 0; i < n; ++i)
    f.samples[i] = {get_f32(bytes, 16 + 8 * i), get_f32(bytes, 20 + 8 * i)};
  return f;
}

void write_iq_file(const std::string& path, double fs, std::span<const std::complex<double>> iq) {
  const auto bytes = encode_iq(fs, iq);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write IQ file " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path);
}

IqFile read_iq_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open IQ file " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_iq(bytes);
}

}  // namespace rfsynth::scene
