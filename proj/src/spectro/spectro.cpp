#include "rfsynth/spectro/spectro.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <numbers>

#include <json.hpp>
#include <png.h>

#include "rfsynth/core/error.hpp"
#include "rfsynth/core/fft.hpp"
#include "rfsynth/core/hash.hpp"

namespace rfsynth::spectro {

namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::array<std::uint8_t, 3> kViridis[256] = {
#include "viridis_table.inc"
};

}  // namespace

std::string_view to_string(Window w) {
  switch (w) {
    case Window::blackman: return "blackman";
    case Window::hann: return "hann";
    case Window::rect: return "rect";
  }
  return "?";
}

Window window_from_string(std::string_view s) {
  if (s == "blackman") return Window::blackman;
  if (s == "hann") return Window::hann;
  if (s == "rect") return Window::rect;
  throw ConfigError("unknown window '" + std::string(s) + "'");
}

std::string_view to_string(Colormap c) { return c == Colormap::gray ? "gray" : "viridis"; }

Colormap colormap_from_string(std::string_view s) {
  if (s == "gray") return Colormap::gray;
  if (s == "viridis") return Colormap::viridis;
  throw ConfigError("unknown colormap '" + std::string(s) + "'");
}

void validate(const StftConfig& cfg) {
  if (cfg.hop <= 0) throw ConfigError("STFT hop must be positive");
  if (cfg.win_len <= 0 || cfg.win_len > cfg.fft_size) throw ConfigError("STFT window must satisfy 0 < win_len <= fft_size");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
}

std::string config_hash(const StftConfig& cfg) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "F=%d;win=%d;hop=%d;window=%s;centered=%d;shift=%d;eps=%.17g", cfg.fft_size,
                cfg.win_len, cfg.hop, std::string(to_string(cfg.window)).c_str(), cfg.centered ? 1 : 0,
                cfg.fft_shift ? 1 : 0, cfg.epsilon);
  return digest(buf);
}

std::vector<double> make_window(Window w, int n) {
  std::vector<double> out(static_cast<std::size_t>(n), 1.0);
  for (int i = 0; i < n; ++i) {
    const double x = 2 * kPi * i / n;
    switch (w) {
      case Window::blackman: out[i] = 0.42 - 0.5 * std::cos(x) + 0.08 * std::cos(2 * x); break;
      case Window::hann: out[i] = 0.5 - 0.5 * std::cos(x); break;
      case Window::rect: break;
    }
  }
  return out;
}

Matrix<cplx> stft(std::span<const cplx> iq, const StftConfig& cfg) {
  validate(cfg);
  std::vector<cplx> padded;
  std::span<const cplx> x = iq;
  if (cfg.centered) {
    const std::size_t pad = static_cast<std::size_t>(cfg.win_len / 2);
    padded.assign(pad, cplx{});
    padded.insert(padded.end(), iq.begin(), iq.end());
    padded.insert(padded.end(), pad, cplx{});
    x = padded;
  }
  const auto win = static_cast<std::size_t>(cfg.win_len);
  const auto hop = static_cast<std::size_t>(cfg.hop);
  const auto f = static_cast<std::size_t>(cfg.fft_size);
  if (x.size() < win) throw InputError("buffer shorter than one STFT window");
  const std::size_t frames = (x.size() - win) / hop + 1;
  const auto w = make_window(cfg.window, cfg.win_len);

  Matrix<cplx> out{f, frames, std::vector<cplx>(f * frames)};
  FftPlan plan(f, FftPlan::Direction::forward);
  std::vector<cplx> buf(f);
  for (std::size_t t = 0; t < frames; ++t) {
    std::fill(buf.begin(), buf.end(), cplx{});
    for (std::size_t m = 0; m < win; ++m) buf[m] = x[t * hop + m] * w[m];
    plan.execute(buf);
    // Phase referenced to absolute sample index: exp(-j 2 pi k t hop / F).
    const std::size_t shift = (t * hop) % f;
    for (std::size_t k = 0; k < f; ++k) {
      cplx v = buf[k];
      if (shift != 0) v *= std::polar(1.0, -2 * kPi * static_cast<double>((k * shift) % f) / static_cast<double>(f));
      out(cfg.fft_shift ? shifted_row(k, f) : k, t) = v;
    }
  }
  return out;
}

Matrix<double> to_db(const Matrix<cplx>& s, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  Matrix<double> out{s.rows, s.cols, std::vector<double>(s.data.size())};
  for (std::size_t i = 0; i < s.data.size(); ++i) out.data[i] = 10.0 * std::log10(std::norm(s.data[i]) + epsilon);
  return out;
}

SpectrogramGrid spectrogram(std::span<const cplx> iq, double fs, const StftConfig& cfg) {
  SpectrogramGrid g;
  g.values = to_db(stft(iq, cfg), cfg.epsilon);
  g.fs = fs;
  const double offset = cfg.centered ? -0.5 * cfg.win_len : 0.0;
  for (std::size_t t = 0; t < g.values.cols; ++t)
    g.frame_times.push_back((static_cast<double>(t) * cfg.hop + offset) / fs);
  const auto f = static_cast<std::size_t>(cfg.fft_size);
  g.bin_freqs.resize(f);
  for (std::size_t k = 0; k < f; ++k) {
    const double signed_k = k < (f + 1) / 2 ? static_cast<double>(k) : static_cast<double>(k) - f;
    g.bin_freqs[cfg.fft_shift ? shifted_row(k, f) : k] = signed_k * fs / f;
  }
  return g;
}

std::array<std::uint8_t, 3> viridis(std::uint8_t index) { return kViridis[index]; }

Image render_image(const Matrix<double>& a, const RenderConfig& cfg) {
  if (a.data.empty()) throw InputError("cannot render an empty grid");
  if (cfg.height <= 0 || cfg.width <= 0) throw ConfigError("image size must be positive");
  if (cfg.channels != 1 && cfg.channels != 3) throw ConfigError("image channels must be 1 or 3");
  if (!(cfg.dynamic_range_db > 0.0)) throw ConfigError("dynamic range must be positive");
  const double hi = *std::max_element(a.data.begin(), a.data.end());
  const double floor = hi - cfg.dynamic_range_db;
  double lo = hi;
  for (double v : a.data) lo = std::min(lo, std::max(v, floor));
  const double range = hi - lo;

  std::vector<std::uint8_t> level(a.data.size());
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double v = std::clamp(a.data[i], floor, hi);
    const double u = range > 0.0 ? (v - lo) / range : 0.0;
    level[i] = static_cast<std::uint8_t>(std::lround(u * 255.0));
  }

  Image img{cfg.height, cfg.width, cfg.channels,
            std::vector<std::uint8_t>(static_cast<std::size_t>(cfg.height) * cfg.width * cfg.channels)};
  for (int y = 0; y < cfg.height; ++y) {
    const std::size_t src_row = a.rows - 1 - static_cast<std::size_t>(y) * a.rows / cfg.height;
    for (int x = 0; x < cfg.width; ++x) {
      const std::size_t src_col = static_cast<std::size_t>(x) * a.cols / cfg.width;
      const std::uint8_t l = level[src_row * a.cols + src_col];
      auto* px = &img.pixels[(static_cast<std::size_t>(y) * cfg.width + x) * cfg.channels];
      if (cfg.colormap == Colormap::gray) {
        for (int c = 0; c < cfg.channels; ++c) px[c] = l;
      } else if (cfg.channels == 3) {
        const auto rgb = kViridis[l];
        px[0] = rgb[0];
        px[1] = rgb[1];
        px[2] = rgb[2];
      } else {
        px[0] = kViridis[l][1];
      }
    }
  }
  return img;
}

void write_png(const Image& img, const std::string& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw IoError("cannot open '" + path + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encode failed for '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, const_cast<png_bytep>(img.pixels.data() + y * stride));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_png(const std::string& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!fp) throw IoError("cannot open '" + path + "'");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError("PNG decode failed for '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  const int type = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) != 8 || (type != PNG_COLOR_TYPE_GRAY && type != PNG_COLOR_TYPE_RGB)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError("unsupported PNG layout in '" + path + "'");
  }
  Image img;
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.channels = type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
  img.pixels.resize(stride * img.height);
  for (int y = 0; y < img.height; ++y) png_read_row(png, img.pixels.data() + y * stride, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void dump_grid(const SpectrogramGrid& g, const StftConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  std::vector<unsigned char> bytes(g.values.data.size() * 4);
  for (std::size_t i = 0; i < g.values.data.size(); ++i) {
    const auto v = static_cast<float>(g.values.data[i]);
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<unsigned char>(u >> (8 * b));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path + "'");

  nlohmann::json side = {{"rows", g.values.rows}, {"cols", g.values.cols}, {"dtype", "float32-le"},
                         {"fs", g.fs}, {"config_hash", config_hash(cfg)},
                         {"fft_size", cfg.fft_size}, {"win_len", cfg.win_len}, {"hop", cfg.hop},
                         {"window", to_string(cfg.window)}, {"fft_shift", cfg.fft_shift},
                         {"centered", cfg.centered}, {"epsilon", cfg.epsilon}};
  std::ofstream js(path + ".json");
  js << side.dump(2) << "\n";
  if (!js) throw IoError("write failed for '" + path + ".json'");
}

SpectrogramGrid load_grid(const std::string& path) {
  std::ifstream js(path + ".json");
  if (!js) throw IoError("cannot open '" + path + ".json'");
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(js);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("bad grid sidecar: " + std::string(e.what()));
  }
  SpectrogramGrid g;
  g.values.rows = side.at("rows").get<std::size_t>();
  g.values.cols = side.at("cols").get<std::size_t>();
  g.fs = side.at("fs").get<double>();
  std::ifstream in(path, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
  if (bytes.size() != g.values.rows * g.values.cols * 4) throw InputError("grid payload size mismatch");
  g.values.data.resize(g.values.rows * g.values.cols);
  for (std::size_t i = 0; i < g.values.data.size(); ++i) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(bytes[i * 4 + b]) << (8 * b);
    float v;
    std::memcpy(&v, &u, 4);
    g.values.data[i] = v;
  }
  return g;
}

}  // namespace rfsynth::spectro
