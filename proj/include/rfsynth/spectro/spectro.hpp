#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rfsynth::spectro {

using cplx = std::complex<double>;

enum class Window { blackman, hann, rect };
std::string_view to_string(Window w);
Window window_from_string(std::string_view s);

struct StftConfig {
  int fft_size = 512;
  int win_len = 512;
  int hop = 512;
  Window window = Window::blackman;
  bool centered = false;
  bool fft_shift = true;
  double epsilon = 1e-12;
};

/// Throws ConfigError unless hop > 0, 0 < win_len <= fft_size, epsilon > 0.
void validate(const StftConfig& cfg);
std::string config_hash(const StftConfig& cfg);

/// Periodic window of length n.
std::vector<double> make_window(Window w, int n);

/// Row-major rows x cols matrix.
template <typename T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// S[k, t] = sum_n x[n] w[n - t*hop] exp(-j 2 pi k n / F), with frame t
/// covering samples [t*hop, t*hop + win_len). Rows are frequency bins
/// (shifted so negative frequencies come first when cfg.fft_shift), columns
/// are frames. Throws InputError if the buffer is shorter than one window.
Matrix<cplx> stft(std::span<const cplx> iq, const StftConfig& cfg);

/// Row index of unshifted bin k under fft_shift.
inline std::size_t shifted_row(std::size_t k, std::size_t f) { return (k + f / 2) % f; }
/// fft_shift applied to the rows of a matrix.
template <typename T>
Matrix<T> shift_rows(const Matrix<T>& m) {
  Matrix<T> out{m.rows, m.cols, std::vector<T>(m.data.size())};
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) out(shifted_row(r, m.rows), c) = m(r, c);
  return out;
}

struct SpectrogramGrid {
  Matrix<double> values;  // A_dB[k, t]
  double fs = 0.0;
  std::vector<double> frame_times;
  std::vector<double> bin_freqs;
};

/// 10 log10(|S|^2 + eps) elementwise.
Matrix<double> to_db(const Matrix<cplx>& s, double epsilon);

SpectrogramGrid spectrogram(std::span<const cplx> iq, double fs, const StftConfig& cfg = {});

enum class Colormap { gray, viridis };
std::string_view to_string(Colormap c);
Colormap colormap_from_string(std::string_view s);

struct RenderConfig {
  int height = 518;
  int width = 518;
  int channels = 1;
  double dynamic_range_db = 80.0;
  Colormap colormap = Colormap::gray;
};

/// Channels-last 8-bit image.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int y, int x, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

/// RGB of a viridis lookup entry.
std::array<std::uint8_t, 3> viridis(std::uint8_t index);

/// Clip to [max - dynamic_range, max], min-max normalize (zero range maps to
/// 0), quantize to 8 bits, look up the colormap, and nearest-neighbour resize.
/// Image row 0 holds the highest frequency; columns run forward in time.
/// With channels = 3 and a gray map the level is replicated; with channels = 1
/// and viridis the green channel is used.
Image render_image(const Matrix<double>& a_db, const RenderConfig& cfg = {});

void write_png(const Image& img, const std::string& path);
Image read_png(const std::string& path);

/// Raw little-endian float32 rows x cols dump at `path` plus `path + ".json"`
/// sidecar with dims, fs and the STFT config hash.
void dump_grid(const SpectrogramGrid& g, const StftConfig& cfg, const std::string& path);
SpectrogramGrid load_grid(const std::string& path);

}  // namespace rfsynth::spectro
