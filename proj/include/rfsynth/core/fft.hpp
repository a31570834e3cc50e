#pragma once

#include <complex>
#include <span>
#include <vector>

namespace rfsynth {

using cplx = std::complex<double>;

/// Forward DFT, X[k] = sum_n x[n] e^{-j 2 pi k n / N}. Any length.
std::vector<cplx> fft(std::span<const cplx> x);
/// Inverse DFT without the 1/N factor, x[n] = sum_k X[k] e^{+j 2 pi k n / N}.
std::vector<cplx> ifft_unscaled(std::span<const cplx> X);

/// Reusable fixed-size transform for hot loops (STFT frames, OFDM symbols).
/// Not copyable; one instance per thread.
class FftPlan {
 public:
  enum class Direction { forward, inverse_unscaled };

  FftPlan(std::size_t n, Direction dir);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t size() const { return n_; }
  /// Transforms `buffer` in place; its size must equal size().
  void execute(std::span<cplx> buffer);

 private:
  std::size_t n_;
  void* plan_;
  std::vector<cplx> scratch_;
};

}  // namespace rfsynth
