#include "rfsynth/core/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>

#include "rfsynth/core/error.hpp"

namespace rfsynth {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

std::vector<cplx> transform(std::span<const cplx> in, int sign) {
  const int n = static_cast<int>(in.size());
  std::vector<cplx> out(in.begin(), in.end());
  if (n <= 1) return out;
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(out.data()),
                            reinterpret_cast<fftw_complex*>(out.data()), sign,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

std::vector<cplx> fft(std::span<const cplx> x) { return transform(x, FFTW_FORWARD); }

std::vector<cplx> ifft_unscaled(std::span<const cplx> X) {
  return transform(X, FFTW_BACKWARD);
}

FftPlan::FftPlan(std::size_t n, Direction dir) : n_(n), plan_(nullptr), scratch_(n) {
  if (n_ <= 1) return;
  std::lock_guard<std::mutex> lock(plan_mutex());
  plan_ = fftw_plan_dft_1d(static_cast<int>(n_),
                           reinterpret_cast<fftw_complex*>(scratch_.data()),
                           reinterpret_cast<fftw_complex*>(scratch_.data()),
                           dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD,
                           FFTW_ESTIMATE);
}

FftPlan::~FftPlan() {
  if (!plan_) return;
  std::lock_guard<std::mutex> lock(plan_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void FftPlan::execute(std::span<cplx> buffer) {
  if (buffer.size() != n_) throw InputError("FftPlan: size mismatch");
  if (!plan_) return;
  // Copying through the planned buffer sidesteps FFTW's alignment rules.
  std::copy(buffer.begin(), buffer.end(), scratch_.begin());
  fftw_execute(static_cast<fftw_plan>(plan_));
  std::copy(scratch_.begin(), scratch_.end(), buffer.begin());
}

}  // namespace rfsynth
