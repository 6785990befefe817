#include "twmix/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "twmix/errors.hpp"

namespace twmix {

namespace {
// FFTW planning is not thread-safe; execution via fftw_execute_dft is.
std::mutex g_plan_mutex;
}

struct Fft1D::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::size_t n = 0;

  ~Plans() {
    std::lock_guard lock(g_plan_mutex);
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

Fft1D::Fft1D(std::size_t n) {
  if (n == 0) throw ConfigError("FFT size must be positive");

  static std::map<std::size_t, std::weak_ptr<const Plans>> cache;
  std::lock_guard lock(g_plan_mutex);
  if (auto cached = cache[n].lock()) {
    plans_ = std::move(cached);
    return;
  }

  auto plans = std::make_shared<Plans>();
  plans->n = n;
  // Heuristic-only planning (no runtime measurement) keeps output
  // bit-identical run to run; UNALIGNED lets one plan serve any buffer.
  fftw_complex* buf = fftw_alloc_complex(n);
  if (!buf) throw NumericalError("FFT buffer allocation failed");
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans->fwd = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, flags);
  plans->bwd = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD, flags);
  fftw_free(buf);
  if (!plans->fwd || !plans->bwd) throw NumericalError("FFT planning failed");

  cache[n] = plans;
  plans_ = std::move(plans);
}

std::size_t Fft1D::size() const { return plans_->n; }

void Fft1D::forward(std::complex<double>* data) const {
  auto* raw = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plans_->fwd, raw, raw);
}

void Fft1D::inverse(std::complex<double>* data) const {
  auto* raw = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plans_->bwd, raw, raw);
  const double scale = 1.0 / static_cast<double>(plans_->n);
  for (std::size_t i = 0; i < plans_->n; ++i) data[i] *= scale;
}

}  // namespace twmix
