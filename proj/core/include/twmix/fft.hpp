#pragma once

#include <complex>
#include <cstddef>
#include <memory>

namespace twmix {

// Shared-plan in-place complex FFT. Plans are cached per size and reused by
// all instances; execution is thread-safe and deterministic (plans are built
// with heuristics only, never runtime measurement, so repeated runs of the
// same build produce identical floating-point output).
class Fft1D {
 public:
  explicit Fft1D(std::size_t n);

  void forward(std::complex<double>* data) const;
  // Includes the 1/n normalization.
  void inverse(std::complex<double>* data) const;

  std::size_t size() const;

 private:
  struct Plans;
  std::shared_ptr<const Plans> plans_;
};

}
