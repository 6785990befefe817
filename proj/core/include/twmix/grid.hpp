#pragma once

#include <cstddef>

namespace twmix {

// Uniform periodic 1D grid. k(i) follows FFT ordering: non-negative
// frequencies first, then negative.
struct Grid1D {
  std::size_t n = 16384;
  double length = 2.1e-3;   // m
  double x_min = -0.55e-3;  // m

  double dx() const { return length / static_cast<double>(n); }
  double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
  double k(std::size_t i) const;
  double k_nyquist() const;
  double dk() const;

  // Throws ConfigError unless n is a power of two >= 2 and length > 0.
  void validate() const;
};

// Guard for spectral adequacy: the band up to k_content must sit inside the
// grid with at least `margin` of headroom relative to the Nyquist wavenumber.
void require_resolution(const Grid1D& g, double k_content, double margin = 0.5);

}
