#include "twmix/grid.hpp"

#include <numbers>

#include "twmix/errors.hpp"

namespace twmix {

double Grid1D::k(std::size_t i) const {
  const double dk = 2.0 * std::numbers::pi / length;
  const auto half = n / 2;
  if (i < half) return dk * static_cast<double>(i);
  return dk * (static_cast<double>(i) - static_cast<double>(n));
}

double Grid1D::k_nyquist() const {
  return std::numbers::pi * static_cast<double>(n) / length;
}

double Grid1D::dk() const { return 2.0 * std::numbers::pi / length; }

void Grid1D::validate() const {
  if (!(length > 0)) throw ConfigError("grid length must be positive");
  if (n < 2 || (n & (n - 1)) != 0) throw ConfigError("grid size must be a power of two >= 2");
}

void require_resolution(const Grid1D& g, double k_content, double margin) {
  g.validate();
  const double k_nyq = g.k_nyquist();
  if (!(k_content * (1.0 + margin) <= k_nyq))
    throw ConfigError("grid cannot resolve the requested band with the required margin");
}

}  // namespace twmix
