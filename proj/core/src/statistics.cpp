#include "twmix/statistics.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

#include "twmix/errors.hpp"

namespace twmix {

namespace {

double pairwise_sum_impl(const double* v, std::size_t n) {
  if (n <= 32) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_impl(v, half) + pairwise_sum_impl(v + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  return pairwise_sum_impl(values.data(), values.size());
}

double mean(std::span<const double> values) {
  if (values.empty()) throw NumericalError("mean of empty sample");
  return pairwise_sum(values) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw NumericalError("variance needs at least two samples");
  const double m = mean(values);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = values[i] - m;
    sq[i] = d * d;
  }
  return pairwise_sum(sq) / static_cast<double>(n - 1);
}

double symmetric_to_normal_population(double symmetric_value, std::size_t mode_count) {
  return symmetric_value - 0.5 * static_cast<double>(mode_count);
}

double number_difference_variance(std::span<const double> n_i,
                                  std::span<const double> n_j,
                                  std::size_t modes_i, std::size_t modes_j) {
  const std::size_t n = n_i.size();
  if (n != n_j.size()) throw NumericalError("mismatched sample lengths");
  if (n < 2) throw NumericalError("variance needs at least two samples");

  std::vector<double> diff(n), sum(n);
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = n_i[i] - n_j[i];
    sum[i] = n_i[i] + n_j[i];
  }
  const double floor = 0.25 * static_cast<double>(modes_i + modes_j);
  const double var = sample_variance(diff) - floor;
  const double denom = mean(sum);
  if (!(denom > 0)) throw NumericalError("number-difference variance: nonpositive mean total");
  return var / denom;
}

}  // namespace twmix
