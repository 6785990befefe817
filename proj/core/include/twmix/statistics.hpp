#pragma once

#include <cstddef>
#include <span>

namespace twmix {

// Pairwise (cascade) summation: deterministic and accurate independent of
// how the values were produced. All reductions in this library go through it.
double pairwise_sum(std::span<const double> values);

double mean(std::span<const double> values);

// Unbiased (n - 1) variance, two-pass, pairwise reductions.
double sample_variance(std::span<const double> values);

// Phase-space moduli estimate symmetric-ordered moments. Converting
// |amp|^2 averages to occupation numbers costs half a quantum per mode.
double symmetric_to_normal_population(double symmetric_value, std::size_t mode_count = 1);

// Number-squeezing parameter between two regions/modes:
//   v = [Var(w_i - w_j) - (m_i + m_j)/4] / <w_i + w_j>
// where w are per-trajectory occupation estimates with the half-quantum per
// mode already removed, and m are the mode counts of the two regions. The
// (m_i + m_j)/4 term removes the symmetric-ordering noise floor exactly, for
// any state. Coherent inputs give v = 1, two-mode-squeezed pairs v < 1.
double number_difference_variance(std::span<const double> n_i,
                                  std::span<const double> n_j,
                                  std::size_t modes_i = 1,
                                  std::size_t modes_j = 1);

}
