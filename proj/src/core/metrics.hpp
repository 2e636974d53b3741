#pragma once

#include <cstddef>

#include "types.hpp"

namespace aucoder::metrics {

struct VeReport {
  double value = 0.0;        // percent, may be negative
  double numerator = 0.0;    // squared Frobenius norm of the residual
  double denominator = 0.0;  // squared Frobenius norm of the original
  std::size_t rows_used = 0;
};

// 100 * (1 - |orig - recon|_F^2 / |orig|_F^2) over rows where mask is true.
VeReport variance_explained(const Matrix& original, const Matrix& reconstruction, const RowMask& mask);
VeReport variance_explained(const Matrix& original, const Matrix& reconstruction);

// Same formula from precomputed squared norms, for streaming callers.
VeReport ve_from_sums(double residual_sq, double original_sq, std::size_t rows_used);

// Average count of stored nonzeros per column.
double mean_components(const Matrix& weights);

}  // namespace aucoder::metrics
