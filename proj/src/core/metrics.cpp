#include "metrics.hpp"

#include "error.hpp"

namespace aucoder::metrics {

VeReport variance_explained(const Matrix& original, const Matrix& reconstruction, const RowMask& mask) {
  if (original.rows() != reconstruction.rows() || original.cols() != reconstruction.cols())
    fail(ErrorCode::InvalidArgument, "variance_explained: shape mismatch");
  if (static_cast<Eigen::Index>(mask.size()) != original.rows())
    fail(ErrorCode::InvalidArgument, "variance_explained: mask length does not match row count");
  double num = 0.0, den = 0.0;
  std::size_t rows = 0;
  for (Eigen::Index i = 0; i < original.rows(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    num += (original.row(i) - reconstruction.row(i)).squaredNorm();
    den += original.row(i).squaredNorm();
    ++rows;
  }
  return ve_from_sums(num, den, rows);
}

VeReport ve_from_sums(double residual_sq, double original_sq, std::size_t rows_used) {
  if (!(original_sq > 0.0)) fail(ErrorCode::Degenerate, "variance_explained: original is zero on the masked rows");
  VeReport r;
  r.numerator = residual_sq;
  r.denominator = original_sq;
  r.rows_used = rows_used;
  r.value = 100.0 * (1.0 - residual_sq / original_sq);
  return r;
}

VeReport variance_explained(const Matrix& original, const Matrix& reconstruction) {
  return variance_explained(original, reconstruction, RowMask(static_cast<std::size_t>(original.rows()), true));
}

double mean_components(const Matrix& weights) {
  if (weights.cols() == 0) fail(ErrorCode::InvalidArgument, "mean_components: empty weight matrix");
  Eigen::Index nonzeros = 0;
  for (Eigen::Index j = 0; j < weights.cols(); ++j)
    for (Eigen::Index i = 0; i < weights.rows(); ++i)
      if (weights(i, j) != 0.0) ++nonzeros;
  return static_cast<double>(nonzeros) / static_cast<double>(weights.cols());
}

}  // namespace aucoder::metrics
