#pragma once

#include <string>

#include "features.hpp"
#include "types.hpp"

namespace aucoder::pca {

// Uncentered truncated-SVD basis. Columns are the PCA AUs.
struct PcaModel {
  Matrix basis;            // p x k, orthonormal columns
  Vector singular_values;  // k, non-increasing
  RowMask train_row_mask;
  std::string train_dataset_id;
  double train_energy = 0.0;  // |X|_F^2 over the training mask

  Eigen::Index k() const { return basis.cols(); }
  // Leading k columns of this model.
  PcaModel truncated(Eigen::Index k) const;
};

inline constexpr const char* kSignConvention = "max-abs-positive/lowest-row";

// Rows outside the training mask never enter the decomposition, so k is
// bounded by min(masked rows, m).
PcaModel fit_pca(const Matrix& x, const RowMask& mask, Eigen::Index k, std::string dataset_id = {});
PcaModel fit_pca(const features::FeatureMatrix& x, Eigen::Index k);

struct KSelection {
  Eigen::Index k = 0;
  double train_ve = 0.0;     // at the selected k
  double max_train_ve = 0.0; // at full rank
};

// Smallest k whose Train VE reaches target_percent. Throws OutOfRange with the
// maximum achievable value when the target cannot be met.
KSelection select_k(const features::FeatureMatrix& x, double target_percent);

struct Projection {
  Matrix weights;         // k x n
  Matrix reconstruction;  // p x n
  RowMask common_row_mask;
  Matrix masked_input;    // test data with rows outside the common mask zeroed
};

// Zeroes rows outside mask. The result is generally not orthonormal.
Matrix masked_columns(const Matrix& u, const RowMask& mask);

// V' = U_m^T Y_m and Yhat = U_m V' over the rows both datasets carry.
Projection project(const PcaModel& model, const Matrix& y, const RowMask& y_mask);
Projection project(const PcaModel& model, const features::FeatureMatrix& y);

double train_ve(const PcaModel& model, const features::FeatureMatrix& x);
double test_ve(const PcaModel& model, const features::FeatureMatrix& y);

}  // namespace aucoder::pca
