#include "pca.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "metrics.hpp"

namespace aucoder::pca {

namespace {

std::vector<Eigen::Index> mask_rows(const RowMask& mask) {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) rows.push_back(static_cast<Eigen::Index>(i));
  return rows;
}

// Flip so the largest-magnitude entry is positive; first index wins ties.
void fix_sign(Eigen::Ref<Vector> v) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  if (v.size() > 0 && v(best) < 0.0) v = -v;
}

}  // namespace

PcaModel PcaModel::truncated(Eigen::Index new_k) const {
  if (new_k < 1 || new_k > k()) fail(ErrorCode::OutOfRange, "truncation k out of range");
  PcaModel out = *this;
  out.basis = basis.leftCols(new_k);
  out.singular_values = singular_values.head(new_k);
  return out;
}

PcaModel fit_pca(const Matrix& x, const RowMask& mask, Eigen::Index k, std::string dataset_id) {
  if (static_cast<Eigen::Index>(mask.size()) != x.rows())
    fail(ErrorCode::InvalidArgument, "fit_pca: mask length does not match row count");
  if (!x.allFinite()) fail(ErrorCode::InvalidArgument, "fit_pca: data has non-finite entries");
  const auto rows = mask_rows(mask);
  const auto p_eff = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index limit = std::min(p_eff, x.cols());
  if (k < 1 || k > limit)
    fail(ErrorCode::OutOfRange, "fit_pca: k=" + std::to_string(k) + " outside [1, " + std::to_string(limit) + "]");

  Matrix sub(p_eff, x.cols());
  for (Eigen::Index r = 0; r < p_eff; ++r) sub.row(r) = x.row(rows[static_cast<std::size_t>(r)]);
  const double energy = sub.squaredNorm();
  if (!(energy > 0.0)) fail(ErrorCode::Degenerate, "fit_pca: data matrix is all zero (rank 0)");

  Eigen::BDCSVD<Matrix> svd(sub, Eigen::ComputeThinU);
  Matrix u_sub = svd.matrixU().leftCols(k);
  for (Eigen::Index j = 0; j < k; ++j) fix_sign(u_sub.col(j));

  PcaModel model;
  model.basis = Matrix::Zero(x.rows(), k);
  for (Eigen::Index r = 0; r < p_eff; ++r) model.basis.row(rows[static_cast<std::size_t>(r)]) = u_sub.row(r);
  model.singular_values = svd.singularValues().head(k);
  model.train_row_mask = mask;
  model.train_dataset_id = std::move(dataset_id);
  model.train_energy = energy;
  return model;
}

PcaModel fit_pca(const features::FeatureMatrix& x, Eigen::Index k) {
  return fit_pca(x.data, x.row_mask, k, x.dataset_id);
}

KSelection select_k(const features::FeatureMatrix& x, double target_percent) {
  if (!(target_percent > 0.0) || target_percent > 100.0)
    fail(ErrorCode::OutOfRange, "target VE must lie in (0, 100]");
  const Eigen::Index limit = std::min(static_cast<Eigen::Index>(mask_count(x.row_mask)), x.cols());
  const PcaModel full = fit_pca(x, limit);
  const Vector s2 = full.singular_values.array().square();
  const double total = full.train_energy;
  // Small slack so a target of exactly 100 is reachable at full rank.
  constexpr double kSlack = 1e-9;
  KSelection sel;
  double cum = 0.0;
  for (Eigen::Index k = 0; k < s2.size(); ++k) {
    cum += s2(k);
    const double ve = 100.0 * cum / total;
    if (sel.k == 0 && ve >= target_percent - kSlack) sel.k = k + 1;
  }
  sel.max_train_ve = train_ve(full, x);
  if (sel.k == 0)
    fail(ErrorCode::OutOfRange, "target Train VE " + std::to_string(target_percent) +
                                    " is unreachable; maximum achievable is " + std::to_string(sel.max_train_ve));
  sel.train_ve = train_ve(full.truncated(sel.k), x);
  return sel;
}

Matrix masked_columns(const Matrix& u, const RowMask& mask) {
  if (static_cast<Eigen::Index>(mask.size()) != u.rows())
    fail(ErrorCode::InvalidArgument, "masked_columns: mask length does not match row count");
  Matrix out = u;
  for (Eigen::Index r = 0; r < u.rows(); ++r)
    if (!mask[static_cast<std::size_t>(r)]) out.row(r).setZero();
  return out;
}

Projection project(const PcaModel& model, const Matrix& y, const RowMask& y_mask) {
  if (y.rows() != model.basis.rows()) fail(ErrorCode::InvalidArgument, "project: row count mismatch");
  if (!y.allFinite()) fail(ErrorCode::InvalidArgument, "project: test data has non-finite entries");
  Projection p;
  p.common_row_mask = mask_and(model.train_row_mask, y_mask);
  if (mask_count(p.common_row_mask) == 0)
    fail(ErrorCode::MaskMismatch, "project: train and test data share no keypoints");
  const Matrix u = masked_columns(model.basis, p.common_row_mask);
  p.masked_input = masked_columns(y, p.common_row_mask);
  p.weights = u.transpose() * p.masked_input;
  p.reconstruction = u * p.weights;
  return p;
}

Projection project(const PcaModel& model, const features::FeatureMatrix& y) {
  return project(model, y.data, y.row_mask);
}

double train_ve(const PcaModel& model, const features::FeatureMatrix& x) { return test_ve(model, x); }

double test_ve(const PcaModel& model, const features::FeatureMatrix& y) {
  const auto p = project(model, y);
  return metrics::variance_explained(p.masked_input, p.reconstruction, p.common_row_mask).value;
}

}  // namespace aucoder::pca
