#pragma once

#include <string>
#include <vector>

#include "features.hpp"
#include "metrics.hpp"
#include "pca.hpp"
#include "types.hpp"

namespace aucoder::sparse {

struct LarsConfig {
  Eigen::Index max_active = 1;  // per-sample component budget
  double ridge = 0.0;           // elastic-net l2 weight; 0 is pure lasso
  double tolerance = 1e-12;     // relative tie/termination tolerance
  bool normalize_columns = false;
};

// One point on the lasso path of
//   1/2 |y - D b|^2 + ridge/2 |b|^2 + lambda |b|_1.
struct PathPoint {
  Vector coef;
  double lambda = 0.0;
  Eigen::Index active = 0;
};

// Terminal path points for every budget 1..config.max_active from a single
// homotopy run. Entry b-1 is where a run capped at b active atoms stops: the
// knot at which a (b+1)-th atom would join, or the path end when the
// correlations vanish first. Atoms leave the active set when their
// coefficient crosses zero.
std::vector<PathPoint> lars_budget_path(const Vector& y, const Matrix& dict, const LarsConfig& config);

PathPoint lars_path_point(const Vector& y, const Matrix& dict, const LarsConfig& config);
Vector lars_encode(const Vector& y, const Matrix& dict, const LarsConfig& config);

// Atoms plus the rows they are defined on.
struct Dictionary {
  std::string id;
  std::string kind;  // "pca", "pure", "comb", "custom"
  Matrix atoms;      // p x c
  RowMask row_mask;
  std::vector<std::string> labels;

  Eigen::Index size() const { return atoms.cols(); }
  static Dictionary from_model(const pca::PcaModel& model, std::string id = "pca");
  static Dictionary from_au(const features::AuDictionary& au, std::string id = {});
};

struct SparseCode {
  Matrix weights;  // c x n
  std::vector<Eigen::Index> active_counts;
  std::string dictionary_id;
  Eigen::Index max_active = 0;
  double ridge = 0.0;
  bool normalized = false;
};

struct EncodeResult {
  SparseCode code;
  Matrix reconstruction;  // rows outside common_row_mask are zero
  Matrix masked_input;
  RowMask common_row_mask;
  metrics::VeReport ve;
  double realized_mc = 0.0;
};

// Column-wise encoding over the rows both the data and the dictionary carry.
// Atoms that vanish on the common rows are never selected.
EncodeResult encode_matrix(const Matrix& y, const RowMask& y_mask, const Dictionary& dict, const LarsConfig& config);
EncodeResult encode_matrix(const features::FeatureMatrix& y, const Dictionary& dict, const LarsConfig& config);

struct SweepRow {
  Eigen::Index budget = 0;
  double realized_mc = 0.0;
  double test_ve = 0.0;
};

// One encoding per budget (ascending), all read off a single path per column.
std::vector<SweepRow> sweep_budget(const features::FeatureMatrix& y, const Dictionary& dict,
                                   const std::vector<Eigen::Index>& budgets, const LarsConfig& base = {});

}  // namespace aucoder::sparse
