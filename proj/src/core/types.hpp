#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace aucoder {

inline constexpr std::size_t kTemplatePoints = 68;
inline constexpr std::size_t kFeatureRows = 2 * kTemplatePoints;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

using KeypointMask = std::array<bool, kTemplatePoints>;
using KeypointArray = std::array<Point2, kTemplatePoints>;

// Row presence mask over a feature matrix; true rows carry data.
using RowMask = std::vector<bool>;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline KeypointMask full_keypoint_mask() {
  KeypointMask m;
  m.fill(true);
  return m;
}

// Keypoint k occupies feature rows 2k (x) and 2k+1 (y).
inline RowMask row_mask_from_keypoints(const KeypointMask& km) {
  RowMask rows(kFeatureRows, false);
  for (std::size_t k = 0; k < kTemplatePoints; ++k) {
    rows[2 * k] = km[k];
    rows[2 * k + 1] = km[k];
  }
  return rows;
}

inline RowMask mask_and(const RowMask& a, const RowMask& b) {
  RowMask out(a.size(), false);
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) out[i] = a[i] && b[i];
  return out;
}

inline std::size_t mask_count(const RowMask& m) {
  std::size_t n = 0;
  for (bool b : m) n += b ? 1 : 0;
  return n;
}

inline std::size_t mask_count(const KeypointMask& m) {
  std::size_t n = 0;
  for (bool b : m) n += b ? 1 : 0;
  return n;
}

}  // namespace aucoder
