#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "io.hpp"
#include "types.hpp"

namespace aucoder::geometry {

// Mean frontal 68-point face fitted into a 200x200 box (y grows downward).
const KeypointArray& canonical_template();

struct PartGroup {
  std::string name;
  std::vector<int> anchors;  // 0, 1 or 2 template indices
  std::vector<int> members;
  std::vector<Point2> canonical_anchors;
};

struct AnchorSet {
  std::string id;
  std::array<int, 6> affine_anchors{};
  std::array<Point2, 6> canonical_affine{};
  std::vector<PartGroup> part_groups;

  void validate() const;
  bool affine_anchors_present(const KeypointMask& mask) const;
};

// "disfa_ck" uses {0,16,39,42,27,33}; "bp4d" uses {39,42,36,45,27,33}.
AnchorSet builtin_anchor_set(const std::string& id);
std::vector<std::string> builtin_anchor_set_names();
AnchorSet load_anchor_set(const std::filesystem::path& path);
AnchorSet resolve_anchor_set(const std::string& name_or_path, const std::filesystem::path& base_dir = {});
// First candidate whose affine anchors are all present under mask.
const AnchorSet& select_anchor_set(const KeypointMask& mask, std::span<const AnchorSet> candidates);

struct AffineParams {
  Eigen::Matrix2d linear = Eigen::Matrix2d::Identity();
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();
  double residual = 0.0;  // sum of squared anchor residuals

  Point2 apply(const Point2& p) const;
};

struct SimilarityParams {
  double scale = 1.0;
  double angle = 0.0;  // radians, counter-clockwise in the (x, y) frame
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();
  bool degenerate = false;  // translation only

  Point2 apply(const Point2& p) const;
};

// Least-squares affine map taking src onto dst (at least three points).
AffineParams estimate_affine(std::span<const Point2> src, std::span<const Point2> dst);
io::KeypointFrame apply_affine(const AffineParams& params, const io::KeypointFrame& frame);

// Two anchors give an exact scale/rotation/translation solve; one anchor gives
// a translation with the degenerate flag set.
SimilarityParams estimate_similarity(std::span<const Point2> src, std::span<const Point2> dst);

io::KeypointFrame register_frame(const io::KeypointFrame& frame, const AnchorSet& anchors);

}  // namespace aucoder::geometry
