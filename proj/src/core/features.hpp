#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "io.hpp"
#include "types.hpp"

namespace aucoder::features {

struct ColumnMeta {
  std::string subject_id;
  int frame_index = 0;

  friend bool operator==(const ColumnMeta&, const ColumnMeta&) = default;
};

// 136 x m displacement features; keypoint k occupies rows (2k, 2k+1).
struct FeatureMatrix {
  Matrix data;
  RowMask row_mask;
  std::vector<ColumnMeta> columns;
  std::string dataset_id;
  bool neutral_excluded = true;
  std::optional<std::uint64_t> subsample_seed;

  Eigen::Index cols() const { return data.cols(); }
  void validate() const;
};

enum class AuKind { Pure, Comb, Custom };

std::string to_string(AuKind kind);
AuKind au_kind_from_string(const std::string& s);

struct AuDictionary {
  Matrix columns;  // 136 x c
  std::vector<std::string> labels;
  RowMask row_mask;
  AuKind kind = AuKind::Custom;

  Eigen::Index size() const { return columns.cols(); }
};

// Frames must already be registered. Columns come out sorted by subject id
// and then frame index; neutral frames are dropped.
FeatureMatrix build_features(const std::vector<io::KeypointFrame>& frames, const io::DatasetManifest& manifest);

// Registers apex and neutral frames with the given anchors, then stores
// apex - neutral per column in input order.
AuDictionary build_au_dictionary(const std::vector<io::KeypointFrame>& apex_frames,
                                 const io::KeypointFrame& neutral_frame, const geometry::AnchorSet& anchors,
                                 AuKind kind, const std::vector<std::string>& labels = {});

// Uniform sample without replacement. Sampling is a partial Fisher-Yates
// shuffle over column positions driven by std::mt19937_64(seed), where each
// draw below n takes the first raw 64-bit output r >= (2^64 mod n) and uses
// r mod n. The chosen positions are returned in ascending order.
std::vector<Eigen::Index> sample_indices(Eigen::Index m, Eigen::Index count, std::uint64_t seed);
FeatureMatrix subsample_columns(const FeatureMatrix& x, Eigen::Index count, std::uint64_t seed);

Vector frame_to_vector(const io::KeypointFrame& frame);

}  // namespace aucoder::features
