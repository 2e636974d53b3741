#include "features.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "error.hpp"

namespace aucoder::features {

void FeatureMatrix::validate() const {
  if (data.rows() != static_cast<Eigen::Index>(kFeatureRows))
    fail(ErrorCode::InvalidArgument, "feature matrix must have 136 rows");
  if (row_mask.size() != kFeatureRows) fail(ErrorCode::InvalidArgument, "row mask must have 136 entries");
  if (static_cast<std::size_t>(data.cols()) != columns.size())
    fail(ErrorCode::InvalidArgument, "column metadata count does not match matrix columns");
  if (!data.allFinite()) fail(ErrorCode::InvalidArgument, "feature matrix has non-finite entries");
  for (std::size_t r = 0; r < kFeatureRows; ++r) {
    if (!row_mask[r] && !data.row(static_cast<Eigen::Index>(r)).isZero(0.0))
      fail(ErrorCode::MaskMismatch, "masked-out feature row " + std::to_string(r) + " is not zero");
  }
}

std::string to_string(AuKind kind) {
  switch (kind) {
    case AuKind::Pure: return "pure";
    case AuKind::Comb: return "comb";
    case AuKind::Custom: return "custom";
  }
  return "custom";
}

AuKind au_kind_from_string(const std::string& s) {
  if (s == "pure") return AuKind::Pure;
  if (s == "comb") return AuKind::Comb;
  if (s == "custom") return AuKind::Custom;
  fail(ErrorCode::InvalidArgument, "unknown AU dictionary kind '" + s + "'");
}

Vector frame_to_vector(const io::KeypointFrame& frame) {
  Vector v(static_cast<Eigen::Index>(kFeatureRows));
  for (std::size_t k = 0; k < kTemplatePoints; ++k) {
    const bool on = frame.mask[k];
    v(static_cast<Eigen::Index>(2 * k)) = on ? frame.points[k].x : 0.0;
    v(static_cast<Eigen::Index>(2 * k + 1)) = on ? frame.points[k].y : 0.0;
  }
  return v;
}

FeatureMatrix build_features(const std::vector<io::KeypointFrame>& frames, const io::DatasetManifest& manifest) {
  if (frames.empty()) fail(ErrorCode::InvalidArgument, "no frames to build features from");
  std::map<std::string, int> neutral_of;
  for (const auto& s : manifest.subjects) neutral_of[s.id] = s.neutral_frame;

  const KeypointMask mask = frames.front().mask;
  std::map<std::string, const io::KeypointFrame*> neutral;
  for (const auto& f : frames) {
    if (f.mask != mask) fail(ErrorCode::MaskMismatch, "keypoint mask differs across frames of one dataset");
    auto it = neutral_of.find(f.subject_id);
    if (it == neutral_of.end())
      fail(ErrorCode::InvalidArgument, "frame of subject '" + f.subject_id + "' not listed in manifest");
    if (f.frame_index == it->second && !neutral.count(f.subject_id)) neutral[f.subject_id] = &f;
  }

  std::vector<const io::KeypointFrame*> expr;
  for (const auto& f : frames) {
    if (!neutral.count(f.subject_id))
      fail(ErrorCode::InvalidArgument, "subject '" + f.subject_id + "' has no neutral frame");
    if (f.frame_index != neutral_of[f.subject_id]) expr.push_back(&f);
  }
  std::stable_sort(expr.begin(), expr.end(), [](const auto* a, const auto* b) {
    if (a->subject_id != b->subject_id) return a->subject_id < b->subject_id;
    return a->frame_index < b->frame_index;
  });

  FeatureMatrix x;
  x.dataset_id = manifest.dataset_id;
  x.row_mask = row_mask_from_keypoints(mask);
  x.data.resize(static_cast<Eigen::Index>(kFeatureRows), static_cast<Eigen::Index>(expr.size()));
  std::map<std::string, Vector> neutral_vec;
  for (const auto& [id, f] : neutral) neutral_vec[id] = frame_to_vector(*f);
  for (std::size_t j = 0; j < expr.size(); ++j) {
    x.data.col(static_cast<Eigen::Index>(j)) = frame_to_vector(*expr[j]) - neutral_vec[expr[j]->subject_id];
    x.columns.push_back({expr[j]->subject_id, expr[j]->frame_index});
  }
  if (x.data.cols() == 0) fail(ErrorCode::InvalidArgument, "dataset has no non-neutral frames");
  return x;
}

AuDictionary build_au_dictionary(const std::vector<io::KeypointFrame>& apex_frames,
                                 const io::KeypointFrame& neutral_frame, const geometry::AnchorSet& anchors,
                                 AuKind kind, const std::vector<std::string>& labels) {
  if (apex_frames.empty()) fail(ErrorCode::InvalidArgument, "empty dictionary: no apex frames");
  if (!labels.empty() && labels.size() != apex_frames.size())
    fail(ErrorCode::InvalidArgument, "AU label count does not match apex frame count");
  const auto neutral = geometry::register_frame(neutral_frame, anchors);
  const Vector nv = frame_to_vector(neutral);

  AuDictionary d;
  d.kind = kind;
  d.row_mask = row_mask_from_keypoints(neutral_frame.mask);
  d.columns.resize(static_cast<Eigen::Index>(kFeatureRows), static_cast<Eigen::Index>(apex_frames.size()));
  for (std::size_t j = 0; j < apex_frames.size(); ++j) {
    if (apex_frames[j].mask != neutral_frame.mask)
      fail(ErrorCode::MaskMismatch, "AU apex frame mask differs from the neutral frame mask");
    d.columns.col(static_cast<Eigen::Index>(j)) = frame_to_vector(geometry::register_frame(apex_frames[j], anchors)) - nv;
    d.labels.push_back(labels.empty() ? "AU" + std::to_string(j + 1) : labels[j]);
  }
  return d;
}

std::vector<Eigen::Index> sample_indices(Eigen::Index m, Eigen::Index count, std::uint64_t seed) {
  if (count < 0 || count > m)
    fail(ErrorCode::OutOfRange, "sample count " + std::to_string(count) + " exceeds column count " + std::to_string(m));
  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto n = static_cast<std::uint64_t>(m - i);
    const std::uint64_t threshold = (0 - n) % n;
    std::uint64_t r;
    do {
      r = rng();
    } while (r < threshold);
    const auto j = i + static_cast<Eigen::Index>(r % n);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());
  return idx;
}

FeatureMatrix subsample_columns(const FeatureMatrix& x, Eigen::Index count, std::uint64_t seed) {
  const auto idx = sample_indices(x.cols(), count, seed);
  FeatureMatrix out;
  out.dataset_id = x.dataset_id;
  out.row_mask = x.row_mask;
  out.neutral_excluded = x.neutral_excluded;
  out.subsample_seed = seed;
  out.data.resize(x.data.rows(), count);
  for (std::size_t j = 0; j < idx.size(); ++j) {
    out.data.col(static_cast<Eigen::Index>(j)) = x.data.col(idx[j]);
    out.columns.push_back(x.columns[static_cast<std::size_t>(idx[j])]);
  }
  return out;
}

}  // namespace aucoder::features
