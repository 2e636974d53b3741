#include "pipeline.hpp"

#include <algorithm>
#include <cstdio>

#include "error.hpp"
#include "geometry.hpp"
#include "metrics.hpp"
#include "svg.hpp"

namespace aucoder::pipeline {

features::FeatureMatrix preprocess(const io::DatasetManifest& manifest, const std::string& anchor_override) {
  const auto map = io::resolve_template_map(manifest.template_map_id, manifest.base_dir);
  const auto frames = io::load_frames(manifest, map);
  const std::string anchor_id = anchor_override.empty() ? manifest.anchor_set_id : anchor_override;
  const KeypointMask mask = map.keypoint_mask();

  std::vector<geometry::AnchorSet> candidates;
  if (anchor_id.empty() || anchor_id == "auto") {
    for (const auto& n : geometry::builtin_anchor_set_names()) candidates.push_back(geometry::builtin_anchor_set(n));
  } else {
    candidates.push_back(geometry::resolve_anchor_set(anchor_id, manifest.base_dir));
  }
  const auto& anchors = geometry::select_anchor_set(mask, candidates);

  std::vector<io::KeypointFrame> registered;
  registered.reserve(frames.size());
  for (const auto& f : frames) registered.push_back(geometry::register_frame(f, anchors));
  return features::build_features(registered, manifest);
}

features::FeatureMatrix preprocess_file(const std::filesystem::path& manifest_path, const std::string& anchor_override) {
  return preprocess(io::load_manifest(manifest_path), anchor_override);
}

SweepKTable sweep_k(const features::FeatureMatrix& train, const std::vector<features::FeatureMatrix>& tests,
                    Eigen::Index k_min, Eigen::Index k_max) {
  if (tests.empty()) fail(ErrorCode::InvalidArgument, "sweep-k needs at least one test set");
  SweepKTable table;
  table.train_id = train.dataset_id;
  table.k_limit = std::min(static_cast<Eigen::Index>(mask_count(train.row_mask)), train.cols());
  k_min = std::max<Eigen::Index>(k_min, 1);
  k_max = std::min(k_max, table.k_limit);
  if (k_min > k_max) fail(ErrorCode::OutOfRange, "sweep-k: empty k range after clamping to the rank bound");
  const pca::PcaModel full = pca::fit_pca(train, k_max);

  // Column j of `recon` accumulates u_i w_i^T for i < k, which equals the
  // projection onto the truncated basis.
  struct Running {
    Matrix basis, input, weights, recon;
    RowMask common;
    std::vector<double> ve;
  };
  std::vector<features::FeatureMatrix> sets;
  sets.push_back(train);
  sets.insert(sets.end(), tests.begin(), tests.end());
  std::vector<Running> run;
  for (const auto& y : sets) {
    Running r;
    r.common = mask_and(full.train_row_mask, y.row_mask);
    if (mask_count(r.common) == 0) fail(ErrorCode::MaskMismatch, "sweep-k: '" + y.dataset_id + "' shares no keypoints");
    r.basis = pca::masked_columns(full.basis, r.common);
    r.input = pca::masked_columns(y.data, r.common);
    r.weights = r.basis.transpose() * r.input;
    r.recon = Matrix::Zero(y.data.rows(), y.data.cols());
    run.push_back(std::move(r));
  }
  for (const auto& y : tests) table.test_ids.push_back(y.dataset_id);

  for (Eigen::Index k = 1; k <= k_max; ++k) {
    for (auto& r : run) r.recon.noalias() += r.basis.col(k - 1) * r.weights.row(k - 1);
    if (k < k_min) continue;
    SweepKRow row;
    row.k = k;
    row.train_ve = metrics::variance_explained(run[0].input, run[0].recon, run[0].common).value;
    double sum = 0.0;
    for (std::size_t t = 1; t < run.size(); ++t) {
      const double ve = metrics::variance_explained(run[t].input, run[t].recon, run[t].common).value;
      row.test_ve.push_back(ve);
      sum += ve;
    }
    row.mean_test_ve = sum / static_cast<double>(tests.size());
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10f", v);
  return buf;
}

}  // namespace

std::string sweep_k_csv(const SweepKTable& t) {
  std::string o = "k,train_ve,mean_test_ve";
  for (const auto& id : t.test_ids) o += ",test_ve:" + id;
  o += '\n';
  for (const auto& r : t.rows) {
    o += std::to_string(r.k) + "," + fmt(r.train_ve) + "," + fmt(r.mean_test_ve);
    for (double v : r.test_ve) o += "," + fmt(v);
    o += '\n';
  }
  return o;
}

std::string sweep_k_svg(const SweepKTable& t) {
  svg::Series train{"Train VE (" + t.train_id + ")", {}, {}};
  svg::Series test{"mean Test VE", {}, {}};
  for (const auto& r : t.rows) {
    train.x.push_back(static_cast<double>(r.k));
    train.y.push_back(r.train_ve);
    test.x.push_back(static_cast<double>(r.k));
    test.y.push_back(r.mean_test_ve);
  }
  return svg::line_chart({train, test}, {"PCA trained on " + t.train_id, "k (components)", "VE (%)", true});
}

std::vector<CompareCurve> compare(const features::FeatureMatrix& test, const std::vector<sparse::Dictionary>& dicts,
                                  const std::vector<Eigen::Index>& budgets, const sparse::LarsConfig& base) {
  if (dicts.empty()) fail(ErrorCode::InvalidArgument, "compare needs at least one dictionary");
  std::vector<CompareCurve> curves;
  for (const auto& d : dicts) {
    std::vector<Eigen::Index> b;
    if (budgets.empty()) {
      for (Eigen::Index i = 1; i <= d.size(); ++i) b.push_back(i);
    } else {
      for (auto v : budgets)
        if (v <= d.size()) b.push_back(v);
    }
    if (b.empty())
      fail(ErrorCode::OutOfRange, "compare: every budget exceeds the size of dictionary '" + d.id + "'");
    curves.push_back({d.id, d.kind, sparse::sweep_budget(test, d, b, base)});
  }
  return curves;
}

std::string compare_csv(const std::vector<CompareCurve>& curves) {
  std::string o = "dictionary,kind,budget,realized_mc,test_ve\n";
  for (const auto& c : curves)
    for (const auto& r : c.rows)
      o += c.dictionary_id + "," + c.kind + "," + std::to_string(r.budget) + "," + fmt(r.realized_mc) + "," +
           fmt(r.test_ve) + "\n";
  return o;
}

std::string compare_svg(const std::vector<CompareCurve>& curves, const std::string& test_id) {
  std::vector<svg::Series> series;
  for (const auto& c : curves) {
    svg::Series s{c.dictionary_id, {}, {}};
    for (const auto& r : c.rows) {
      s.x.push_back(r.realized_mc);
      s.y.push_back(r.test_ve);
    }
    series.push_back(std::move(s));
  }
  return svg::line_chart(series, {"Test VE on " + test_id, "mean components (MC)", "Test VE (%)", true});
}

std::string render_component(const pca::PcaModel& model, Eigen::Index index, const KeypointArray& neutral,
                             const KeypointMask& neutral_mask, double scale) {
  if (index < 1 || index > model.k())
    fail(ErrorCode::OutOfRange, "component index " + std::to_string(index) + " outside [1, " +
                                    std::to_string(model.k()) + "]");
  if (model.basis.rows() != static_cast<Eigen::Index>(kFeatureRows))
    fail(ErrorCode::InvalidArgument, "render needs a 136-row model");
  svg::ComponentView v;
  v.title = "component " + std::to_string(index);
  v.neutral = neutral;
  for (std::size_t k = 0; k < kTemplatePoints; ++k)
    v.mask[k] = neutral_mask[k] && model.train_row_mask[2 * k];
  v.displacement = model.basis.col(index - 1);
  v.scale = scale;
  return svg::component_plot(v);
}

std::string config_hash(const std::string& canonical_json) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical_json) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace aucoder::pipeline
