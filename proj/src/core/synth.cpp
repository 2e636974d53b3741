#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "error.hpp"
#include "geometry.hpp"
#include "json.hpp"

namespace aucoder::synth {

namespace fs = std::filesystem;

namespace {

std::vector<bool> free_keypoints() {
  std::vector<bool> free(kTemplatePoints, true);
  for (int a : anchor_keypoints()) free[static_cast<std::size_t>(a)] = false;
  return free;
}

struct Similarity {
  double scale = 1.0, angle = 0.0, tx = 0.0, ty = 0.0;
  Point2 apply(const Point2& p, const Point2& center) const {
    const double x = p.x - center.x, y = p.y - center.y;
    const double c = scale * std::cos(angle), s = scale * std::sin(angle);
    return {c * x - s * y + tx, s * x + c * y + ty};
  }
};

Similarity random_similarity(std::mt19937_64& rng, bool enabled) {
  std::uniform_real_distribution<double> angle(-10.0, 10.0), scale(0.85, 1.15), shift(-30.0, 30.0);
  const double a = angle(rng) * std::numbers::pi / 180.0;
  const double s = scale(rng);
  const double tx = shift(rng), ty = shift(rng);
  // Draws happen either way so the expression content does not depend on the flag.
  if (!enabled) return {1.0, 0.0, 100.0, 100.0};
  return {s, a, 320.0 + tx, 240.0 + ty};
}

std::string frame_name(int f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%03d.csv", f);
  return buf;
}

}  // namespace

const std::vector<int>& anchor_keypoints() {
  static const std::vector<int> anchors = {0, 16, 27, 33, 36, 39, 42, 45};
  return anchors;
}

Matrix true_basis(int n_bases, std::uint64_t basis_seed) {
  const auto free = free_keypoints();
  const auto free_rows = 2 * static_cast<int>(std::count(free.begin(), free.end(), true));
  if (n_bases < 1 || n_bases > free_rows) fail(ErrorCode::OutOfRange, "synth: basis count out of range");
  std::mt19937_64 rng(basis_seed);
  std::normal_distribution<double> gauss;
  Matrix g = Matrix::Zero(static_cast<Eigen::Index>(kFeatureRows), n_bases);
  for (std::size_t k = 0; k < kTemplatePoints; ++k) {
    if (!free[k]) continue;
    for (int j = 0; j < n_bases; ++j) {
      g(static_cast<Eigen::Index>(2 * k), j) = gauss(rng);
      g(static_cast<Eigen::Index>(2 * k + 1), j) = gauss(rng);
    }
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(g.rows(), n_bases);
  // Anchor rows of g are zero, so Q keeps them zero up to rounding.
  for (std::size_t k = 0; k < kTemplatePoints; ++k) {
    if (free[k]) continue;
    q.row(static_cast<Eigen::Index>(2 * k)).setZero();
    q.row(static_cast<Eigen::Index>(2 * k + 1)).setZero();
  }
  return q;
}

SynthDataset generate(const SynthOptions& opt) {
  if (opt.subjects < 1 || opt.frames_per_subject < 2)
    fail(ErrorCode::InvalidArgument, "synth: need at least one subject with two frames");
  if (opt.noise < 0.0 || opt.weight_scale <= 0.0 || opt.activation <= 0.0 || opt.activation > 1.0)
    fail(ErrorCode::InvalidArgument, "synth: invalid noise, weight scale or activation");
  const io::TemplateMap map = io::resolve_template_map(opt.template_map);
  const KeypointMask mask = map.keypoint_mask();
  const auto free = free_keypoints();
  const auto& tmpl = geometry::canonical_template();
  const Point2 center{100.0, 100.0};

  SynthDataset out;
  out.true_basis = true_basis(opt.n_bases, opt.basis_seed);
  out.noise_sigma = opt.noise * opt.weight_scale;
  std::vector<double> scales;
  for (int i = 0; i < opt.n_bases; ++i) scales.push_back(opt.weight_scale * std::pow(opt.decay, i));

  RowMask rows = row_mask_from_keypoints(mask);
  for (int i = 0; i < opt.n_bases; ++i) {
    double norm_sq = 0.0;
    for (std::size_t r = 0; r < kFeatureRows; ++r)
      if (rows[r]) norm_sq += out.true_basis(static_cast<Eigen::Index>(r), i) * out.true_basis(static_cast<Eigen::Index>(r), i);
    out.expected_signal_energy += opt.activation * scales[static_cast<std::size_t>(i)] *
                                  scales[static_cast<std::size_t>(i)] * norm_sq;
  }
  for (std::size_t k = 0; k < kTemplatePoints; ++k)
    if (free[k] && mask[k]) out.noise_dims += 2;
  const double s2 = out.noise_sigma * out.noise_sigma;
  const double residual = static_cast<double>(out.noise_dims - std::min<std::size_t>(out.noise_dims, opt.n_bases)) * s2;
  out.analytic_train_ve = 100.0 * (1.0 - residual / (out.expected_signal_energy + static_cast<double>(out.noise_dims) * s2));

  out.manifest.dataset_id = opt.dataset_id;
  out.manifest.template_map_id = map.dataset_id;
  out.manifest.anchor_set_id = "auto";

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  std::bernoulli_distribution active(opt.activation);
  for (int s = 0; s < opt.subjects; ++s) {
    char sid[32];
    std::snprintf(sid, sizeof sid, "s%03d", s);
    io::SubjectEntry entry{sid, 0, {}};
    std::vector<std::vector<Point2>> subject_frames;
    for (int f = 0; f < opt.frames_per_subject; ++f) {
      Vector disp = Vector::Zero(static_cast<Eigen::Index>(kFeatureRows));
      if (f != 0) {
        for (int i = 0; i < opt.n_bases; ++i) {
          const double w = gauss(rng) * scales[static_cast<std::size_t>(i)];
          if (active(rng)) disp += w * out.true_basis.col(i);
        }
        for (std::size_t k = 0; k < kTemplatePoints; ++k) {
          if (!free[k]) continue;
          disp(static_cast<Eigen::Index>(2 * k)) += out.noise_sigma * gauss(rng);
          disp(static_cast<Eigen::Index>(2 * k + 1)) += out.noise_sigma * gauss(rng);
        }
      }
      const Similarity sim = random_similarity(rng, opt.nuisance);
      std::vector<Point2> native(map.native_count());
      for (const auto& [src, t] : map.index_map) {
        const auto k = static_cast<std::size_t>(t);
        const Point2 p{tmpl[k].x + disp(static_cast<Eigen::Index>(2 * k)),
                       tmpl[k].y + disp(static_cast<Eigen::Index>(2 * k + 1))};
        native[static_cast<std::size_t>(src)] = sim.apply(p, center);
      }
      subject_frames.push_back(std::move(native));
      entry.frames.emplace_back(fs::path(sid) / frame_name(f));
    }
    out.manifest.subjects.push_back(std::move(entry));
    out.frames.push_back(std::move(subject_frames));
  }
  return out;
}

void write_dataset(const SynthDataset& data, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t s = 0; s < data.frames.size(); ++s) {
    for (std::size_t f = 0; f < data.frames[s].size(); ++f) {
      io::write_keypoint_csv(data.frames[s][f], dir / data.manifest.subjects[s].frames[f]);
    }
  }
  io::save_manifest(data.manifest, dir / "manifest.json");
  io::write_matrix_csv(data.true_basis, dir / "truth_U.csv");
  nlohmann::json truth;
  truth["n_bases"] = data.true_basis.cols();
  truth["basis"] = "truth_U.csv";
  truth["noise_sigma"] = data.noise_sigma;
  truth["noise_dims"] = data.noise_dims;
  truth["expected_signal_energy"] = data.expected_signal_energy;
  truth["analytic_train_ve"] = data.analytic_train_ve;
  io::write_text_file(dir / "truth.json", truth.dump(2) + "\n");
}

void write_au_set(const AuSetOptions& opt, const fs::path& dir) {
  if (opt.count < 1) fail(ErrorCode::InvalidArgument, "synth: AU count must be positive");
  fs::create_directories(dir);
  const auto& tmpl = geometry::canonical_template();
  const auto free = free_keypoints();
  std::vector<int> movable;
  for (std::size_t k = 0; k < kTemplatePoints; ++k)
    if (free[k]) movable.push_back(static_cast<int>(k));

  std::vector<Point2> neutral(tmpl.begin(), tmpl.end());
  io::write_keypoint_csv(neutral, dir / "neutral.csv");

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  std::uniform_int_distribution<std::size_t> pick(0, movable.size() - 1);
  std::uniform_int_distribution<int> group_size(3, 8);
  nlohmann::json set;
  set["format"] = "aucoder.auset/1";
  set["kind"] = opt.kind;
  set["neutral"] = "neutral.csv";
  set["anchor_set"] = "disfa_ck";
  set["aus"] = nlohmann::json::array();
  for (int a = 0; a < opt.count; ++a) {
    // Each AU drags a small cluster of keypoints near a seed point.
    std::vector<Point2> apex = neutral;
    const auto centre = static_cast<std::size_t>(movable[pick(rng)]);
    const double dx = opt.magnitude * gauss(rng), dy = opt.magnitude * gauss(rng);
    std::vector<std::pair<double, int>> near;
    for (int k : movable) {
      const auto& p = tmpl[static_cast<std::size_t>(k)];
      near.emplace_back(std::hypot(p.x - tmpl[centre].x, p.y - tmpl[centre].y), k);
    }
    std::sort(near.begin(), near.end());
    const int n = group_size(rng);
    for (int i = 0; i < n && i < static_cast<int>(near.size()); ++i) {
      const double falloff = 1.0 / (1.0 + 0.5 * i);
      auto& p = apex[static_cast<std::size_t>(near[static_cast<std::size_t>(i)].second)];
      p.x += falloff * dx;
      p.y += falloff * dy;
    }
    char name[32];
    std::snprintf(name, sizeof name, "au_%03d.csv", a + 1);
    io::write_keypoint_csv(apex, dir / name);
    set["aus"].push_back({{"label", "AU" + std::to_string(a + 1)}, {"file", name}});
  }
  io::write_text_file(dir / "auset.json", set.dump(2) + "\n");
}

}  // namespace aucoder::synth
