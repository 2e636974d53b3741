#include "store.hpp"

#include "error.hpp"
#include "geometry.hpp"
#include "io.hpp"

namespace aucoder::store {

namespace {

Json read_json(const fs::path& path) {
  try {
    return Json::parse(io::read_text_file(path));
  } catch (const Json::exception& e) {
    fail(ErrorCode::Parse, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const Json& j) { io::write_text_file(path, j.dump(2) + "\n"); }

void expect_format(const Json& j, const std::string& format, const fs::path& path) {
  if (j.value("format", std::string()) != format)
    fail(ErrorCode::Parse, path.string() + ": expected format '" + format + "'");
}

fs::path relative_to(const fs::path& sidecar, const std::string& name) { return sidecar.parent_path() / name; }

}  // namespace

fs::path sidecar_path(const fs::path& path) {
  fs::path p = path;
  if (p.extension() == ".csv") p.replace_extension(".json");
  return p;
}

fs::path csv_sibling(const fs::path& sidecar, const std::string& suffix) {
  fs::path p = sidecar;
  p.replace_extension();
  return fs::path(p.string() + suffix + ".csv");
}

Json mask_to_json(const RowMask& mask) {
  Json arr = Json::array();
  for (bool b : mask) arr.push_back(b ? 1 : 0);
  return arr;
}

RowMask mask_from_json(const Json& j, std::size_t expected) {
  if (!j.is_array() || j.size() != expected)
    fail(ErrorCode::Parse, "row mask must list " + std::to_string(expected) + " entries");
  RowMask m;
  for (const auto& v : j) m.push_back(v.is_boolean() ? v.get<bool>() : v.get<int>() != 0);
  return m;
}

void save_features(const features::FeatureMatrix& x, const fs::path& path, const Json& run) {
  x.validate();
  const fs::path side = sidecar_path(path);
  const fs::path csv = csv_sibling(side);
  io::write_matrix_csv(x.data, csv);
  Json j;
  j["format"] = "aucoder.features/1";
  j["dataset_id"] = x.dataset_id;
  j["matrix"] = csv.filename().string();
  j["rows"] = x.data.rows();
  j["cols"] = x.data.cols();
  j["layout"] = "interleaved-xy";
  j["neutral_excluded"] = x.neutral_excluded;
  j["subsample_seed"] = x.subsample_seed ? Json(*x.subsample_seed) : Json(nullptr);
  j["row_mask"] = mask_to_json(x.row_mask);
  Json cols = Json::array();
  for (const auto& c : x.columns) cols.push_back({c.subject_id, c.frame_index});
  j["columns"] = cols;
  if (!run.is_null()) j["run"] = run;
  write_json(side, j);
}

features::FeatureMatrix load_features(const fs::path& path) {
  const fs::path side = sidecar_path(path);
  const Json j = read_json(side);
  expect_format(j, "aucoder.features/1", side);
  features::FeatureMatrix x;
  try {
    x.dataset_id = j.at("dataset_id").get<std::string>();
    x.data = io::read_matrix_csv(relative_to(side, j.at("matrix").get<std::string>()));
    x.row_mask = mask_from_json(j.at("row_mask"), kFeatureRows);
    x.neutral_excluded = j.value("neutral_excluded", true);
    if (j.contains("subsample_seed") && !j["subsample_seed"].is_null())
      x.subsample_seed = j["subsample_seed"].get<std::uint64_t>();
    for (const auto& c : j.at("columns")) x.columns.push_back({c.at(0).get<std::string>(), c.at(1).get<int>()});
  } catch (const Json::exception& e) {
    fail(ErrorCode::Parse, side.string() + ": malformed feature sidecar: " + e.what());
  }
  if (x.data.cols() == 0 && x.columns.empty()) x.data.resize(static_cast<Eigen::Index>(kFeatureRows), 0);
  x.validate();
  return x;
}

void save_model(const pca::PcaModel& model, const fs::path& path, const Json& extra) {
  const fs::path side = sidecar_path(path);
  const fs::path u_csv = csv_sibling(side, "_U");
  const fs::path s_csv = csv_sibling(side, "_sigma");
  io::write_matrix_csv(model.basis, u_csv);
  io::write_matrix_csv(Matrix(model.singular_values), s_csv);
  Json j;
  j["format"] = "aucoder.pca/1";
  j["basis"] = u_csv.filename().string();
  j["singular_values"] = s_csv.filename().string();
  j["k"] = model.k();
  j["p"] = model.basis.rows();
  j["train_dataset_id"] = model.train_dataset_id;
  j["train_energy"] = model.train_energy;
  j["centered"] = false;
  j["sign_convention"] = pca::kSignConvention;
  j["train_row_mask"] = mask_to_json(model.train_row_mask);
  for (auto it = extra.begin(); extra.is_object() && it != extra.end(); ++it) j[it.key()] = it.value();
  write_json(side, j);
}

pca::PcaModel load_model(const fs::path& path) {
  const fs::path side = sidecar_path(path);
  const Json j = read_json(side);
  expect_format(j, "aucoder.pca/1", side);
  pca::PcaModel m;
  try {
    m.basis = io::read_matrix_csv(relative_to(side, j.at("basis").get<std::string>()));
    const Matrix s = io::read_matrix_csv(relative_to(side, j.at("singular_values").get<std::string>()));
    if (s.cols() != 1 || s.rows() != m.basis.cols())
      fail(ErrorCode::Parse, side.string() + ": singular value count does not match basis columns");
    m.singular_values = s.col(0);
    m.train_dataset_id = j.value("train_dataset_id", std::string());
    m.train_energy = j.value("train_energy", 0.0);
    m.train_row_mask = mask_from_json(j.at("train_row_mask"), static_cast<std::size_t>(m.basis.rows()));
  } catch (const Json::exception& e) {
    fail(ErrorCode::Parse, side.string() + ": malformed model sidecar: " + e.what());
  }
  return m;
}

void save_dictionary(const sparse::Dictionary& dict, const fs::path& path, const Json& run) {
  const fs::path side = sidecar_path(path);
  const fs::path csv = csv_sibling(side);
  io::write_matrix_csv(dict.atoms, csv);
  Json j;
  j["format"] = "aucoder.dictionary/1";
  j["id"] = dict.id;
  j["kind"] = dict.kind;
  j["atoms"] = csv.filename().string();
  j["labels"] = dict.labels;
  j["row_mask"] = mask_to_json(dict.row_mask);
  if (!run.is_null()) j["run"] = run;
  write_json(side, j);
}

sparse::Dictionary load_dictionary(const fs::path& path) {
  const fs::path side = sidecar_path(path);
  const Json j = read_json(side);
  const std::string format = j.value("format", std::string());
  if (format == "aucoder.pca/1") {
    auto d = sparse::Dictionary::from_model(load_model(side), side.stem().string());
    return d;
  }
  if (format == "aucoder.dictionary/1") {
    sparse::Dictionary d;
    try {
      d.id = j.value("id", side.stem().string());
      d.kind = j.value("kind", std::string("custom"));
      d.atoms = io::read_matrix_csv(relative_to(side, j.at("atoms").get<std::string>()));
      d.labels = j.value("labels", std::vector<std::string>{});
      d.row_mask = mask_from_json(j.at("row_mask"), static_cast<std::size_t>(d.atoms.rows()));
    } catch (const Json::exception& e) {
      fail(ErrorCode::Parse, side.string() + ": malformed dictionary sidecar: " + e.what());
    }
    return d;
  }
  if (format == "aucoder.auset/1") {
    std::vector<fs::path> files;
    std::vector<std::string> labels;
    fs::path neutral;
    std::string anchors = "disfa_ck";
    features::AuKind kind = features::AuKind::Custom;
    try {
      neutral = relative_to(side, j.at("neutral").get<std::string>());
      anchors = j.value("anchor_set", anchors);
      kind = features::au_kind_from_string(j.value("kind", std::string("custom")));
      for (const auto& a : j.at("aus")) {
        files.push_back(relative_to(side, a.at("file").get<std::string>()));
        labels.push_back(a.value("label", files.back().stem().string()));
      }
    } catch (const Json::exception& e) {
      fail(ErrorCode::Parse, side.string() + ": malformed AU set: " + e.what());
    }
    const auto frames = io::load_au_frames(files, neutral, labels);
    const auto anchor_set = geometry::resolve_anchor_set(anchors, side.parent_path());
    const auto au = features::build_au_dictionary(frames.apex, frames.neutral, anchor_set, kind, frames.labels);
    return sparse::Dictionary::from_au(au, j.value("id", side.stem().string()));
  }
  fail(ErrorCode::Parse, side.string() + ": not a model, dictionary or AU set (format '" + format + "')");
}

void save_code(const sparse::EncodeResult& result, const fs::path& path, const Json& run) {
  const fs::path side = sidecar_path(path);
  const fs::path csv = csv_sibling(side);
  io::write_matrix_csv(result.code.weights, csv);
  Json j;
  j["format"] = "aucoder.code/1";
  j["weights"] = csv.filename().string();
  j["dictionary_id"] = result.code.dictionary_id;
  j["budget"] = result.code.max_active;
  j["ridge"] = result.code.ridge;
  j["normalized_columns"] = result.code.normalized;
  j["realized_mc"] = result.realized_mc;
  j["test_ve"] = result.ve.value;
  j["active_counts"] = result.code.active_counts;
  if (!run.is_null()) j["run"] = run;
  write_json(side, j);
}

}  // namespace aucoder::store
