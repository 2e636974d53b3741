#pragma once

#include <filesystem>

#include "features.hpp"
#include "json.hpp"
#include "pca.hpp"
#include "sparse.hpp"

// Artifacts are a JSON sidecar plus one or more matrix CSV files named
// relative to it. Loaders accept either the sidecar or its .csv sibling.
namespace aucoder::store {

using Json = nlohmann::json;
namespace fs = std::filesystem;

Json mask_to_json(const RowMask& mask);
RowMask mask_from_json(const Json& j, std::size_t expected);

void save_features(const features::FeatureMatrix& x, const fs::path& path, const Json& run = {});
features::FeatureMatrix load_features(const fs::path& path);

void save_model(const pca::PcaModel& model, const fs::path& path, const Json& extra = {});
pca::PcaModel load_model(const fs::path& path);

void save_dictionary(const sparse::Dictionary& dict, const fs::path& path, const Json& run = {});
// Accepts a saved dictionary, a saved PCA model, or an AU set description
// (neutral file, anchor set and apex files), which is built on load.
sparse::Dictionary load_dictionary(const fs::path& path);

void save_code(const sparse::EncodeResult& result, const fs::path& path, const Json& run = {});

// Sidecar path for an artifact given either of its file names.
fs::path sidecar_path(const fs::path& path);
fs::path csv_sibling(const fs::path& sidecar, const std::string& suffix = "");

}  // namespace aucoder::store
