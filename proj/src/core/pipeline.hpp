#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "features.hpp"
#include "io.hpp"
#include "pca.hpp"
#include "sparse.hpp"

namespace aucoder::pipeline {

// load -> register -> displacement features. An anchor override replaces the
// manifest's anchor_set; "auto" picks the first built-in set whose affine
// anchors the dataset carries.
features::FeatureMatrix preprocess(const io::DatasetManifest& manifest, const std::string& anchor_override = {});
features::FeatureMatrix preprocess_file(const std::filesystem::path& manifest_path,
                                        const std::string& anchor_override = {});

struct SweepKRow {
  Eigen::Index k = 0;
  double train_ve = 0.0;
  double mean_test_ve = 0.0;
  std::vector<double> test_ve;
};

struct SweepKTable {
  std::string train_id;
  std::vector<std::string> test_ids;
  Eigen::Index k_limit = 0;
  std::vector<SweepKRow> rows;
};

// Train VE and mean Test VE for every k in [k_min, k_max]. k_max is clamped
// to the training rank bound.
SweepKTable sweep_k(const features::FeatureMatrix& train, const std::vector<features::FeatureMatrix>& tests,
                    Eigen::Index k_min, Eigen::Index k_max);
std::string sweep_k_csv(const SweepKTable& table);
std::string sweep_k_svg(const SweepKTable& table);

struct CompareCurve {
  std::string dictionary_id;
  std::string kind;
  std::vector<sparse::SweepRow> rows;
};

// Budgets above a dictionary's size are skipped for that dictionary; an empty
// budget list means 1..size for each dictionary.
std::vector<CompareCurve> compare(const features::FeatureMatrix& test, const std::vector<sparse::Dictionary>& dicts,
                                  const std::vector<Eigen::Index>& budgets, const sparse::LarsConfig& base = {});
std::string compare_csv(const std::vector<CompareCurve>& curves);
std::string compare_svg(const std::vector<CompareCurve>& curves, const std::string& test_id);

// 1-based component index.
std::string render_component(const pca::PcaModel& model, Eigen::Index index, const KeypointArray& neutral,
                             const KeypointMask& neutral_mask, double scale);

// FNV-1a 64 over the compact JSON text, as 16 hex digits.
std::string config_hash(const std::string& canonical_json);

}  // namespace aucoder::pipeline
