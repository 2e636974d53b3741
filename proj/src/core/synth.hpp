#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "io.hpp"
#include "types.hpp"

namespace aucoder::synth {

// Generator for keypoint datasets with a known displacement subspace.
// Expression frames are template + B w + noise followed by a random global
// similarity (head placement); neutral frames are the template under their
// own similarity. Anchor keypoints never move and carry no noise, so
// registration undoes the similarity exactly.
struct SynthOptions {
  std::string dataset_id = "synth";
  std::string template_map = "ibug68";
  int subjects = 3;
  int frames_per_subject = 5;  // including the neutral frame
  int n_bases = 8;
  double weight_scale = 4.0;   // std of the leading basis weight
  double decay = 0.8;          // per-basis std ratio
  double activation = 0.5;     // probability a basis is active in a frame
  double noise = 0.01;         // noise std relative to weight_scale
  bool nuisance = true;
  std::uint64_t basis_seed = 7;
  std::uint64_t seed = 1;
};

struct SynthDataset {
  io::DatasetManifest manifest;
  // Native-order points per subject and frame.
  std::vector<std::vector<std::vector<Point2>>> frames;
  Matrix true_basis;  // 136 x n_bases, orthonormal
  double noise_sigma = 0.0;
  double expected_signal_energy = 0.0;  // E|B w|^2 per column over the mask
  std::size_t noise_dims = 0;
  double analytic_train_ve = 0.0;  // noise-limited optimum for n_bases components
};

// Keypoints that anchor the built-in affine and similarity steps.
const std::vector<int>& anchor_keypoints();

Matrix true_basis(int n_bases, std::uint64_t basis_seed);
SynthDataset generate(const SynthOptions& options);
// Writes <dir>/manifest.json, per-frame CSVs, truth_U.csv and truth.json.
void write_dataset(const SynthDataset& data, const std::filesystem::path& dir);

struct AuSetOptions {
  int count = 26;
  std::string kind = "pure";
  double magnitude = 3.0;
  std::uint64_t seed = 11;
};

// Apex/neutral keypoint files in standard space plus an auset.json.
void write_au_set(const AuSetOptions& options, const std::filesystem::path& dir);

}  // namespace aucoder::synth
