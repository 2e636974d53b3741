#include "doctest.h"

#include "error.hpp"
#include "io.hpp"
#include "oracles.hpp"
#include "store.hpp"
#include "synth.hpp"

using namespace aucoder;
namespace fs = std::filesystem;

namespace {

features::FeatureMatrix sample_features() {
  features::FeatureMatrix x;
  x.data = oracle::random_matrix(136, 7, 5);
  x.row_mask = RowMask(kFeatureRows, true);
  for (int r = 0; r < 34; ++r) {
    x.row_mask[r] = false;
    x.data.row(r).setZero();
  }
  x.dataset_id = "demo";
  for (int j = 0; j < 7; ++j) x.columns.push_back({j < 4 ? "a" : "b", j + 1});
  x.subsample_seed = 99;
  return x;
}

}  // namespace

TEST_CASE("features round trip") {
  const auto dir = oracle::scratch_dir("store_features");
  const auto x = sample_features();
  store::save_features(x, dir / "x.json", {{"seed", 99}});
  for (const auto& path : {dir / "x.json", dir / "x.csv"}) {
    const auto y = store::load_features(path);
    CHECK(y.data == x.data);
    CHECK(y.row_mask == x.row_mask);
    CHECK(y.columns == x.columns);
    CHECK(y.dataset_id == "demo");
    CHECK(y.subsample_seed == 99u);
  }
  const auto side = store::Json::parse(io::read_text_file(dir / "x.json"));
  CHECK(side["run"]["seed"] == 99);
}

TEST_CASE("model round trip keeps metadata") {
  const auto dir = oracle::scratch_dir("store_model");
  const auto model = pca::fit_pca(sample_features(), 5);
  store::save_model(model, dir / "m.json");
  const auto back = store::load_model(dir / "m.json");
  CHECK(back.basis == model.basis);
  CHECK(back.singular_values == model.singular_values);
  CHECK(back.train_row_mask == model.train_row_mask);
  CHECK(back.train_dataset_id == "demo");
  const auto side = store::Json::parse(io::read_text_file(dir / "m.json"));
  CHECK(side["k"] == 5);
  CHECK(side["centered"] == false);
  CHECK(side["sign_convention"] == pca::kSignConvention);
}

TEST_CASE("dictionaries load from models, saved dictionaries and AU sets") {
  const auto dir = oracle::scratch_dir("store_dict");
  const auto model = pca::fit_pca(sample_features(), 4);
  store::save_model(model, dir / "m.json");
  const auto from_model = store::load_dictionary(dir / "m.json");
  CHECK(from_model.kind == "pca");
  CHECK(from_model.atoms == model.basis);

  auto d = from_model;
  d.id = "copy";
  store::save_dictionary(d, dir / "d.json");
  const auto again = store::load_dictionary(dir / "d.csv");
  CHECK(again.id == "copy");
  CHECK(again.atoms == d.atoms);
  CHECK(again.row_mask == d.row_mask);
  CHECK(again.labels == d.labels);

  synth::AuSetOptions opts;
  opts.count = 26;
  synth::write_au_set(opts, dir / "au");
  const auto au = store::load_dictionary(dir / "au" / "auset.json");
  CHECK(au.size() == 26);
  CHECK(au.kind == "pure");
  CHECK(mask_count(au.row_mask) == kFeatureRows);

  CHECK_THROWS_AS(store::load_dictionary(dir / "missing.json"), Error);
}

TEST_CASE("sidecar naming") {
  CHECK(store::sidecar_path("out/x.csv") == fs::path("out/x.json"));
  CHECK(store::sidecar_path("out/x.json") == fs::path("out/x.json"));
  CHECK(store::csv_sibling("out/m.json", "_U") == fs::path("out/m_U.csv"));
}
