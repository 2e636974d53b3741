#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "aucoder/aucoder.h"

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir() {
  auto dir = fs::temp_directory_path() / "aucoder_test_capi";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("status names and config hash") {
  CHECK(std::string(aucoder_status_name(AUCODER_OK)) == "ok");
  CHECK(std::string(aucoder_status_name(AUCODER_ERR_MASK)) == "keypoint mask mismatch");
  CHECK(std::string(aucoder_version()) == "0.1.0");
  char hash[17];
  REQUIRE(aucoder_config_hash("a", hash) == AUCODER_OK);
  CHECK(std::string(hash) == "af63dc4c8601ec8c");
  CHECK(aucoder_config_hash(nullptr, hash) == AUCODER_ERR_INVALID_ARGUMENT);
}

TEST_CASE("null handles and bad paths report errors") {
  aucoder_features* f = nullptr;
  CHECK(aucoder_features_preprocess(nullptr, nullptr, &f) == AUCODER_ERR_INVALID_ARGUMENT);
  CHECK(std::string(aucoder_last_error()).find("null") != std::string::npos);
  CHECK(aucoder_features_preprocess("/nonexistent/manifest.json", nullptr, &f) == AUCODER_ERR_IO);
  CHECK(std::string(aucoder_last_error()).find("/nonexistent/manifest.json") != std::string::npos);
  CHECK(f == nullptr);
  size_t rows = 0, cols = 0;
  CHECK(aucoder_features_shape(nullptr, &rows, &cols) == AUCODER_ERR_INVALID_ARGUMENT);
  aucoder_model* m = nullptr;
  CHECK(aucoder_model_fit(nullptr, 3, &m) == AUCODER_ERR_INVALID_ARGUMENT);
  aucoder_features_free(nullptr);
  aucoder_model_free(nullptr);
  aucoder_dictionary_free(nullptr);
}

TEST_CASE("end to end through the C API") {
  const auto dir = fresh_dir();
  aucoder_synth_options so;
  aucoder_synth_options_init(&so);
  so.au_count = 26;
  REQUIRE(aucoder_synth(&so, (dir / "data").c_str()) == AUCODER_OK);

  aucoder_features* x = nullptr;
  REQUIRE(aucoder_features_preprocess((dir / "data" / "manifest.json").c_str(), nullptr, &x) == AUCODER_OK);
  size_t rows = 0, cols = 0, mrows = 0;
  REQUIRE(aucoder_features_shape(x, &rows, &cols) == AUCODER_OK);
  CHECK(rows == 136);
  CHECK(cols == 12);
  REQUIRE(aucoder_features_mask_rows(x, &mrows) == AUCODER_OK);
  CHECK(mrows == 136);
  std::vector<double> data(rows * cols);
  CHECK(aucoder_features_copy_data(x, data.data(), data.size()) == AUCODER_OK);
  CHECK(aucoder_features_copy_data(x, data.data(), data.size() - 1) == AUCODER_ERR_INVALID_ARGUMENT);

  REQUIRE(aucoder_features_save(x, (dir / "x.json").c_str(), R"({"seed": 1})") == AUCODER_OK);
  CHECK(aucoder_features_save(x, (dir / "bad.json").c_str(), "{not json") == AUCODER_ERR_PARSE);
  aucoder_features* x2 = nullptr;
  REQUIRE(aucoder_features_load((dir / "x.csv").c_str(), &x2) == AUCODER_OK);
  std::vector<double> data2(rows * cols);
  REQUIRE(aucoder_features_copy_data(x2, data2.data(), data2.size()) == AUCODER_OK);
  CHECK(data == data2);

  aucoder_features* sub = nullptr;
  REQUIRE(aucoder_features_subsample(x, 5, 42, &sub) == AUCODER_OK);
  REQUIRE(aucoder_features_shape(sub, &rows, &cols) == AUCODER_OK);
  CHECK(cols == 5);
  aucoder_features* too_many = nullptr;
  CHECK(aucoder_features_subsample(x, 13, 42, &too_many) == AUCODER_ERR_OUT_OF_RANGE);

  aucoder_model* model = nullptr;
  REQUIRE(aucoder_model_fit(x, 4, &model) == AUCODER_OK);
  size_t k = 0;
  REQUIRE(aucoder_model_k(model, &k) == AUCODER_OK);
  CHECK(k == 4);
  double ve = 0;
  REQUIRE(aucoder_model_ve(model, x, &ve) == AUCODER_OK);
  CHECK(ve > 50.0);
  CHECK(ve <= 100.0);
  aucoder_model* bad = nullptr;
  CHECK(aucoder_model_fit(x, 13, &bad) == AUCODER_ERR_OUT_OF_RANGE);

  aucoder_model* target = nullptr;
  double best = 0;
  CHECK(aucoder_model_fit_target(x, 100.5, &target, &best) == AUCODER_ERR_OUT_OF_RANGE);
  REQUIRE(aucoder_model_fit_target(x, 90.0, &target, &best) == AUCODER_OK);
  REQUIRE(aucoder_model_k(target, &k) == AUCODER_OK);
  CHECK(k >= 1);

  REQUIRE(aucoder_model_save(model, (dir / "model.json").c_str(), nullptr) == AUCODER_OK);
  aucoder_model* loaded = nullptr;
  REQUIRE(aucoder_model_load((dir / "model.json").c_str(), &loaded) == AUCODER_OK);
  std::vector<double> u1(136 * 4), u2(136 * 4);
  REQUIRE(aucoder_model_copy_basis(model, u1.data(), u1.size()) == AUCODER_OK);
  REQUIRE(aucoder_model_copy_basis(loaded, u2.data(), u2.size()) == AUCODER_OK);
  CHECK(u1 == u2);

  aucoder_dictionary* pca = nullptr;
  REQUIRE(aucoder_dictionary_from_model(model, "pca", &pca) == AUCODER_OK);
  aucoder_dictionary* au = nullptr;
  REQUIRE(aucoder_dictionary_load((dir / "data" / "au" / "auset.json").c_str(), &au) == AUCODER_OK);
  size_t size = 0;
  REQUIRE(aucoder_dictionary_size(au, &size) == AUCODER_OK);
  CHECK(size == 26);
  REQUIRE(aucoder_dictionary_set_id(au, "pure") == AUCODER_OK);
  REQUIRE(aucoder_dictionary_save(pca, (dir / "dict.json").c_str(), nullptr) == AUCODER_OK);

  aucoder_lars_options lo;
  aucoder_lars_options_init(&lo);
  CHECK(lo.max_active == 1);
  lo.max_active = 3;
  double mc = 0, tve = 0;
  REQUIRE(aucoder_encode(x, pca, &lo, (dir / "code.json").c_str(), nullptr, &mc, &tve) == AUCODER_OK);
  CHECK(mc <= 3.0);
  CHECK(fs::exists(dir / "code.json"));
  lo.max_active = 0;
  CHECK(aucoder_encode(x, pca, &lo, nullptr, nullptr, &mc, &tve) == AUCODER_ERR_INVALID_ARGUMENT);
  lo.max_active = 3;

  const aucoder_features* tests[] = {x2};
  REQUIRE(aucoder_sweep_k(x, tests, 1, 1, 12, (dir / "sweep.csv").c_str(), (dir / "sweep.svg").c_str(),
                          R"({"seed": 1})") == AUCODER_OK);
  CHECK(slurp(dir / "sweep.csv").rfind("k,train_ve,mean_test_ve", 0) == 0);
  CHECK(fs::exists(dir / "sweep.json"));
  CHECK(aucoder_sweep_k(x, tests, 0, 1, 12, (dir / "s2.csv").c_str(), nullptr, nullptr) ==
        AUCODER_ERR_INVALID_ARGUMENT);

  const aucoder_dictionary* dicts[] = {pca, au};
  const size_t budgets[] = {1, 2, 4};
  REQUIRE(aucoder_compare(x, dicts, 2, budgets, 3, &lo, (dir / "cmp.csv").c_str(), (dir / "cmp.svg").c_str(),
                          nullptr) == AUCODER_OK);
  CHECK(slurp(dir / "cmp.csv").rfind("dictionary,kind,budget,realized_mc,test_ve\n", 0) == 0);

  const size_t idx[] = {1, 2};
  REQUIRE(aucoder_render_components(model, nullptr, idx, 2, 10.0, (dir / "render").c_str()) == AUCODER_OK);
  CHECK(fs::exists(dir / "render" / "component_2.svg"));
  const size_t out_of_range[] = {5};
  CHECK(aucoder_render_components(model, nullptr, out_of_range, 1, 10.0, (dir / "render").c_str()) ==
        AUCODER_ERR_OUT_OF_RANGE);

  aucoder_dictionary_free(pca);
  aucoder_dictionary_free(au);
  aucoder_model_free(model);
  aucoder_model_free(loaded);
  aucoder_model_free(target);
  aucoder_features_free(sub);
  aucoder_features_free(x2);
  aucoder_features_free(x);
}
