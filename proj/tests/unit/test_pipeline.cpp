#include "doctest.h"

#include <regex>

#include "error.hpp"
#include "geometry.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"
#include "synth.hpp"

using namespace aucoder;
namespace fs = std::filesystem;

namespace {

features::FeatureMatrix synthetic_features(const std::string& name, synth::SynthOptions opt) {
  const auto dir = oracle::scratch_dir(name);
  synth::write_dataset(synth::generate(opt), dir);
  return pipeline::preprocess_file(dir / "manifest.json");
}

std::vector<double> arrow_lengths(const std::string& svg) {
  const std::regex line(R"re(class="arrow"[^>]*x1="([-0-9.e]+)" y1="([-0-9.e]+)" x2="([-0-9.e]+)" y2="([-0-9.e]+)")re");
  std::vector<double> out;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), line); it != std::sregex_iterator(); ++it) {
    const double dx = std::stod((*it)[3]) - std::stod((*it)[1]);
    const double dy = std::stod((*it)[4]) - std::stod((*it)[2]);
    out.push_back(std::hypot(dx, dy));
  }
  return out;
}

pca::PcaModel single_component(const Vector& u) {
  pca::PcaModel m;
  m.basis = u;
  m.singular_values = Vector::Ones(1);
  m.train_row_mask = RowMask(kFeatureRows, true);
  return m;
}

}  // namespace

TEST_CASE("synthetic mini dataset preprocesses to 136 x 12") {
  const auto x = synthetic_features("pipe_mini", {});
  CHECK(x.data.rows() == 136);
  CHECK(x.cols() == 12);
  CHECK(mask_count(x.row_mask) == 136);
  CHECK_NOTHROW(x.validate());
}

TEST_CASE("preprocessing removes the nuisance transform") {
  synth::SynthOptions opt;
  opt.noise = 0.0;
  const auto with = synthetic_features("pipe_nuis_on", opt);
  opt.nuisance = false;
  const auto without = synthetic_features("pipe_nuis_off", opt);
  CHECK((with.data - without.data).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("49-point datasets preprocess with the bp4d anchors") {
  synth::SynthOptions opt;
  opt.template_map = "bp4d49";
  const auto x = synthetic_features("pipe_bp4d", opt);
  CHECK(mask_count(x.row_mask) == 98);
  for (int r = 0; r < 34; ++r) CHECK(x.data.row(r).isZero(0.0));
}

TEST_CASE("target 100 selects the rank of noiseless data") {
  synth::SynthOptions opt;
  opt.noise = 0.0;
  opt.n_bases = 3;
  opt.activation = 1.0;
  opt.frames_per_subject = 8;
  const auto x = synthetic_features("pipe_rank", opt);
  CHECK(pca::select_k(x, 100.0).k == 3);
  CHECK(pca::fit_pca(x, 8).k() == 8);
}

TEST_CASE("sweep-k with the training set as test set") {
  features::FeatureMatrix x;
  x.data = oracle::random_matrix(136, 30, 3);
  x.row_mask = RowMask(kFeatureRows, true);
  x.dataset_id = "train";
  for (int j = 0; j < 30; ++j) x.columns.push_back({"s", j});
  const auto t = pipeline::sweep_k(x, {x}, 1, 500);
  CHECK(t.k_limit == 30);
  REQUIRE(t.rows.size() == 30);
  double previous = -1.0;
  for (const auto& r : t.rows) {
    CHECK(std::abs(r.train_ve - r.mean_test_ve) <= 1e-10);
    CHECK(r.train_ve >= previous);
    previous = r.train_ve;
  }
  CHECK(t.rows.back().train_ve == doctest::Approx(100.0).epsilon(1e-10));
  const auto csv = pipeline::sweep_k_csv(t);
  CHECK(csv.rfind("k,train_ve,mean_test_ve,test_ve:train\n", 0) == 0);
  CHECK(pipeline::sweep_k_svg(t).find("<svg") == 0);
  CHECK_THROWS_AS(pipeline::sweep_k(x, {}, 1, 5), Error);
}

TEST_CASE("compare curves") {
  const auto train = synthetic_features("pipe_cmp_train", {});
  synth::SynthOptions topt;
  topt.seed = 2;
  topt.subjects = 2;
  const auto test = synthetic_features("pipe_cmp_test", topt);
  const auto model = pca::fit_pca(train, 6);
  auto pca_dict = sparse::Dictionary::from_model(model);

  SUBCASE("single budget at full size") {
    const auto curves = pipeline::compare(test, {pca_dict}, {6});
    REQUIRE(curves.size() == 1);
    REQUIRE(curves[0].rows.size() == 1);
    sparse::LarsConfig cfg;
    cfg.max_active = 6;
    CHECK(curves[0].rows[0].test_ve ==
          doctest::Approx(sparse::encode_matrix(test, pca_dict, cfg).ve.value).epsilon(1e-12));
  }
  SUBCASE("identical dictionaries") {
    auto twin = pca_dict;
    twin.id = "twin";
    const auto curves = pipeline::compare(test, {pca_dict, twin}, {});
    REQUIRE(curves.size() == 2);
    REQUIRE(curves[0].rows.size() == curves[1].rows.size());
    for (std::size_t i = 0; i < curves[0].rows.size(); ++i) {
      CHECK(curves[0].rows[i].test_ve == curves[1].rows[i].test_ve);
      CHECK(curves[0].rows[i].realized_mc == curves[1].rows[i].realized_mc);
    }
    CHECK(pipeline::compare_csv(curves).rfind("dictionary,kind,budget,realized_mc,test_ve\n", 0) == 0);
  }
  SUBCASE("PCA beats a random basis of the same size") {
    sparse::Dictionary random;
    random.id = "random";
    random.kind = "custom";
    random.atoms = Eigen::HouseholderQR<Matrix>(oracle::random_matrix(136, 6, 44)).householderQ() *
                   Matrix::Identity(136, 6);
    random.row_mask = RowMask(kFeatureRows, true);
    const auto pca_train = pipeline::compare(train, {pca_dict, random}, {});
    for (std::size_t i = 0; i < pca_train[0].rows.size(); ++i)
      CHECK(pca_train[0].rows[i].test_ve > pca_train[1].rows[i].test_ve);
  }
  SUBCASE("budgets beyond a dictionary are skipped") {
    auto small = pca_dict;
    small.atoms = small.atoms.leftCols(2);
    small.id = "small";
    const auto curves = pipeline::compare(test, {pca_dict, small}, {1, 2, 4});
    CHECK(curves[0].rows.size() == 3);
    CHECK(curves[1].rows.size() == 2);
    CHECK_THROWS_AS(pipeline::compare(test, {small}, {5}), Error);
  }
}

TEST_CASE("component rendering") {
  const auto& neutral = geometry::canonical_template();
  const auto mask = full_keypoint_mask();

  const auto zero = pipeline::render_component(single_component(Vector::Zero(136)), 1, neutral, mask, 10.0);
  const auto zl = arrow_lengths(zero);
  CHECK(zl.size() == 68);
  for (double l : zl) CHECK(l == 0.0);

  Vector shift = Vector::Zero(136);
  shift(2 * 48) = 1.0;
  const auto one = pipeline::render_component(single_component(shift), 1, neutral, mask, 10.0);
  const auto ol = arrow_lengths(one);
  int moving = 0;
  for (double l : ol) {
    if (l == 0.0) continue;
    ++moving;
    CHECK(l == doctest::Approx(10.0).epsilon(1e-9));
  }
  CHECK(moving == 1);
  CHECK(one.find("fill=\"red\"") != std::string::npos);
  CHECK(one.find("fill=\"green\"") != std::string::npos);

  CHECK(pipeline::render_component(single_component(shift), 1, neutral, mask, 10.0) == one);
  CHECK_THROWS_AS(pipeline::render_component(single_component(shift), 2, neutral, mask, 10.0), Error);
}

TEST_CASE("config hash is FNV-1a 64") {
  CHECK(pipeline::config_hash("") == "cbf29ce484222325");
  CHECK(pipeline::config_hash("a") == "af63dc4c8601ec8c");
  CHECK(pipeline::config_hash("foobar") == "85944171f73967e8");
}
