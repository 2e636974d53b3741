#include "doctest.h"

#include <cstring>

#include "error.hpp"
#include "metrics.hpp"
#include "oracles.hpp"
#include "pca.hpp"

using namespace aucoder;

namespace {

features::FeatureMatrix as_features(const Matrix& data, RowMask mask = RowMask(kFeatureRows, true)) {
  features::FeatureMatrix x;
  x.data = data;
  x.row_mask = std::move(mask);
  x.dataset_id = "unit";
  for (Eigen::Index j = 0; j < data.cols(); ++j) x.columns.push_back({"s", static_cast<int>(j)});
  return x;
}

Matrix low_rank(Eigen::Index p, Eigen::Index m, Eigen::Index r, std::uint64_t seed) {
  return oracle::random_matrix(p, r, seed) * oracle::random_matrix(r, m, seed + 1);
}

RowMask jawless_mask() {
  RowMask mask(kFeatureRows, true);
  for (int r = 0; r < 34; ++r) mask[r] = false;
  return mask;
}

double orthonormality_error(const Matrix& u) {
  return (u.transpose() * u - Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("rank-1 data") {
  Matrix x = Matrix::Zero(136, 5);
  const Vector c = oracle::random_matrix(136, 1, 4).col(0);
  x.col(3) = c;
  const auto model = pca::fit_pca(as_features(x), 1);
  Vector expected = c / c.norm();
  Eigen::Index imax;
  expected.cwiseAbs().maxCoeff(&imax);
  if (expected(imax) < 0) expected = -expected;
  CHECK((model.basis.col(0) - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(model.singular_values(0) == doctest::Approx(c.norm()).epsilon(1e-13));
}

TEST_CASE("basis matches eigenvectors of the Gram matrix") {
  const Matrix x = oracle::random_matrix(136, 50, 11);
  const auto model = pca::fit_pca(as_features(x), 50);
  const Matrix ev = oracle::gram_eigenvectors(x);
  const Vector lambda = oracle::gram_spectrum(x);
  for (Eigen::Index i = 0; i < 50; ++i) {
    CHECK(std::abs(model.basis.col(i).dot(ev.col(i))) > 1.0 - 1e-8);
    CHECK(model.singular_values(i) * model.singular_values(i) == doctest::Approx(lambda(i)).epsilon(1e-10));
  }
  CHECK(orthonormality_error(model.basis) <= 1e-10);
  for (Eigen::Index i = 1; i < 50; ++i) CHECK(model.singular_values(i) <= model.singular_values(i - 1));
}

TEST_CASE("full rank reconstructs exactly") {
  const auto x = as_features(low_rank(136, 30, 7, 5));
  const auto model = pca::fit_pca(x, 7);
  CHECK(pca::train_ve(model, x) == doctest::Approx(100.0).epsilon(1e-10));
  CHECK(std::abs(pca::train_ve(model, x) - 100.0) < 1e-8);
}

TEST_CASE("k range and degenerate data") {
  const auto x = as_features(oracle::random_matrix(136, 10, 3));
  CHECK_THROWS_AS(pca::fit_pca(x, 0), Error);
  CHECK_THROWS_AS(pca::fit_pca(x, 11), Error);
  CHECK_THROWS_AS(pca::fit_pca(as_features(Matrix::Zero(136, 4)), 1), Error);
  const auto model = pca::fit_pca(x, 10);
  CHECK(model.k() == 10);
  CHECK(model.truncated(4).k() == 4);
  CHECK_THROWS_AS(model.truncated(11), Error);
}

TEST_CASE("self projection and the VE-spectrum identity") {
  const auto x = as_features(oracle::random_matrix(136, 60, 21));
  const auto full = pca::fit_pca(x, 60);
  const Vector lambda = oracle::gram_spectrum(x.data);
  const auto expected = oracle::cumulative_ve(lambda);
  double previous = -1.0;
  for (Eigen::Index k = 1; k <= 60; ++k) {
    const auto m = full.truncated(k);
    const auto p = pca::project(m, x);
    const double test = metrics::variance_explained(p.masked_input, p.reconstruction, p.common_row_mask).value;
    const double train = pca::train_ve(m, x);
    CHECK(std::abs(test - train) <= 1e-10);
    CHECK(std::abs(train - expected[static_cast<std::size_t>(k - 1)]) <= 1e-8);
    CHECK(train >= previous);
    previous = train;
  }
}

TEST_CASE("projection with a jawless test set") {
  const auto train = as_features(oracle::random_matrix(136, 40, 8));
  const auto model = pca::fit_pca(train, 10);
  Matrix y = oracle::random_matrix(136, 5, 9);
  y.topRows(34).setZero();
  const auto p = pca::project(model, as_features(y, jawless_mask()));
  CHECK(p.reconstruction.topRows(34).isZero(0.0));
  CHECK(mask_count(p.common_row_mask) == 102);

  // Values in the masked-out rows never reach the result.
  Matrix y2 = y;
  y2.topRows(34) = oracle::random_matrix(34, 5, 10) * 1e6;
  const auto p2 = pca::project(model, y2, jawless_mask());
  CHECK(p2.weights == p.weights);
  CHECK(p2.reconstruction == p.reconstruction);

  RowMask none(kFeatureRows, false);
  CHECK_THROWS_AS(pca::project(model, y, none), Error);
}

TEST_CASE("jawless training mask keeps jawline rows of U at zero") {
  Matrix x = oracle::random_matrix(136, 30, 12);
  x.topRows(34).setZero();
  const auto model = pca::fit_pca(as_features(x, jawless_mask()), 30);
  CHECK(model.basis.topRows(34).isZero(0.0));
  CHECK(orthonormality_error(model.basis) <= 1e-10);
}

TEST_CASE("projecting the first basis vector") {
  const auto x = as_features(oracle::random_matrix(136, 20, 13));
  const auto model = pca::fit_pca(x, 6);
  const auto p = pca::project(model, model.basis.col(0), RowMask(kFeatureRows, true));
  Vector e1 = Vector::Zero(6);
  e1(0) = 1.0;
  CHECK((p.weights.col(0) - e1).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((p.reconstruction.col(0) - model.basis.col(0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("masked_columns") {
  const Matrix u = oracle::random_matrix(136, 4, 14);
  CHECK(pca::masked_columns(u, RowMask(kFeatureRows, true)) == u);
  CHECK(pca::masked_columns(u, RowMask(kFeatureRows, false)).isZero(0.0));
  const Matrix jawless = pca::masked_columns(u, jawless_mask());
  CHECK(jawless.topRows(34).isZero(0.0));
  CHECK(jawless.bottomRows(102) == u.bottomRows(102));
}

TEST_CASE("projection is least squares over the span") {
  const auto x = as_features(oracle::random_matrix(136, 25, 15));
  const auto model = pca::fit_pca(x, 5);
  const Matrix y = oracle::random_matrix(136, 7, 16);
  const auto p = pca::project(model, y, RowMask(kFeatureRows, true));
  const double best = (y - p.reconstruction).norm();
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix w = p.weights + 0.1 * oracle::random_matrix(5, 7, 1000 + trial);
    CHECK(best <= (y - model.basis * w).norm());
  }
}

TEST_CASE("nested bases give monotone Test VE") {
  const auto x = as_features(oracle::random_matrix(136, 40, 17));
  const auto y = as_features(oracle::random_matrix(136, 12, 18));
  const auto model = pca::fit_pca(x, 40);
  double previous = -1e300;
  for (Eigen::Index k = 1; k <= 40; ++k) {
    const double v = pca::test_ve(model.truncated(k), y);
    CHECK(v >= previous - 1e-12);
    previous = v;
  }
}

TEST_CASE("fits are deterministic") {
  const auto x = as_features(oracle::random_matrix(136, 33, 19));
  const auto a = pca::fit_pca(x, 12);
  const auto b = pca::fit_pca(x, 12);
  CHECK(std::memcmp(a.basis.data(), b.basis.data(), sizeof(double) * a.basis.size()) == 0);
  CHECK(std::memcmp(a.singular_values.data(), b.singular_values.data(), sizeof(double) * 12) == 0);
  for (Eigen::Index j = 0; j < a.k(); ++j) {
    Eigen::Index imax;
    a.basis.col(j).cwiseAbs().maxCoeff(&imax);
    CHECK(a.basis(imax, j) > 0.0);
  }
}

TEST_CASE("k selection") {
  const auto x = as_features(low_rank(136, 30, 6, 22));
  CHECK(pca::select_k(x, 100.0).k == 6);

  // Squared spectrum 10, 5, 3, 1.2, 0.8: cumulative 50, 75, 90, 96, 100 percent.
  const Matrix q = Eigen::HouseholderQR<Matrix>(oracle::random_matrix(136, 5, 23)).householderQ() *
                   Matrix::Identity(136, 5);
  const Matrix r = Eigen::HouseholderQR<Matrix>(oracle::random_matrix(20, 5, 24)).householderQ() *
                   Matrix::Identity(20, 5);
  Vector s(5);
  s << std::sqrt(10.0), std::sqrt(5.0), std::sqrt(3.0), std::sqrt(1.2), std::sqrt(0.8);
  const auto y = as_features(q * s.asDiagonal() * r.transpose());
  CHECK(pca::select_k(y, 95.0).k == 4);
  CHECK(pca::select_k(y, 90.0).k == 3);
  CHECK(pca::select_k(y, 90.01).k == 4);
  const auto sel = pca::select_k(y, 75.0);
  CHECK(sel.k == 2);
  CHECK(sel.train_ve == doctest::Approx(75.0));
  CHECK(sel.max_train_ve == doctest::Approx(100.0));
  CHECK_THROWS_AS(pca::select_k(y, 101.0), Error);
}
