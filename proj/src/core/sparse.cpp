#include "sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace aucoder::sparse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_inputs(const Vector& y, const Matrix& dict, const LarsConfig& config) {
  if (config.max_active < 1) fail(ErrorCode::InvalidArgument, "LARS budget must be at least 1");
  if (dict.cols() == 0) fail(ErrorCode::InvalidArgument, "LARS dictionary has no columns");
  if (config.max_active > dict.cols())
    fail(ErrorCode::OutOfRange, "LARS budget " + std::to_string(config.max_active) + " exceeds dictionary size " +
                                    std::to_string(dict.cols()));
  if (y.size() != dict.rows()) fail(ErrorCode::InvalidArgument, "LARS signal length does not match dictionary rows");
  if (!y.allFinite() || !dict.allFinite()) fail(ErrorCode::InvalidArgument, "LARS inputs must be finite");
  if (config.ridge < 0.0 || !std::isfinite(config.ridge))
    fail(ErrorCode::InvalidArgument, "ridge penalty must be non-negative");
  for (Eigen::Index j = 0; j < dict.cols(); ++j)
    if (dict.col(j).squaredNorm() == 0.0)
      fail(ErrorCode::InvalidArgument, "zero dictionary column " + std::to_string(j));
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::vector<PathPoint> lars_budget_path(const Vector& y, const Matrix& dict, const LarsConfig& config) {
  check_inputs(y, dict, config);
  const Eigen::Index c = dict.cols();
  const auto budget = static_cast<std::size_t>(config.max_active);

  Matrix gram = dict.transpose() * dict;
  gram.diagonal().array() += config.ridge;
  const Vector rhs = dict.transpose() * y;

  Vector beta = Vector::Zero(c);
  Vector corr = rhs;
  double lambda = corr.cwiseAbs().maxCoeff();
  const double eps = config.tolerance * std::max(lambda, std::numeric_limits<double>::min());

  std::vector<PathPoint> stops;
  stops.reserve(budget);
  auto finish = [&](double lam) {
    PathPoint end{beta, std::max(lam, 0.0), 0};
    for (Eigen::Index j = 0; j < c; ++j) end.active += beta(j) != 0.0 ? 1 : 0;
    while (stops.size() < budget) stops.push_back(end);
    return stops;
  };
  if (!(lambda > 0.0)) return finish(0.0);

  std::vector<Eigen::Index> active;
  std::vector<bool> is_active(static_cast<std::size_t>(c), false);
  for (Eigen::Index j = 0; j < c; ++j) {
    if (std::abs(corr(j)) >= lambda - eps) {
      active.push_back(j);
      is_active[static_cast<std::size_t>(j)] = true;
      break;
    }
  }

  Eigen::Index last_dropped = -1;
  const Eigen::Index max_steps = 8 * c + 16;
  for (Eigen::Index step = 0; step < max_steps; ++step) {
    const auto na = static_cast<Eigen::Index>(active.size());
    Matrix gaa(na, na);
    Vector signs(na);
    for (Eigen::Index a = 0; a < na; ++a) {
      signs(a) = sign_of(corr(active[static_cast<std::size_t>(a)]));
      for (Eigen::Index b = 0; b < na; ++b)
        gaa(a, b) = gram(active[static_cast<std::size_t>(a)], active[static_cast<std::size_t>(b)]);
    }
    Eigen::LDLT<Matrix> ldlt(gaa);
    const Vector dvec = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success || dvec.minCoeff() <= 1e-12 * std::max(dvec.maxCoeff(), 1.0))
      return finish(lambda);  // active atoms became linearly dependent
    const Vector dir = ldlt.solve(signs);

    Vector slope = Vector::Zero(c);
    for (Eigen::Index a = 0; a < na; ++a) slope += gram.col(active[static_cast<std::size_t>(a)]) * dir(a);

    // Next atom to reach the shrinking correlation level.
    double gamma_add = kInf;
    Eigen::Index j_add = -1;
    for (Eigen::Index j = 0; j < c; ++j) {
      if (is_active[static_cast<std::size_t>(j)]) continue;
      for (double g : {(lambda - corr(j)) / (1.0 - slope(j)), (lambda + corr(j)) / (1.0 + slope(j))}) {
        if (!std::isfinite(g) || g <= -eps || g > lambda) continue;
        // A just-dropped atom sits on the correlation boundary; only a later
        // crossing counts.
        if (j == last_dropped && g <= eps) continue;
        g = std::max(g, 0.0);
        if (g < gamma_add) {
          gamma_add = g;
          j_add = j;
        }
      }
    }
    // Next active coefficient to cross zero.
    double gamma_drop = kInf;
    Eigen::Index drop_pos = -1;
    for (Eigen::Index a = 0; a < na; ++a) {
      const Eigen::Index j = active[static_cast<std::size_t>(a)];
      if (dir(a) == 0.0 || beta(j) == 0.0) continue;
      const double g = -beta(j) / dir(a);
      if (g > 0.0 && g < gamma_drop) {
        gamma_drop = g;
        drop_pos = a;
      }
    }

    const bool drop = drop_pos >= 0 && gamma_drop < lambda && gamma_drop <= gamma_add;
    const bool add = !drop && j_add >= 0 && gamma_add < lambda;
    const double gamma = drop ? gamma_drop : (add ? gamma_add : lambda);

    for (Eigen::Index a = 0; a < na; ++a) beta(active[static_cast<std::size_t>(a)]) += gamma * dir(a);
    lambda -= gamma;

    if (drop) {
      const Eigen::Index j = active[static_cast<std::size_t>(drop_pos)];
      beta(j) = 0.0;
      is_active[static_cast<std::size_t>(j)] = false;
      active.erase(active.begin() + drop_pos);
      last_dropped = j;
    } else {
      last_dropped = -1;
    }
    corr = rhs - gram * beta;

    if (!drop && !add) return finish(0.0);
    if (lambda <= eps) return finish(lambda);
    if (add) {
      // This knot is the stopping point for every budget not yet served
      // that the current active set already saturates.
      while (stops.size() < active.size() && stops.size() < budget)
        stops.push_back(PathPoint{beta, lambda, static_cast<Eigen::Index>(active.size())});
      if (stops.size() >= budget) return stops;
      active.push_back(j_add);
      is_active[static_cast<std::size_t>(j_add)] = true;
    }
    if (active.empty()) return finish(lambda);
  }
  return finish(lambda);
}

PathPoint lars_path_point(const Vector& y, const Matrix& dict, const LarsConfig& config) {
  return lars_budget_path(y, dict, config).back();
}

Vector lars_encode(const Vector& y, const Matrix& dict, const LarsConfig& config) {
  return lars_path_point(y, dict, config).coef;
}

Dictionary Dictionary::from_model(const pca::PcaModel& model, std::string id) {
  Dictionary d;
  d.id = std::move(id);
  d.kind = "pca";
  d.atoms = model.basis;
  d.row_mask = model.train_row_mask;
  for (Eigen::Index j = 0; j < model.k(); ++j) d.labels.push_back("PC" + std::to_string(j + 1));
  return d;
}

Dictionary Dictionary::from_au(const features::AuDictionary& au, std::string id) {
  Dictionary d;
  d.kind = features::to_string(au.kind);
  d.id = id.empty() ? d.kind : std::move(id);
  d.atoms = au.columns;
  d.row_mask = au.row_mask;
  d.labels = au.labels;
  return d;
}

namespace {

struct Prepared {
  RowMask common;
  Matrix masked_atoms;            // p x c, rows outside common zeroed
  Matrix masked_input;            // p x n
  std::vector<Eigen::Index> usable;  // atoms nonzero on the common rows
  Matrix solve_atoms;             // p x usable, optionally unit-norm
  Vector scale;                   // per usable atom; coef = solved / scale
};

Prepared prepare(const Matrix& y, const RowMask& y_mask, const Dictionary& dict, bool normalize) {
  if (y.rows() != dict.atoms.rows()) fail(ErrorCode::InvalidArgument, "encode: row count mismatch");
  if (static_cast<Eigen::Index>(y_mask.size()) != y.rows() ||
      static_cast<Eigen::Index>(dict.row_mask.size()) != y.rows())
    fail(ErrorCode::InvalidArgument, "encode: mask length does not match row count");
  if (dict.size() == 0) fail(ErrorCode::InvalidArgument, "encode: dictionary is empty");
  Prepared p;
  p.common = mask_and(y_mask, dict.row_mask);
  if (mask_count(p.common) == 0) fail(ErrorCode::MaskMismatch, "encode: data and dictionary share no keypoints");
  p.masked_atoms = pca::masked_columns(dict.atoms, p.common);
  p.masked_input = pca::masked_columns(y, p.common);
  for (Eigen::Index j = 0; j < dict.size(); ++j)
    if (p.masked_atoms.col(j).squaredNorm() > 0.0) p.usable.push_back(j);
  if (p.usable.empty()) fail(ErrorCode::Degenerate, "encode: no dictionary atom is supported on the shared keypoints");
  const auto nu = static_cast<Eigen::Index>(p.usable.size());
  p.solve_atoms.resize(y.rows(), nu);
  p.scale = Vector::Ones(nu);
  for (Eigen::Index a = 0; a < nu; ++a) {
    p.solve_atoms.col(a) = p.masked_atoms.col(p.usable[static_cast<std::size_t>(a)]);
    if (normalize) {
      p.scale(a) = p.solve_atoms.col(a).norm();
      p.solve_atoms.col(a) /= p.scale(a);
    }
  }
  return p;
}

}  // namespace

EncodeResult encode_matrix(const Matrix& y, const RowMask& y_mask, const Dictionary& dict, const LarsConfig& config) {
  if (config.max_active < 1) fail(ErrorCode::InvalidArgument, "LARS budget must be at least 1");
  if (config.max_active > dict.size())
    fail(ErrorCode::OutOfRange, "LARS budget exceeds dictionary size " + std::to_string(dict.size()));
  const Prepared p = prepare(y, y_mask, dict, config.normalize_columns);
  LarsConfig cfg = config;
  cfg.max_active = std::min<Eigen::Index>(config.max_active, p.solve_atoms.cols());

  EncodeResult r;
  r.code.dictionary_id = dict.id;
  r.code.max_active = config.max_active;
  r.code.ridge = config.ridge;
  r.code.normalized = config.normalize_columns;
  r.code.weights = Matrix::Zero(dict.size(), y.cols());
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    const Vector coef = lars_encode(p.masked_input.col(j), p.solve_atoms, cfg);
    Eigen::Index nnz = 0;
    for (Eigen::Index a = 0; a < coef.size(); ++a) {
      if (coef(a) == 0.0) continue;
      r.code.weights(p.usable[static_cast<std::size_t>(a)], j) = coef(a) / p.scale(a);
      ++nnz;
    }
    r.code.active_counts.push_back(nnz);
  }
  r.reconstruction = p.masked_atoms * r.code.weights;
  r.masked_input = p.masked_input;
  r.common_row_mask = p.common;
  r.ve = metrics::variance_explained(r.masked_input, r.reconstruction, r.common_row_mask);
  r.realized_mc = metrics::mean_components(r.code.weights);
  return r;
}

EncodeResult encode_matrix(const features::FeatureMatrix& y, const Dictionary& dict, const LarsConfig& config) {
  return encode_matrix(y.data, y.row_mask, dict, config);
}

std::vector<SweepRow> sweep_budget(const features::FeatureMatrix& y, const Dictionary& dict,
                                   const std::vector<Eigen::Index>& budgets, const LarsConfig& base) {
  if (budgets.empty()) fail(ErrorCode::InvalidArgument, "sweep_budget: no budgets given");
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (budgets[i] < 1) fail(ErrorCode::InvalidArgument, "sweep_budget: budgets must be at least 1");
    if (budgets[i] > dict.size())
      fail(ErrorCode::OutOfRange, "sweep_budget: budget " + std::to_string(budgets[i]) + " exceeds dictionary size " +
                                      std::to_string(dict.size()));
    if (i > 0 && budgets[i] < budgets[i - 1]) fail(ErrorCode::InvalidArgument, "sweep_budget: budgets must be ascending");
  }
  if (y.cols() == 0) fail(ErrorCode::InvalidArgument, "sweep_budget: no test columns");
  const Prepared p = prepare(y.data, y.row_mask, dict, base.normalize_columns);
  const Eigen::Index usable = p.solve_atoms.cols();
  LarsConfig cfg = base;
  cfg.max_active = std::min<Eigen::Index>(budgets.back(), usable);

  const std::size_t nb = budgets.size();
  std::vector<double> residual(nb, 0.0);
  std::vector<double> nonzeros(nb, 0.0);
  double energy = 0.0;
  const std::size_t rows = mask_count(p.common);
  // Unit-norm solving rescales coefficients, which leaves the reconstruction
  // unchanged, so it is formed from the solving atoms directly.
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    const Vector yj = p.masked_input.col(j);
    energy += yj.squaredNorm();
    const auto path = lars_budget_path(yj, p.solve_atoms, cfg);
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& pt = path[static_cast<std::size_t>(std::min(budgets[b], usable) - 1)];
      residual[b] += (yj - p.solve_atoms * pt.coef).squaredNorm();
      for (Eigen::Index a = 0; a < pt.coef.size(); ++a) nonzeros[b] += pt.coef(a) != 0.0 ? 1.0 : 0.0;
    }
  }
  std::vector<SweepRow> out;
  for (std::size_t b = 0; b < nb; ++b) {
    out.push_back({budgets[b], nonzeros[b] / static_cast<double>(y.cols()),
                   metrics::ve_from_sums(residual[b], energy, rows).value});
  }
  return out;
}

}  // namespace aucoder::sparse
