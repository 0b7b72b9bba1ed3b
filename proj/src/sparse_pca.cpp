#include "binderlsc/sparse_pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/QR>

#include "binderlsc/error.hpp"
#include "binderlsc/rng.hpp"
#include "binderlsc/text.hpp"

namespace binderlsc {

std::size_t SparsePcaModel::zero_loadings() const {
  return static_cast<std::size_t>((components.array() == 0.0).count());
}

double SparsePcaModel::zero_fraction() const {
  if (components.size() == 0) return 0.0;
  return static_cast<double>(zero_loadings()) / static_cast<double>(components.size());
}

namespace {

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// Score columns: orthonormal basis of the range of X_c G for a Gaussian G,
// so the start lies in the data's column space.
Eigen::MatrixXd initial_scores(const Eigen::MatrixXd& xc, std::size_t k, Rng& rng) {
  const Eigen::Index p = xc.cols();
  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd g(p, kk);
  for (Eigen::Index r = 0; r < p; ++r) {
    for (Eigen::Index c = 0; c < kk; ++c) g(r, c) = rng.normal();
  }
  Eigen::MatrixXd y = xc * g;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(xc.rows(), kk);
  return q;
}

// Lasso coordinate descent for every feature column at once:
//   min_V |X_c - U V|^2 + alpha |V|_1
// Each coordinate update is an exact minimization, so the objective is
// non-increasing sweep by sweep.
void update_loadings(const Eigen::MatrixXd& xc, const Eigen::MatrixXd& u, double alpha,
                     std::size_t max_sweeps, Eigen::MatrixXd& v) {
  const Eigen::MatrixXd gram = u.transpose() * u;  // k x k
  const Eigen::MatrixXd corr = u.transpose() * xc;  // k x p
  const Eigen::Index k = v.rows();
  const double half = 0.5 * alpha;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
      double max_change = 0.0;
      double max_value = 0.0;
      for (Eigen::Index c = 0; c < k; ++c) {
        const double diag = gram(c, c);
        double next = 0.0;
        if (diag > 0.0) {
          double rho = corr(c, j);
          for (Eigen::Index l = 0; l < k; ++l) {
            if (l != c) rho -= gram(c, l) * v(l, j);
          }
          next = soft_threshold(rho, half) / diag;
        }
        max_change = std::max(max_change, std::abs(next - v(c, j)));
        max_value = std::max(max_value, std::abs(next));
        v(c, j) = next;
      }
      if (max_change <= 1e-12 * std::max(1.0, max_value)) break;
    }
  }
}

// Block coordinate update of each score column, projected onto the unit
// ball. The objective in one column is isotropic, so the projection is the
// exact constrained minimizer. `residual` tracks X_c - U V.
void update_scores(const Eigen::MatrixXd& v, Eigen::MatrixXd& u, Eigen::MatrixXd& residual) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    const double vv = v.row(c).squaredNorm();
    if (vv == 0.0) continue;  // column does not enter the objective
    residual += u.col(c) * v.row(c);
    Eigen::VectorXd col = residual * v.row(c).transpose() / vv;
    const double norm = col.norm();
    if (norm > 1.0) col /= norm;
    u.col(c) = col;
    residual -= u.col(c) * v.row(c);
  }
}

double objective(const Eigen::MatrixXd& residual, const Eigen::MatrixXd& v, double alpha) {
  return residual.squaredNorm() + alpha * v.cwiseAbs().sum();
}

}  // namespace

double alpha_upper_bound(const Eigen::MatrixXd& x) {
  if (x.rows() == 0) return 0.0;
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - mean;
  return 2.0 * xc.colwise().norm().maxCoeff();
}

SparsePcaModel sparse_pca_fit(const Eigen::MatrixXd& x, const SparsePcaOptions& options,
                              std::vector<std::string> row_labels) {
  const std::size_t k = options.n_components;
  if (k == 0) throw Error(ErrorCode::Validation, "n_components must be >= 1");
  if (!(options.alpha >= 0.0) || !std::isfinite(options.alpha)) {
    throw Error(ErrorCode::Validation, "alpha must be a finite value >= 0");
  }
  if (static_cast<std::size_t>(x.rows()) < k) {
    throw Error(ErrorCode::InsufficientData, std::to_string(x.rows()) + " rows cannot fit " +
                                                 std::to_string(k) + " components");
  }
  if (static_cast<std::size_t>(x.cols()) < k) {
    throw Error(ErrorCode::InsufficientData, std::to_string(x.cols()) + " features cannot fit " +
                                                 std::to_string(k) + " components");
  }
  if (!x.allFinite()) throw Error(ErrorCode::Data, "sparse PCA input has non-finite values");
  if (!row_labels.empty() && row_labels.size() != static_cast<std::size_t>(x.rows())) {
    throw Error(ErrorCode::Shape, "row label count does not match the data");
  }

  SparsePcaModel model;
  model.alpha = options.alpha;
  model.row_labels = std::move(row_labels);
  model.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd xc = x.rowwise() - model.mean.transpose();

  Rng rng(derive_seed(options.seed, "sparse-pca-init"));
  Eigen::MatrixXd u = initial_scores(xc, k, rng);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), xc.cols());
  Eigen::MatrixXd residual = xc;

  double previous = objective(residual, v, options.alpha);
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    update_loadings(xc, u, options.alpha, options.max_coding_sweeps, v);
    residual = xc - u * v;
    update_scores(v, u, residual);
    residual = xc - u * v;
    const double current = objective(residual, v, options.alpha);
    model.objective_trace.push_back(current);
    model.iterations = it;
    const double change = std::abs(previous - current);
    previous = current;
    if (change <= options.tolerance * std::max(current, 1e-300)) {
      model.converged = true;
      break;
    }
  }
  if (!model.converged) {
    model.warnings.push_back("sparse PCA did not converge in " +
                             std::to_string(options.max_iterations) + " iterations");
  }
  // Unit-norm components, positive dominant entry.
  for (Eigen::Index c = 0; c < v.rows(); ++c) {
    const double norm = v.row(c).norm();
    if (norm == 0.0) {
      u.col(c).setZero();
      continue;
    }
    v.row(c) /= norm;
    u.col(c) *= norm;
    Eigen::Index arg = 0;
    v.row(c).cwiseAbs().maxCoeff(&arg);
    if (v(c, arg) < 0.0) {
      v.row(c) *= -1.0;
      u.col(c) *= -1.0;
    }
  }
  // The penalty is homogeneous, so one factor split over parallel components
  // costs the same as keeping it whole. Fold such duplicates together; by the
  // triangle inequality this never raises the objective.
  for (Eigen::Index a = 0; a < v.rows(); ++a) {
    if (v.row(a).squaredNorm() == 0.0) continue;
    for (Eigen::Index b = a + 1; b < v.rows(); ++b) {
      if (v.row(b).squaredNorm() == 0.0) continue;
      if (v.row(a).dot(v.row(b)) < 1.0 - 1e-12) continue;
      u.col(a) += u.col(b);
      u.col(b).setZero();
      v.row(b).setZero();
    }
  }
  residual = xc - u * v;
  model.reconstruction_error = residual.squaredNorm();
  model.final_objective = 0.0;
  for (Eigen::Index c = 0; c < v.rows(); ++c) {
    model.final_objective += options.alpha * u.col(c).norm() * v.row(c).cwiseAbs().sum();
  }
  model.final_objective += model.reconstruction_error;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(v.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return u.col(a).squaredNorm() > u.col(b).squaredNorm();
  });
  model.components.resize(v.rows(), v.cols());
  model.projections.resize(u.rows(), u.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    model.components.row(static_cast<Eigen::Index>(i)) = v.row(order[i]);
    model.projections.col(static_cast<Eigen::Index>(i)) = u.col(order[i]);
  }
  model.degenerate = model.zero_loadings() == static_cast<std::size_t>(model.components.size());
  if (model.degenerate) model.warnings.push_back("degenerate fit: every loading is zero");
  return model;
}

AlphaCalibration calibrate_alpha(const Eigen::MatrixXd& x, SparsePcaOptions options,
                                 double target_zero_fraction,
                                 std::vector<std::string> row_labels) {
  const double upper = alpha_upper_bound(x);
  AlphaCalibration result;
  double alpha = upper * 1e-4;
  for (int step = 0; step < 20; ++step) {
    options.alpha = alpha;
    auto model = sparse_pca_fit(x, options, row_labels);
    result.ladder.emplace_back(alpha, model.zero_fraction());
    if (model.zero_fraction() >= target_zero_fraction || alpha >= upper) {
      result.alpha = alpha;
      result.model = std::move(model);
      return result;
    }
    alpha = std::min(alpha * 2.0, upper);
  }
  // Unreachable in practice: the ladder reaches `upper`, where every loading is zero.
  options.alpha = upper;
  result.alpha = upper;
  result.model = sparse_pca_fit(x, options, std::move(row_labels));
  return result;
}

std::vector<std::pair<std::string, double>> top_features(const SparsePcaModel& model,
                                                         std::size_t component, std::size_t n,
                                                         const FeatureIndex& features) {
  if (component >= static_cast<std::size_t>(model.components.rows())) {
    throw Error(ErrorCode::Range, "component " + std::to_string(component) + " out of range");
  }
  if (features.size() != static_cast<std::size_t>(model.components.cols())) {
    throw Error(ErrorCode::Shape, "feature index does not match the component width");
  }
  const auto row = model.components.row(static_cast<Eigen::Index>(component));
  std::vector<std::size_t> idx(features.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return row[static_cast<Eigen::Index>(a)] > row[static_cast<Eigen::Index>(b)];
  });
  n = std::min(n, idx.size());
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace_back(features.name_at(idx[i]), row[static_cast<Eigen::Index>(idx[i])]);
  }
  return out;
}

std::vector<std::pair<std::string, double>> extreme_words(const SparsePcaModel& model,
                                                          std::size_t component, std::size_t n,
                                                          Extreme direction) {
  if (component >= static_cast<std::size_t>(model.projections.cols())) {
    throw Error(ErrorCode::Range, "component " + std::to_string(component) + " out of range");
  }
  const auto rows = static_cast<std::size_t>(model.projections.rows());
  if (n > rows) {
    throw Error(ErrorCode::Range, "requested " + std::to_string(n) + " words from " +
                                      std::to_string(rows) + " projections");
  }
  auto label = [&](std::size_t i) {
    return model.row_labels.empty() ? std::to_string(i) : model.row_labels[i];
  };
  std::vector<std::pair<std::string, double>> all;
  all.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    all.emplace_back(label(i), model.projections(static_cast<Eigen::Index>(i),
                                                 static_cast<Eigen::Index>(component)));
  }
  std::sort(all.begin(), all.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) {
      return direction == Extreme::Top ? a.second > b.second : a.second < b.second;
    }
    return a.first < b.first;
  });
  all.resize(n);
  return all;
}

}  // namespace binderlsc
