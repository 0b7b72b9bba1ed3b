#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "binderlsc/lexicon.hpp"

namespace binderlsc {

struct SparsePcaOptions {
  std::size_t n_components = 10;
  double alpha = 1.0;  // weight of the L1 penalty on the components
  std::uint64_t seed = 0;
  std::size_t max_iterations = 1000;
  double tolerance = 1e-6;  // relative objective change that ends the fit
  std::size_t max_coding_sweeps = 500;
};

// Sparse PCA as penalized matrix factorization of the centered data:
//
//   min_{U,V} |X_c - U V|_F^2 + alpha * sum_k |V_k|_1   s.t. |U_k|_2 <= 1
//
// solved by alternating exact coordinate updates (lasso coordinate descent
// on V, projected block updates on the columns of U), so the objective never
// increases. After the fit each component row of V is rescaled to unit norm
// (U absorbs the scale), its largest-magnitude entry is made positive, and
// components are ordered by the norm of their score column.
struct SparsePcaModel {
  Eigen::MatrixXd components;   // n_components x p; zero rows for dead components
  Eigen::VectorXd mean;         // p, subtracted before the fit
  Eigen::MatrixXd projections;  // m x n_components, fitted scores per input row
  std::vector<std::string> row_labels;  // optional word per input row
  double alpha = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool degenerate = false;  // every loading is zero
  double final_objective = 0.0;
  double reconstruction_error = 0.0;   // |X_c - U V|_F^2 at the final iterate
  std::vector<double> objective_trace;  // objective after each iteration
  std::vector<std::string> warnings;

  std::size_t zero_loadings() const;
  double zero_fraction() const;
};

// Throws Error(InsufficientData) when rows < n_components and
// Error(Validation) for negative alpha or zero components.
SparsePcaModel sparse_pca_fit(const Eigen::MatrixXd& x, const SparsePcaOptions& options,
                              std::vector<std::string> row_labels = {});

// Smallest alpha along a doubling ladder (starting at alpha_max * 1e-4, where
// alpha_max zeroes every loading) whose fit has at least `target_zero_fraction`
// of its loadings exactly zero.
struct AlphaCalibration {
  double alpha = 0.0;
  std::vector<std::pair<double, double>> ladder;  // (alpha, zero fraction) tried
  SparsePcaModel model;
};

AlphaCalibration calibrate_alpha(const Eigen::MatrixXd& x, SparsePcaOptions options,
                                 double target_zero_fraction = 0.5,
                                 std::vector<std::string> row_labels = {});

// Lasso penalty above which coordinate descent zeroes every loading for any
// unit-norm score columns.
double alpha_upper_bound(const Eigen::MatrixXd& x);

// The n features with the largest signed loadings, descending, ties by
// feature index.
std::vector<std::pair<std::string, double>> top_features(const SparsePcaModel& model,
                                                         std::size_t component, std::size_t n,
                                                         const FeatureIndex& features);

enum class Extreme { Top, Bottom };

// Rows with the largest (Top) or smallest (Bottom) score on a component,
// ties by label. Throws Error(Range) when n exceeds the number of rows.
std::vector<std::pair<std::string, double>> extreme_words(const SparsePcaModel& model,
                                                          std::size_t component, std::size_t n,
                                                          Extreme direction);

}  // namespace binderlsc
