#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "decaykit/geno.hpp"

namespace decaykit {

// Additive linear model y = mu + X beta + e fitted with the elastic-net
// penalty lambda * (alpha * |beta|_1 + (1-alpha)/2 * |beta|_2^2) on the
// (1/2n) squared-error scale. Predictors are standardized internally to
// mean 0 and population sd 1 (denominator n); beta lives on that scale and
// the fit-time means/sds are stored for prediction.
struct ElasticNetModel {
  double intercept = 0.0;
  Eigen::VectorXd beta;
  double alpha = 1.0;
  double lambda = 0.0;
  std::vector<std::string> marker_ids;
  Eigen::VectorXd means;
  Eigen::VectorXd sds;  // 0 marks a zero-variance marker (coefficient pinned to 0)

  int n_nonzero() const { return static_cast<int>((beta.array() != 0.0).count()); }

  /// Sparse JSON: intercept, alpha, lambda, nonzero coefficients with their
  /// standardization constants.
  std::string to_json_string() const;
  static ElasticNetModel from_json_string(const std::string& text);
};

struct FitOptions {
  double tol = 1e-7;      // max absolute coefficient change per sweep
  int max_sweeps = 100000;
  const Eigen::VectorXd* warm_start = nullptr;   // standardized scale, length m
  std::vector<double>* objective_trace = nullptr;  // per-sweep objective, for diagnostics
};

/// Cyclic coordinate descent with soft-thresholding. Zero-variance markers
/// get coefficient 0. Requires complete genotypes and finite phenotypes.
ElasticNetModel fit(const MarkerMatrix& x, const PhenotypeVector& y, double alpha, double lambda,
                    const FitOptions& options = {});

/// y_hat = mu + X~_new beta using the model's stored standardization. Markers
/// are aligned by id; absent markers raise an Error naming them.
Eigen::VectorXd predict(const ElasticNetModel& model, const MarkerMatrix& x_new);

/// Smallest penalty that zeroes every coefficient: max_j |x~_j' y| / (n*alpha).
double lambda_max(const MarkerMatrix& x, const PhenotypeVector& y, double alpha);

/// Largest violation of the elastic-net stationarity conditions at the fitted
/// coefficients; an independent certificate of convergence.
double kkt_max_violation(const ElasticNetModel& model, const MarkerMatrix& x,
                         const PhenotypeVector& y);

struct CvGrid {
  std::vector<double> alphas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  int n_lambda = 100;
  double lambda_min_ratio = 0.001;
  int n_runs = 5;
  int n_folds = 10;
};

struct CVResult {
  struct Cell {
    double alpha = 0.0;
    double lambda = 0.0;
    double mean_rho = 0.0;  // NaN when too few folds produced a defined correlation
  };
  std::vector<Cell> grid;
  double best_alpha = 0.0;
  double best_lambda = 0.0;
  double best_mean_rho = 0.0;
  int n_runs = 0;
  int n_folds = 0;
};

// Repeated k-fold cross-validation over (alpha, lambda). The lambda path is
// per alpha, n_lambda log-spaced values from lambda_max down to
// lambda_min_ratio * lambda_max (alpha floored at 0.1 in the path formula).
// Mean held-out Pearson correlation decides; ties prefer smaller lambda,
// then smaller alpha. Fold assignments are reshuffled per run from `seed`.
CVResult tune_cv(const MarkerMatrix& x, const PhenotypeVector& y, const CvGrid& grid,
                 std::uint64_t seed, int threads = 0);

/// Sample Pearson correlation between observed and predicted phenotypes.
double predictive_correlation(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

/// Prediction error variance (1 - rho^2) * var_y.
double pev(double rho, double var_y);

}  // namespace decaykit
