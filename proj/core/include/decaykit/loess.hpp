#pragma once

#include <Eigen/Dense>

namespace decaykit {

struct LoessOptions {
  double span = 0.75;
  int degree = 2;
  int grid_size = 100;
  double z_crit = 1.959963984540054;  // Gaussian 95%
};

/// Tricube-weighted local polynomial smoother evaluated on an even grid over
/// [min x, max x], with a pointwise confidence band from the weighted
/// least-squares variance.
struct LoessCurve {
  Eigen::VectorXd grid;
  Eigen::VectorXd mean;
  Eigen::VectorXd se;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  double span = 0.75;
  int degree = 2;
  double sigma2 = 0.0;     // residual variance estimate
  double trace_hat = 0.0;  // effective parameters of the smoother
};

/// Needs at least 10 points spanning a nonzero x range and enough points in
/// every local window for the polynomial degree.
LoessCurve loess_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                     const LoessOptions& options = {});

}  // namespace decaykit
