#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace decaykit {

/// Sample Pearson correlation. Throws Error for length < 3, length mismatch
/// or a constant argument (correlation undefined).
double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// 95% confidence interval for a correlation via the Fisher z-transform.
Interval fisher_z_interval(double r, int n, double z_crit = 1.959963984540054);

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares of y on x. Throws Error if x is constant.
LineFit ols_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Regularized incomplete beta function I_x(a, b), continued-fraction
/// evaluation (modified Lentz).
double incomplete_beta(double a, double b, double x);

/// Two-sided p-value of a Student-t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct CorrelationTest {
  double r = 0.0;
  double t = 0.0;
  double p = 1.0;
  int n = 0;
  bool degenerate = false;  // |r| = 1: t undefined, p pinned to 0
};

/// Exact t-test for a Pearson correlation coefficient: t = r*sqrt((n-2)/(1-r^2)),
/// two-sided p with n-2 degrees of freedom. Needs n >= 4 pairs.
CorrelationTest correlation_t_test(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Benjamini-Hochberg step-up adjustment; returns adjusted p-values in the
/// input order.
std::vector<double> bh_adjust(const std::vector<double>& p);

// Two-sample permutation test of the mean difference. If the number of
// distinct group assignments C(n_a+n_b, n_a) is at most n_perm the test
// enumerates all of them exactly (the identity assignment makes p > 0);
// otherwise it samples n_perm random assignments and applies the plus-one
// correction p = (1 + hits) / (n_perm + 1).
double permutation_mean_test(const std::vector<double>& a, const std::vector<double>& b,
                             int n_perm, std::uint64_t seed);

}  // namespace decaykit
