#include "decaykit/loess.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "decaykit/error.hpp"

namespace decaykit {

namespace {

double tricube(double u) {
  if (u >= 1.0) return 0.0;
  const double t = 1.0 - u * u * u;
  return t * t * t;
}

struct LocalFit {
  double value = 0.0;
  double l_sq = 0.0;    // squared norm of the equivalent-weight vector
  double l_self = 0.0;  // weight the fit puts on a data point at x0 itself
};

// Weighted local polynomial at x0. The caller supplies self_index >= 0 when
// x0 is the data point at that index (for the hat-trace).
LocalFit fit_at(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double x0, int q, int degree,
                Eigen::Index self_index) {
  const Eigen::Index n = x.size();
  const int p = degree + 1;
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) dist[static_cast<std::size_t>(i)] = std::fabs(x(i) - x0);
  std::vector<double> sorted = dist;
  std::sort(sorted.begin(), sorted.end());

  // bandwidth: the q-th smallest distance, widened until the open window
  // holds at least p points (coincident x values can otherwise starve it)
  std::size_t idx = static_cast<std::size_t>(q) - 1;
  double h = sorted[idx];
  auto points_inside = [&sorted](double band) {
    return static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), band) - sorted.begin());
  };
  while (h == 0.0 || points_inside(h) < p) {
    if (idx + 1 < sorted.size()) {
      ++idx;
      h = sorted[idx];
    } else {
      h = sorted.back() * (1.0 + 1e-9) + 1e-300;
      break;
    }
  }
  if (points_inside(h) < p) {
    throw Error("loess_fit: fewer points than local parameters in a window");
  }

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  std::vector<std::pair<Eigen::Index, double>> contributing;  // (index, weight)
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = tricube(dist[static_cast<std::size_t>(i)] / h);
    if (w <= 0.0) continue;
    contributing.emplace_back(i, w);
    const double dx = x(i) - x0;
    Eigen::VectorXd phi(p);
    double t = 1.0;
    for (int k = 0; k < p; ++k) {
      phi(k) = t;
      t *= dx;
    }
    a.noalias() += w * phi * phi.transpose();
    b.noalias() += w * phi * y(i);
  }
  const Eigen::LDLT<Eigen::MatrixXd> solver(a);
  require(solver.info() == Eigen::Success, "loess_fit: singular local system");
  const Eigen::VectorXd theta = solver.solve(b);

  // equivalent weights: l_i = w_i * (A^-1 phi_i)_0
  LocalFit out;
  out.value = theta(0);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(p);
  e1(0) = 1.0;
  const Eigen::VectorXd a_inv_e1 = solver.solve(e1);
  for (const auto& [i, w] : contributing) {
    const double dx = x(i) - x0;
    double dot = 0.0;
    double t = 1.0;
    for (int k = 0; k < p; ++k) {
      dot += a_inv_e1(k) * t;
      t *= dx;
    }
    const double l_i = w * dot;
    out.l_sq += l_i * l_i;
    if (i == self_index) out.l_self = l_i;
  }
  return out;
}

}  // namespace

LoessCurve loess_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                     const LoessOptions& options) {
  const Eigen::Index n = x.size();
  require(n == y.size(), "loess_fit: length mismatch");
  require(n >= 10, "loess_fit: need at least 10 points");
  require(options.degree >= 0 && options.degree <= 3, "loess_fit: unsupported degree");
  require(options.span > 0.0 && options.span <= 1.0, "loess_fit: span outside (0, 1]");
  require(options.grid_size >= 2, "loess_fit: grid_size must be at least 2");
  const double x_min = x.minCoeff();
  const double x_max = x.maxCoeff();
  require(x_max > x_min, "loess_fit: points span a zero x range");
  const int p = options.degree + 1;
  require(static_cast<Eigen::Index>(p) <= n, "loess_fit: fewer points than local parameters");

  const int q = std::clamp(static_cast<int>(std::ceil(options.span * static_cast<double>(n))), p,
                           static_cast<int>(n));

  // residual variance from the fit at the observed points
  double rss = 0.0;
  double trace = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const LocalFit lf = fit_at(x, y, x(i), q, options.degree, i);
    const double r = y(i) - lf.value;
    rss += r * r;
    trace += lf.l_self;
  }
  const double df = static_cast<double>(n) - trace;
  const double sigma2 = df > 1.0 ? std::max(rss, 0.0) / df : 0.0;

  LoessCurve curve;
  curve.span = options.span;
  curve.degree = options.degree;
  curve.sigma2 = sigma2;
  curve.trace_hat = trace;
  curve.grid.resize(options.grid_size);
  curve.mean.resize(options.grid_size);
  curve.se.resize(options.grid_size);
  curve.lo.resize(options.grid_size);
  curve.hi.resize(options.grid_size);
  for (int g = 0; g < options.grid_size; ++g) {
    const double x0 =
        x_min + (x_max - x_min) * static_cast<double>(g) / static_cast<double>(options.grid_size - 1);
    const LocalFit lf = fit_at(x, y, x0, q, options.degree, -1);
    curve.grid(g) = x0;
    curve.mean(g) = lf.value;
    curve.se(g) = std::sqrt(sigma2 * lf.l_sq);
    curve.lo(g) = lf.value - options.z_crit * curve.se(g);
    curve.hi(g) = lf.value + options.z_crit * curve.se(g);
  }
  return curve;
}

}  // namespace decaykit
