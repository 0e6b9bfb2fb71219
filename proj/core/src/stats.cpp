#include "decaykit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "decaykit/error.hpp"
#include "decaykit/rng.hpp"

namespace decaykit {

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  require(a.size() == b.size(), "pearson: length mismatch");
  require(a.size() >= 3, "pearson: need at least 3 observations");
  const double ma = a.mean();
  const double mb = b.mean();
  const Eigen::VectorXd da = a.array() - ma;
  const Eigen::VectorXd db = b.array() - mb;
  const double sa = da.squaredNorm();
  const double sb = db.squaredNorm();
  require(sa > 0.0 && sb > 0.0, "pearson: correlation undefined for constant input");
  return da.dot(db) / std::sqrt(sa * sb);
}

Interval fisher_z_interval(double r, int n, double z_crit) {
  require(n >= 4, "fisher_z_interval: need n >= 4");
  const double r_clamped = std::clamp(r, -0.999999999, 0.999999999);
  const double z = std::atanh(r_clamped);
  const double se = 1.0 / std::sqrt(static_cast<double>(n - 3));
  return {std::tanh(z - z_crit * se), std::tanh(z + z_crit * se)};
}

LineFit ols_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  require(x.size() == y.size(), "ols_fit: length mismatch");
  require(x.size() >= 3, "ols_fit: need at least 3 points");
  const double mx = x.mean();
  const double my = y.mean();
  const Eigen::VectorXd dx = x.array() - mx;
  const Eigen::VectorXd dy = y.array() - my;
  const double sxx = dx.squaredNorm();
  require(sxx > 0.0, "ols_fit: regressor is constant");
  LineFit fit;
  fit.slope = dx.dot(dy) / sxx;
  fit.intercept = my - fit.slope * mx;
  const double syy = dy.squaredNorm();
  if (syy == 0.0) {
    fit.r2 = 1.0;  // y constant and exactly reproduced by the flat line
  } else {
    const Eigen::VectorXd resid = dy - fit.slope * dx;
    fit.r2 = 1.0 - resid.squaredNorm() / syy;
    fit.r2 = std::clamp(fit.r2, 0.0, 1.0);
  }
  return fit;
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  require(a > 0.0 && b > 0.0, "incomplete_beta: a, b must be positive");
  require(x >= 0.0 && x <= 1.0, "incomplete_beta: x outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  require(df > 0.0, "student_t_two_sided_p: df must be positive");
  if (!std::isfinite(t)) return 0.0;
  const double x = df / (df + t * t);
  return incomplete_beta(0.5 * df, 0.5, x);
}

CorrelationTest correlation_t_test(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  require(x.size() == y.size(), "correlation_t_test: length mismatch");
  require(x.size() >= 4, "correlation_t_test: need at least 4 pairs");
  CorrelationTest out;
  out.n = static_cast<int>(x.size());
  out.r = pearson(x, y);
  const double df = static_cast<double>(out.n - 2);
  const double denom = 1.0 - out.r * out.r;
  if (denom <= 0.0) {
    out.degenerate = true;
    out.t = std::numeric_limits<double>::infinity() * (out.r >= 0 ? 1.0 : -1.0);
    out.p = 0.0;
    return out;
  }
  out.t = out.r * std::sqrt(df / denom);
  out.p = student_t_two_sided_p(out.t, df);
  return out;
}

std::vector<double> bh_adjust(const std::vector<double>& p) {
  const std::size_t n = p.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&p](std::size_t i, std::size_t j) { return p[i] < p[j]; });
  std::vector<double> adjusted(n);
  double running_min = 1.0;
  for (std::size_t k = n; k-- > 0;) {
    const double candidate = p[order[k]] * static_cast<double>(n) / static_cast<double>(k + 1);
    running_min = std::min(running_min, candidate);
    adjusted[order[k]] = std::min(running_min, 1.0);
  }
  return adjusted;
}

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// C(n, k) capped so the caller can compare against n_perm without overflow.
std::uint64_t choose_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    if (result > cap) return cap + 1;
    result = result * (n - k + i) / i;
  }
  return result;
}

}  // namespace

double permutation_mean_test(const std::vector<double>& a, const std::vector<double>& b,
                             int n_perm, std::uint64_t seed) {
  require(!a.empty() && !b.empty(), "permutation_mean_test: empty group");
  require(n_perm >= 100, "permutation_mean_test: n_perm must be at least 100");
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  const std::size_t n = na + nb;
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double total = std::accumulate(pooled.begin(), pooled.end(), 0.0);
  const double obs = std::fabs(mean_of(a) - mean_of(b));

  // stat for a given group-A sum: |sum_a/na - (total - sum_a)/nb|
  auto stat_from_sum_a = [&](double sum_a) {
    return std::fabs(sum_a / static_cast<double>(na) -
                     (total - sum_a) / static_cast<double>(nb));
  };

  const std::uint64_t n_assignments =
      choose_capped(n, na, static_cast<std::uint64_t>(n_perm));
  if (n_assignments <= static_cast<std::uint64_t>(n_perm)) {
    // Exhaustive enumeration of k-subsets in lexicographic order.
    std::vector<std::size_t> comb(na);
    std::iota(comb.begin(), comb.end(), std::size_t{0});
    std::uint64_t hits = 0;
    std::uint64_t count = 0;
    for (;;) {
      double sum_a = 0.0;
      for (const std::size_t i : comb) sum_a += pooled[i];
      if (stat_from_sum_a(sum_a) >= obs) ++hits;
      ++count;
      // next combination
      std::size_t i = na;
      while (i > 0 && comb[i - 1] == n - na + (i - 1)) --i;
      if (i == 0) break;
      ++comb[i - 1];
      for (std::size_t j = i; j < na; ++j) comb[j] = comb[j - 1] + 1;
    }
    return static_cast<double>(hits) / static_cast<double>(count);
  }

  Rng rng = derive_rng(seed, "permutation_mean_test");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::uint64_t hits = 0;
  for (int perm = 0; perm < n_perm; ++perm) {
    // partial Fisher-Yates: first na entries form group A
    for (std::size_t i = 0; i < na; ++i) {
      const auto j = static_cast<std::size_t>(
          rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n) - 1));
      std::swap(idx[i], idx[j]);
    }
    double sum_a = 0.0;
    for (std::size_t i = 0; i < na; ++i) sum_a += pooled[idx[i]];
    if (stat_from_sum_a(sum_a) >= obs) ++hits;
  }
  return static_cast<double>(1 + hits) / static_cast<double>(n_perm + 1);
}

}  // namespace decaykit
