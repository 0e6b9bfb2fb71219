#include "decaykit/fst.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <unordered_set>

#include "decaykit/error.hpp"
#include "decaykit/optimize.hpp"

namespace decaykit {

Eigen::VectorXd allele_frequencies(const MarkerMatrix& m, const std::vector<int>& subset) {
  require(!subset.empty(), "allele_frequencies: empty subset");
  Eigen::VectorXd freq(m.m());
  const double denom = 2.0 * static_cast<double>(subset.size());
  for (Eigen::Index j = 0; j < m.m(); ++j) {
    double sum = 0.0;
    for (const int i : subset) {
      require(i >= 0 && i < m.n(), "allele_frequencies: index out of range");
      const double v = m.counts(i, j);
      require(!std::isnan(v), "allele_frequencies: missing cell at marker " +
                                  m.marker_ids[static_cast<std::size_t>(j)]);
      sum += v;
    }
    freq(j) = sum / denom;
  }
  return freq;
}

AlleleFrequencySet build_allele_frequency_set(const MarkerMatrix& m,
                                              const std::vector<int>& training,
                                              const std::vector<int>& target) {
  require(!training.empty() && !target.empty(), "build_allele_frequency_set: empty set");
  {
    std::unordered_set<int> tr(training.begin(), training.end());
    for (const int i : target) {
      require(!tr.count(i), "build_allele_frequency_set: training and target overlap at index " +
                                std::to_string(i));
    }
  }
  const Eigen::VectorXd p = allele_frequencies(m, training);

  AlleleFrequencySet afs;
  std::vector<double> keep_p, keep_c, keep_s;
  for (Eigen::Index j = 0; j < m.m(); ++j) {
    if (p(j) <= 0.0 || p(j) >= 1.0) continue;  // monomorphic in training
    double c = 0.0;
    double n_obs = 0.0;
    for (const int i : target) {
      require(i >= 0 && i < m.n(), "build_allele_frequency_set: index out of range");
      const double v = m.counts(i, j);
      if (std::isnan(v)) continue;
      c += v;
      n_obs += 1.0;
    }
    if (n_obs == 0.0) continue;
    keep_p.push_back(p(j));
    keep_c.push_back(c);
    keep_s.push_back(2.0 * n_obs);
  }
  afs.p = Eigen::Map<Eigen::VectorXd>(keep_p.data(), static_cast<Eigen::Index>(keep_p.size()));
  afs.counts = Eigen::Map<Eigen::VectorXd>(keep_c.data(), static_cast<Eigen::Index>(keep_c.size()));
  afs.sizes = Eigen::Map<Eigen::VectorXd>(keep_s.data(), static_cast<Eigen::Index>(keep_s.size()));
  return afs;
}

AlleleFrequencySet build_allele_frequency_set(const Eigen::VectorXd& ancestral_freqs,
                                              const MarkerMatrix& target) {
  require(ancestral_freqs.size() == target.m(),
          "build_allele_frequency_set: frequency vector does not match markers");
  std::vector<double> keep_p, keep_c, keep_s;
  for (Eigen::Index j = 0; j < target.m(); ++j) {
    if (ancestral_freqs(j) <= 0.0 || ancestral_freqs(j) >= 1.0) continue;
    double c = 0.0;
    double n_obs = 0.0;
    for (Eigen::Index i = 0; i < target.n(); ++i) {
      const double v = target.counts(i, j);
      if (std::isnan(v)) continue;
      c += v;
      n_obs += 1.0;
    }
    if (n_obs == 0.0) continue;
    keep_p.push_back(ancestral_freqs(j));
    keep_c.push_back(c);
    keep_s.push_back(2.0 * n_obs);
  }
  AlleleFrequencySet afs;
  afs.p = Eigen::Map<Eigen::VectorXd>(keep_p.data(), static_cast<Eigen::Index>(keep_p.size()));
  afs.counts = Eigen::Map<Eigen::VectorXd>(keep_c.data(), static_cast<Eigen::Index>(keep_c.size()));
  afs.sizes = Eigen::Map<Eigen::VectorXd>(keep_s.data(), static_cast<Eigen::Index>(keep_s.size()));
  return afs;
}

BetaBinomialLoglik::BetaBinomialLoglik(const AlleleFrequencySet& afs) {
  require(afs.p.size() == afs.counts.size() && afs.p.size() == afs.sizes.size(),
          "BetaBinomialLoglik: field length mismatch");
  std::map<std::tuple<double, double, double>, double> weight_of;
  for (Eigen::Index k = 0; k < afs.p.size(); ++k) {
    const double p = afs.p(k);
    const double c = afs.counts(k);
    const double s = afs.sizes(k);
    if (p <= 0.0 || p >= 1.0) continue;
    require(c >= 0.0 && c <= s && s > 0.0, "BetaBinomialLoglik: invalid counts at marker " +
                                               std::to_string(k));
    weight_of[{p, c, s}] += 1.0;
    ++n_used_;
  }
  require(n_used_ > 0, "BetaBinomialLoglik: no usable markers (all monomorphic in training)");

  std::map<double, int> p_index, s_index;
  for (const auto& [key, w] : weight_of) {
    p_index.emplace(std::get<0>(key), 0);
    s_index.emplace(std::get<2>(key), 0);
  }
  distinct_p_.reserve(p_index.size());
  for (auto& [p, idx] : p_index) {
    idx = static_cast<int>(distinct_p_.size());
    distinct_p_.push_back(p);
  }
  distinct_s_.reserve(s_index.size());
  for (auto& [s, idx] : s_index) {
    idx = static_cast<int>(distinct_s_.size());
    distinct_s_.push_back(s);
  }
  groups_.reserve(weight_of.size());
  for (const auto& [key, w] : weight_of) {
    const auto [p, c, s] = key;
    Group g;
    g.c = c;
    g.s_gap = s - c;
    g.weight = w;
    g.p_index = p_index[p];
    g.s_index = s_index[s];
    groups_.push_back(g);
    // ln C(s, c), constant in f
    const_term_ += w * (std::lgamma(s + 1.0) - std::lgamma(c + 1.0) - std::lgamma(s - c + 1.0));
    total_weight_ += w;
  }
}

double BetaBinomialLoglik::operator()(double f) const {
  require(f > 0.0 && f < 1.0, "betabinomial_loglik: f must lie in (0, 1)");
  const double g = (1.0 - f) / f;  // a_k + b_k, shared by all markers
  const double lgamma_g = std::lgamma(g);

  thread_local std::vector<double> lg_a, lg_b, lg_sg;
  lg_a.resize(distinct_p_.size());
  lg_b.resize(distinct_p_.size());
  for (std::size_t i = 0; i < distinct_p_.size(); ++i) {
    lg_a[i] = std::lgamma(distinct_p_[i] * g);
    lg_b[i] = std::lgamma((1.0 - distinct_p_[i]) * g);
  }
  lg_sg.resize(distinct_s_.size());
  for (std::size_t i = 0; i < distinct_s_.size(); ++i) {
    lg_sg[i] = std::lgamma(distinct_s_[i] + g);
  }

  double sum = const_term_ + total_weight_ * lgamma_g;
  for (const Group& grp : groups_) {
    const double a = distinct_p_[static_cast<std::size_t>(grp.p_index)] * g;
    const double b = (1.0 - distinct_p_[static_cast<std::size_t>(grp.p_index)]) * g;
    sum += grp.weight *
           (std::lgamma(grp.c + a) + std::lgamma(grp.s_gap + b) -
            lg_a[static_cast<std::size_t>(grp.p_index)] -
            lg_b[static_cast<std::size_t>(grp.p_index)] -
            lg_sg[static_cast<std::size_t>(grp.s_index)]);
  }
  return sum;
}

double betabinomial_loglik(const AlleleFrequencySet& afs, double f) {
  return BetaBinomialLoglik(afs)(f);
}

FstEstimate estimate_fst(const AlleleFrequencySet& afs, const FstBounds& bounds) {
  require(bounds.lo > 0.0 && bounds.hi < 1.0 && bounds.lo < bounds.hi,
          "estimate_fst: bounds must satisfy 0 < lo < hi < 1");
  const BetaBinomialLoglik loglik(afs);
  require(loglik.n_markers_used() >= 10,
          "estimate_fst: fewer than 10 polymorphic markers (" +
              std::to_string(loglik.n_markers_used()) + ")");
  const auto [f_hat, ll] = brent_maximize(loglik, bounds.lo, bounds.hi, 1e-7);
  FstEstimate out;
  out.value = std::clamp(f_hat, bounds.lo, bounds.hi);
  out.loglik = ll;
  out.n_markers_used = loglik.n_markers_used();
  return out;
}

FstEstimate estimate_fst(const MarkerMatrix& m, const std::vector<int>& training,
                         const std::vector<int>& target, const FstBounds& bounds) {
  return estimate_fst(build_allele_frequency_set(m, training, target), bounds);
}

}  // namespace decaykit
