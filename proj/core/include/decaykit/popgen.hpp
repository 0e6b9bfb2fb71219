#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "decaykit/geno.hpp"
#include "decaykit/rng.hpp"

namespace decaykit {

// Balding-Nichols synthetic populations used by the cross-population
// simulator and the test fixtures: a derived population's allele frequency
// is Beta(p(1-F)/F, (1-p)(1-F)/F) around the ancestral frequency p.

inline Eigen::VectorXd random_ancestral_freqs(Eigen::Index m, Rng& rng, double lo = 0.1,
                                              double hi = 0.9) {
  Eigen::VectorXd p(m);
  for (Eigen::Index k = 0; k < m; ++k) p(k) = rng.uniform(lo, hi);
  return p;
}

inline Eigen::VectorXd balding_nichols_freqs(const Eigen::VectorXd& p, double f, Rng& rng) {
  Eigen::VectorXd q(p.size());
  const double g = (1.0 - f) / f;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    q(k) = rng.beta(p(k) * g, (1.0 - p(k)) * g);
  }
  return q;
}

/// Diploid genotypes drawn Binomial(2, freq_k) per marker.
inline MarkerMatrix genotypes_from_freqs(Eigen::Index n, const Eigen::VectorXd& freqs, Rng& rng,
                                         const std::string& id_prefix = "ind") {
  MarkerMatrix out;
  out.counts.resize(n, freqs.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    out.individual_ids.push_back(id_prefix + std::to_string(i));
    for (Eigen::Index k = 0; k < freqs.size(); ++k) {
      out.counts(i, k) = static_cast<double>(rng.binomial(2, freqs(k)));
    }
  }
  for (Eigen::Index k = 0; k < freqs.size(); ++k) {
    out.marker_ids.push_back("m" + std::to_string(k));
  }
  return out;
}

struct TwoPopulationFixture {
  MarkerMatrix combined;       // population A rows first, then population B
  std::vector<int> labels;     // 0 = A (ancestral-like), 1 = B (drifted)
  std::vector<int> pop_a;      // row indices
  std::vector<int> pop_b;
};

/// Population A sampled at the ancestral frequencies, population B at
/// Balding-Nichols frequencies drifted by true_f.
inline TwoPopulationFixture make_two_population_fixture(Eigen::Index n_a, Eigen::Index n_b,
                                                        Eigen::Index m, double true_f,
                                                        std::uint64_t seed) {
  Rng rng = derive_rng(seed, "two_population_fixture");
  const Eigen::VectorXd p = random_ancestral_freqs(m, rng);
  const Eigen::VectorXd q = balding_nichols_freqs(p, true_f, rng);
  TwoPopulationFixture fx;
  const MarkerMatrix a = genotypes_from_freqs(n_a, p, rng, "a");
  const MarkerMatrix b = genotypes_from_freqs(n_b, q, rng, "b");
  fx.combined.counts.resize(n_a + n_b, m);
  fx.combined.counts.topRows(n_a) = a.counts;
  fx.combined.counts.bottomRows(n_b) = b.counts;
  fx.combined.marker_ids = a.marker_ids;
  fx.combined.individual_ids = a.individual_ids;
  fx.combined.individual_ids.insert(fx.combined.individual_ids.end(), b.individual_ids.begin(),
                                    b.individual_ids.end());
  fx.labels.assign(static_cast<std::size_t>(n_a + n_b), 0);
  for (Eigen::Index i = 0; i < n_a; ++i) fx.pop_a.push_back(static_cast<int>(i));
  for (Eigen::Index i = 0; i < n_b; ++i) {
    fx.labels[static_cast<std::size_t>(n_a + i)] = 1;
    fx.pop_b.push_back(static_cast<int>(n_a + i));
  }
  return fx;
}

}  // namespace decaykit
