#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "decaykit/geno.hpp"

namespace decaykit {

// Per-marker summary feeding the Beta-Binomial likelihood: training
// ("ancestral") reference-allele frequencies, target reference-allele counts
// and target allele totals. Markers monomorphic in training carry no
// information about drift and are excluded when the set is built.
struct AlleleFrequencySet {
  Eigen::VectorXd p;       // in (0, 1)
  Eigen::VectorXd counts;  // 0 <= counts_k <= sizes_k
  Eigen::VectorXd sizes;   // 2 x target individuals genotyped at marker k
};

struct FstEstimate {
  double value = 0.0;
  double loglik = 0.0;
  int n_markers_used = 0;
};

struct FstBounds {
  double lo = 1e-6;
  double hi = 0.5;
};

/// Reference-allele frequencies of a row subset: sum of counts / (2*|subset|).
/// The subset must be complete (no missing cells).
Eigen::VectorXd allele_frequencies(const MarkerMatrix& m, const std::vector<int>& subset);

AlleleFrequencySet build_allele_frequency_set(const MarkerMatrix& m,
                                              const std::vector<int>& training,
                                              const std::vector<int>& target);

/// Variant with fixed ancestral frequencies (one per target marker column);
/// used when training and target live in separate matrices.
AlleleFrequencySet build_allele_frequency_set(const Eigen::VectorXd& ancestral_freqs,
                                              const MarkerMatrix& target);

// Balding-Nichols Beta-Binomial log-likelihood of the target counts as a
// function of F: marker k contributes ln BetaBin(c_k | s_k, a_k, b_k) with
// a_k = p_k(1-F)/F, b_k = (1-p_k)(1-F)/F. Markers are grouped by identical
// (p, c, s) so repeated evaluation (grid searches, Brent) stays cheap.
class BetaBinomialLoglik {
 public:
  explicit BetaBinomialLoglik(const AlleleFrequencySet& afs);

  double operator()(double f) const;
  int n_markers_used() const { return n_used_; }

 private:
  struct Group {
    double c;       // target count
    double s_gap;   // s - c
    double weight;  // number of markers with this (p, c, s)
    int p_index;
    int s_index;
  };
  std::vector<Group> groups_;
  std::vector<double> distinct_p_;
  std::vector<double> distinct_s_;
  double const_term_ = 0.0;  // sum of w * ln C(s, c)
  double total_weight_ = 0.0;
  int n_used_ = 0;
};

/// One-shot evaluation (see BetaBinomialLoglik for repeated use).
double betabinomial_loglik(const AlleleFrequencySet& afs, double f);

/// Maximum-likelihood F_ST of the target relative to the training population,
/// Brent search over [bounds.lo, bounds.hi]. Requires at least 10 markers
/// polymorphic in training.
FstEstimate estimate_fst(const AlleleFrequencySet& afs, const FstBounds& bounds = {});
FstEstimate estimate_fst(const MarkerMatrix& m, const std::vector<int>& training,
                         const std::vector<int>& target, const FstBounds& bounds = {});

}  // namespace decaykit
