#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "decaykit/decay.hpp"
#include "decaykit/geno.hpp"

namespace decaykit {

struct HoldoutResult {
  int replicate = 0;
  double fst = 0.0;
  double rho_cv = 0.0;  // NaN when predictions were constant
  int n_tr = 0;
  int n_ta = 0;
};

// Hold-out cross-validation baseline: n_reps random disjoint splits of fixed
// sizes; each refits at the tuned penalty, predicts the target side and
// records the split's F_ST alongside rho_CV.
std::vector<HoldoutResult> holdout_cv(const MarkerMatrix& data, const PhenotypeVector& pheno,
                                      int n_tr, int n_ta, int n_reps, const PenaltyChoice& tuned,
                                      std::uint64_t seed, int threads = 0);

/// CSV with header `replicate,fst,rho_cv`.
void write_holdout_csv(const std::string& path, const std::vector<HoldoutResult>& results);

}  // namespace decaykit
