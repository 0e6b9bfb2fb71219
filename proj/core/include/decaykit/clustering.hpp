#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "decaykit/fst.hpp"
#include "decaykit/geno.hpp"

namespace decaykit {

/// A training/target partition of the population with the F_ST between the
/// two sides. Index vectors are kept sorted.
struct PopulationSplit {
  std::vector<int> training;
  std::vector<int> target;
  double fst0 = 0.0;

  std::string to_json_string(const std::vector<std::string>& individual_ids) const;
};

struct KmeansOptions {
  int n_starts = 25;
  int max_iter = 100;
};

// k=2 Lloyd clustering of standardized marker profiles, best of n_starts by
// within-cluster sum of squares. The larger cluster becomes the training
// subsample (size ties go to the cluster holding the lower first index);
// fst0 is estimated between the two sides.
PopulationSplit kmeans_split(const MarkerMatrix& m, const Eigen::MatrixXd& x_std,
                             const KmeansOptions& options, std::uint64_t seed);

// Shrinks the target side to target_n_ta by repeatedly moving the target
// individual whose transfer to training keeps the estimated F_ST largest.
// target_n_ta == |target| is a no-op; fewer than 3 target members are
// rejected (downstream correlations need 3 points).
PopulationSplit rebalance_split(const PopulationSplit& split, const MarkerMatrix& m,
                                int target_n_ta);

}  // namespace decaykit
