#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace decaykit {

/// Average allelic correlation k_ij = (1/m) sum_k x~_ik x~_jk over
/// column-standardized allele counts; the Gram matrix of X~/sqrt(m).
struct KinshipMatrix {
  Eigen::MatrixXd k;
  std::vector<std::string> individual_ids;
};

/// Computes the kinship matrix from a standardized matrix. Rejects input
/// whose column means exceed 1e-6 in absolute value.
KinshipMatrix allelic_kinship(const Eigen::MatrixXd& x_std,
                              std::vector<std::string> individual_ids = {});

/// Mean of k_ij over i in set_a, j in set_b; the sets must be disjoint and
/// nonempty. Symmetric in its set arguments.
double mean_cross_kinship(const KinshipMatrix& kin, const std::vector<int>& set_a,
                          const std::vector<int>& set_b);

/// Squared Euclidean distance between standardized marker profiles i and j.
/// Equals s_ii + s_jj - 2 s_ij for the inner-product matrix s = m*K.
double euclidean_distance_sq(const Eigen::MatrixXd& x_std, Eigen::Index i, Eigen::Index j);

/// CSV export: header row of ids, one row per individual.
void save_kinship_csv(const std::string& path, const KinshipMatrix& kin);

}  // namespace decaykit
