#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace decaykit {

// Allele-count matrix (individuals x markers). Entries are 0, 1, 2 or NaN
// for missing. All estimators downstream of QC assume a complete matrix.
struct MarkerMatrix {
  Eigen::MatrixXd counts;
  std::vector<std::string> marker_ids;
  std::vector<std::string> individual_ids;

  Eigen::Index n() const { return counts.rows(); }
  Eigen::Index m() const { return counts.cols(); }
  static bool is_missing(double v) { return std::isnan(v); }
  Eigen::Index n_missing() const;
  bool has_missing() const { return counts.hasNaN(); }

  /// Checks shape/id/entry invariants; throws Error with the offending
  /// marker or individual named.
  void validate() const;

  /// Rows selected by index, ids carried along.
  MarkerMatrix subset_rows(const std::vector<int>& rows) const;
};

struct PhenotypeVector {
  Eigen::VectorXd values;
  std::string trait_name;
};

struct QCReport {
  std::vector<std::string> removed_maf;
  std::vector<std::string> removed_missing;
  std::vector<std::string> removed_ld;
  std::int64_t imputed_cells = 0;

  std::string to_json_string() const;
};

/// Genotype CSV: header `id,<marker1>,...`; one row per individual; empty
/// cell or NA means missing. Phenotype CSV: `id,value`, ids matching the
/// genotype file.
std::pair<MarkerMatrix, std::optional<PhenotypeVector>> load_dataset(
    const std::string& genotype_path, const std::optional<std::string>& phenotype_path);

MarkerMatrix load_genotypes(const std::string& path);
PhenotypeVector load_phenotypes(const std::string& path, const MarkerMatrix& aligned_to);
void save_genotypes(const std::string& path, const MarkerMatrix& m);
void save_phenotypes(const std::string& path, const MarkerMatrix& m, const PhenotypeVector& y);

struct QcParams {
  double maf_min = 0.01;      // drop markers with MAF strictly below
  double missing_max = 0.20;  // drop markers with missing fraction strictly above
  double ld_r_max = 0.95;     // drop later marker of pairs with |r| strictly above
  int knn_k = 10;             // neighbours for marker-wise kNN imputation
};

// Order: MAF filter, missingness filter, kNN imputation, LD pruning. Output
// has no missing cells; imputed values are rounded back to {0,1,2}. The
// pipeline is deterministic; `seed` is accepted for interface uniformity.
std::pair<MarkerMatrix, QCReport> qc_pipeline(const MarkerMatrix& m, const QcParams& params = {},
                                              std::uint64_t seed = 0);

/// Column-standardizes to mean 0, sd 1 (n-1 denominator). Requires a complete
/// matrix; throws Error naming the first zero-variance marker.
Eigen::MatrixXd standardize(const MarkerMatrix& m);

}  // namespace decaykit
