#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "decaykit/clustering.hpp"
#include "decaykit/elastic_net.hpp"
#include "decaykit/geno.hpp"
#include "decaykit/kinship.hpp"
#include "decaykit/loess.hpp"
#include "decaykit/rng.hpp"
#include "decaykit/stats.hpp"

namespace decaykit {

/// One swap-resampled observation: F_ST between the resampled subsets and the
/// predictive correlation of a model refit on the resampled training side.
struct DecayPoint {
  int m_swapped = 0;
  double fst = 0.0;
  double rho = 0.0;
  int replicate = 0;
};

struct DecayPointSet {
  std::vector<DecayPoint> points;
  std::vector<double> kbar;  // mean cross-kinship per point; empty when not requested
  int n_excluded = 0;        // replicates dropped for constant predictions
  std::vector<int> m_levels;
  std::vector<double> level_mean_fst;  // over all replicates of the level
  bool stopped_by_fst = false;
};

/// Exchanges m uniformly chosen individuals between the two sides; sizes are
/// preserved and index vectors stay sorted.
PopulationSplit swap_resample(const PopulationSplit& split, int m, Rng& rng);
PopulationSplit swap_resample(const PopulationSplit& split, int m, std::uint64_t seed);

struct PenaltyChoice {
  double alpha = 1.0;
  double lambda = 0.0;
};

inline PenaltyChoice penalty_from(const CVResult& cv) { return {cv.best_alpha, cv.best_lambda}; }

struct DecayScheduleParams {
  int m_step = 2;          // must lie in [2, 20]; escalated so levels stay bounded
  int n_reps = 40;
  double fst_stop = 0.005;
  int max_levels = 30;
};

// Swap-resampling schedule: the m = 0 point once, then n_reps replicates per
// m level (m_step, 2*m_step, ...) until the level's mean F_ST drops to
// fst_stop or m would exceed the smaller subset. Coefficients are refit at
// the fixed tuned penalty for every replicate; replicates whose predictions
// are constant are excluded and counted. Pass the population kinship matrix
// to record mean cross-kinship per point.
DecayPointSet generate_decay_points(const MarkerMatrix& data, const PhenotypeVector& pheno,
                                    const PopulationSplit& split,
                                    const DecayScheduleParams& params, const PenaltyChoice& tuned,
                                    std::uint64_t seed, int threads = 0,
                                    const KinshipMatrix* kinship = nullptr);

/// OLS of rho on fst (the linear decay approximation rho_L).
LineFit linear_fit(const std::vector<DecayPoint>& points);
/// OLS of rho^2 on fst^2.
LineFit quadratic_fit(const std::vector<DecayPoint>& points);

struct DecayCurve {
  DecayPointSet data;
  bool has_loess = false;
  LoessCurve loess;
  bool has_fits = false;
  LineFit linear;
  LineFit quadratic;
};

/// Fits LOESS and the linear/quadratic regressions on the points; smoothing
/// is skipped (flagged) when there are too few points or no fst spread.
DecayCurve build_decay_curve(DecayPointSet points, const LoessOptions& loess_options = {});

/// Mean rho over points with |fst - fst_query| <= window; absent when no
/// point falls inside the window.
std::optional<double> evaluate_rho_d(const DecayCurve& curve, double fst_query,
                                     double window = 0.01);

/// Permutation two-sample t-test between R2_LINEAR and R2_QUADRATIC samples.
double compare_r2_permutation(const std::vector<double>& r2_linear_set,
                              const std::vector<double>& r2_quadratic_set, int n_perm,
                              std::uint64_t seed);

/// Exact t-test of the correlation between paired (fst, kbar) observations.
CorrelationTest fst_kinship_diagnostics(const Eigen::VectorXd& fst, const Eigen::VectorXd& kbar);

struct DiagnosticsResult {
  CorrelationTest test;
  double p_adjusted = 1.0;
};

/// Batch diagnostics over several datasets with Benjamini-Hochberg adjustment
/// across them.
std::vector<DiagnosticsResult> fst_kinship_batch(
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& datasets);

/// CSV with header `m,replicate,fst,rho`.
void write_decay_points_csv(const std::string& path, const DecayPointSet& points);

/// Curve summary JSON: linear/quadratic fits with R2, LOESS grid with the
/// confidence band, points, exclusion counts and kinship diagnostics.
std::string decay_curve_to_json(const DecayCurve& curve);

}  // namespace decaykit
