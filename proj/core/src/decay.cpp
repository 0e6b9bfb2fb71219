#include "decaykit/decay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "decaykit/csv.hpp"
#include "decaykit/error.hpp"
#include "decaykit/fst.hpp"
#include "decaykit/parallel.hpp"

namespace decaykit {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

PopulationSplit swap_resample(const PopulationSplit& split, int m, Rng& rng) {
  const int n_tr = static_cast<int>(split.training.size());
  const int n_ta = static_cast<int>(split.target.size());
  require(m >= 0, "swap_resample: negative m");
  require(m <= std::min(n_tr, n_ta), "swap_resample: m exceeds the smaller subset");
  PopulationSplit out = split;
  if (m == 0) return out;
  const std::vector<int> from_tr = rng.sample_without_replacement(n_tr, m);
  const std::vector<int> from_ta = rng.sample_without_replacement(n_ta, m);
  for (int k = 0; k < m; ++k) {
    std::swap(out.training[static_cast<std::size_t>(from_tr[static_cast<std::size_t>(k)])],
              out.target[static_cast<std::size_t>(from_ta[static_cast<std::size_t>(k)])]);
  }
  std::sort(out.training.begin(), out.training.end());
  std::sort(out.target.begin(), out.target.end());
  return out;
}

PopulationSplit swap_resample(const PopulationSplit& split, int m, std::uint64_t seed) {
  Rng rng = derive_rng(seed, "swap_resample");
  return swap_resample(split, m, rng);
}

namespace {

struct Replicate {
  double fst = kNaN;
  double rho = kNaN;  // NaN = constant predictions, excluded
  double kbar = kNaN;
};

Replicate evaluate_split(const MarkerMatrix& data, const PhenotypeVector& pheno,
                         const PopulationSplit& sp, const PenaltyChoice& tuned,
                         const Eigen::VectorXd* warm_start, const KinshipMatrix* kinship,
                         double known_fst) {
  Replicate rep;
  rep.fst = std::isnan(known_fst) ? estimate_fst(data, sp.training, sp.target).value : known_fst;

  MarkerMatrix x_tr = data.subset_rows(sp.training);
  PhenotypeVector y_tr;
  y_tr.trait_name = pheno.trait_name;
  y_tr.values.resize(static_cast<Eigen::Index>(sp.training.size()));
  for (std::size_t i = 0; i < sp.training.size(); ++i) {
    y_tr.values(static_cast<Eigen::Index>(i)) = pheno.values(sp.training[i]);
  }
  FitOptions opts;
  opts.warm_start = warm_start;
  const ElasticNetModel model = fit(x_tr, y_tr, tuned.alpha, tuned.lambda, opts);

  const MarkerMatrix x_ta = data.subset_rows(sp.target);
  const Eigen::VectorXd pred = predict(model, x_ta);
  Eigen::VectorXd y_ta(static_cast<Eigen::Index>(sp.target.size()));
  for (std::size_t i = 0; i < sp.target.size(); ++i) {
    y_ta(static_cast<Eigen::Index>(i)) = pheno.values(sp.target[i]);
  }
  const Eigen::VectorXd pc = pred.array() - pred.mean();
  const Eigen::VectorXd tc = y_ta.array() - y_ta.mean();
  const double sp2 = pc.squaredNorm();
  const double st2 = tc.squaredNorm();
  if (sp2 > 0.0 && st2 > 0.0 && pred.size() >= 3) {
    rep.rho = pc.dot(tc) / std::sqrt(sp2 * st2);
  }
  if (kinship) rep.kbar = mean_cross_kinship(*kinship, sp.training, sp.target);
  return rep;
}

}  // namespace

DecayPointSet generate_decay_points(const MarkerMatrix& data, const PhenotypeVector& pheno,
                                    const PopulationSplit& split,
                                    const DecayScheduleParams& params, const PenaltyChoice& tuned,
                                    std::uint64_t seed, int threads,
                                    const KinshipMatrix* kinship) {
  require(params.m_step >= 2 && params.m_step <= 20, "generate_decay_points: m_step outside [2, 20]");
  require(params.n_reps >= 1, "generate_decay_points: n_reps must be positive");
  require(params.fst_stop >= 0.0, "generate_decay_points: fst_stop must be non-negative");
  require(params.max_levels >= 1, "generate_decay_points: max_levels must be positive");
  require(!split.training.empty() && !split.target.empty(),
          "generate_decay_points: empty split side");

  const int min_size = static_cast<int>(std::min(split.training.size(), split.target.size()));
  // keep the schedule at <= max_levels levels over the feasible m range
  int step = params.m_step;
  if (min_size / step > params.max_levels) {
    step = (min_size + params.max_levels - 1) / params.max_levels;
  }

  DecayPointSet out;
  const bool track_kbar = kinship != nullptr;

  // m = 0: the clustered split itself
  const Replicate base =
      evaluate_split(data, pheno, split, tuned, nullptr, kinship, split.fst0);
  if (std::isnan(base.rho)) {
    ++out.n_excluded;
  } else {
    out.points.push_back({0, base.fst, base.rho, 0});
    if (track_kbar) out.kbar.push_back(base.kbar);
  }
  out.m_levels.push_back(0);
  out.level_mean_fst.push_back(base.fst);
  if (base.fst <= params.fst_stop) {
    out.stopped_by_fst = true;
    return out;
  }

  // warm start replicate refits from the m = 0 coefficients
  MarkerMatrix x_tr0 = data.subset_rows(split.training);
  PhenotypeVector y_tr0;
  y_tr0.values.resize(static_cast<Eigen::Index>(split.training.size()));
  for (std::size_t i = 0; i < split.training.size(); ++i) {
    y_tr0.values(static_cast<Eigen::Index>(i)) = pheno.values(split.training[i]);
  }
  const ElasticNetModel base_model = fit(x_tr0, y_tr0, tuned.alpha, tuned.lambda);
  const Eigen::VectorXd warm = base_model.beta;

  for (int m = step; m <= min_size; m += step) {
    std::vector<Replicate> level(static_cast<std::size_t>(params.n_reps));
    parallel_for(static_cast<std::size_t>(params.n_reps), threads, [&](std::size_t r) {
      Rng rng = derive_rng(seed, "decay_swap",
                           {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(r)});
      const PopulationSplit sp = swap_resample(split, m, rng);
      level[r] = evaluate_split(data, pheno, sp, tuned, &warm, kinship, kNaN);
    });
    double fst_sum = 0.0;
    for (int r = 0; r < params.n_reps; ++r) {
      const Replicate& rep = level[static_cast<std::size_t>(r)];
      fst_sum += rep.fst;
      if (std::isnan(rep.rho)) {
        ++out.n_excluded;
        continue;
      }
      out.points.push_back({m, rep.fst, rep.rho, r});
      if (track_kbar) out.kbar.push_back(rep.kbar);
    }
    const double mean_fst = fst_sum / static_cast<double>(params.n_reps);
    out.m_levels.push_back(m);
    out.level_mean_fst.push_back(mean_fst);
    if (mean_fst <= params.fst_stop) {
      out.stopped_by_fst = true;
      break;
    }
  }
  return out;
}

namespace {

Eigen::VectorXd column_of(const std::vector<DecayPoint>& points, bool fst, bool squared) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double raw = fst ? points[i].fst : points[i].rho;
    v(static_cast<Eigen::Index>(i)) = squared ? raw * raw : raw;
  }
  return v;
}

}  // namespace

LineFit linear_fit(const std::vector<DecayPoint>& points) {
  require(points.size() >= 3, "linear_fit: need at least 3 points");
  return ols_fit(column_of(points, true, false), column_of(points, false, false));
}

LineFit quadratic_fit(const std::vector<DecayPoint>& points) {
  require(points.size() >= 3, "quadratic_fit: need at least 3 points");
  return ols_fit(column_of(points, true, true), column_of(points, false, true));
}

DecayCurve build_decay_curve(DecayPointSet points, const LoessOptions& loess_options) {
  DecayCurve curve;
  curve.data = std::move(points);
  const auto& pts = curve.data.points;
  if (pts.size() >= 3) {
    const Eigen::VectorXd fst = column_of(pts, true, false);
    if ((fst.array() - fst(0)).abs().maxCoeff() > 0.0) {
      curve.linear = linear_fit(pts);
      curve.quadratic = quadratic_fit(pts);
      curve.has_fits = true;
      if (pts.size() >= 10) {
        curve.loess = loess_fit(fst, column_of(pts, false, false), loess_options);
        curve.has_loess = true;
      }
    }
  }
  return curve;
}

std::optional<double> evaluate_rho_d(const DecayCurve& curve, double fst_query, double window) {
  double sum = 0.0;
  int count = 0;
  for (const DecayPoint& p : curve.data.points) {
    if (std::fabs(p.fst - fst_query) <= window) {
      sum += p.rho;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

double compare_r2_permutation(const std::vector<double>& r2_linear_set,
                              const std::vector<double>& r2_quadratic_set, int n_perm,
                              std::uint64_t seed) {
  return permutation_mean_test(r2_linear_set, r2_quadratic_set, n_perm, seed);
}

CorrelationTest fst_kinship_diagnostics(const Eigen::VectorXd& fst, const Eigen::VectorXd& kbar) {
  return correlation_t_test(fst, kbar);
}

std::vector<DiagnosticsResult> fst_kinship_batch(
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& datasets) {
  std::vector<DiagnosticsResult> out(datasets.size());
  std::vector<double> pvals;
  pvals.reserve(datasets.size());
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    out[d].test = fst_kinship_diagnostics(datasets[d].first, datasets[d].second);
    pvals.push_back(out[d].test.p);
  }
  const std::vector<double> adjusted = bh_adjust(pvals);
  for (std::size_t d = 0; d < datasets.size(); ++d) out[d].p_adjusted = adjusted[d];
  return out;
}

void write_decay_points_csv(const std::string& path, const DecayPointSet& points) {
  CsvTable table;
  table.header = {"m", "replicate", "fst", "rho"};
  table.rows.reserve(points.points.size());
  for (const DecayPoint& p : points.points) {
    table.rows.push_back({std::to_string(p.m_swapped), std::to_string(p.replicate),
                          format_double(p.fst), format_double(p.rho)});
  }
  write_csv(path, table);
}

std::string decay_curve_to_json(const DecayCurve& curve) {
  nlohmann::json j;
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t i = 0; i < curve.data.points.size(); ++i) {
    const DecayPoint& p = curve.data.points[i];
    nlohmann::json jp{{"m", p.m_swapped},
                      {"replicate", p.replicate},
                      {"fst", p.fst},
                      {"rho", p.rho}};
    if (!curve.data.kbar.empty()) jp["kbar"] = curve.data.kbar[i];
    points.push_back(std::move(jp));
  }
  j["points"] = std::move(points);
  j["n_excluded"] = curve.data.n_excluded;
  j["m_levels"] = curve.data.m_levels;
  j["level_mean_fst"] = curve.data.level_mean_fst;
  j["stopped_by_fst"] = curve.data.stopped_by_fst;
  if (curve.has_fits) {
    j["linear"] = {{"intercept", curve.linear.intercept},
                   {"slope", curve.linear.slope},
                   {"r2", curve.linear.r2}};
    j["quadratic"] = {{"intercept", curve.quadratic.intercept},
                      {"slope", curve.quadratic.slope},
                      {"r2", curve.quadratic.r2}};
  }
  if (curve.has_loess) {
    nlohmann::json grid = nlohmann::json::array();
    for (Eigen::Index g = 0; g < curve.loess.grid.size(); ++g) {
      grid.push_back({{"fst", curve.loess.grid(g)},
                      {"mean", curve.loess.mean(g)},
                      {"lo", curve.loess.lo(g)},
                      {"hi", curve.loess.hi(g)}});
    }
    j["loess"] = {{"span", curve.loess.span},
                  {"degree", curve.loess.degree},
                  {"sigma2", curve.loess.sigma2},
                  {"grid", std::move(grid)}};
  }
  if (!curve.data.kbar.empty() && curve.data.points.size() >= 4) {
    Eigen::VectorXd fst(static_cast<Eigen::Index>(curve.data.points.size()));
    Eigen::VectorXd kbar(static_cast<Eigen::Index>(curve.data.points.size()));
    for (std::size_t i = 0; i < curve.data.points.size(); ++i) {
      fst(static_cast<Eigen::Index>(i)) = curve.data.points[i].fst;
      kbar(static_cast<Eigen::Index>(i)) = curve.data.kbar[i];
    }
    const CorrelationTest test = fst_kinship_diagnostics(fst, kbar);
    j["fst_kinship"] = {{"correlation", test.r},
                        {"t", test.t},
                        {"p", test.p},
                        {"n", test.n},
                        {"degenerate", test.degenerate}};
  }
  return j.dump(2) + "\n";
}

}  // namespace decaykit
