#include "pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>

#include "json.hpp"

#include "decaykit/csv.hpp"
#include "decaykit/decay.hpp"
#include "decaykit/error.hpp"
#include "decaykit/fst.hpp"
#include "decaykit/holdout.hpp"
#include "decaykit/kinship.hpp"
#include "decaykit/plot.hpp"
#include "decaykit/popgen.hpp"
#include "decaykit/sim.hpp"
#include "decaykit/stats.hpp"

namespace decaykit::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, "cannot create output directory: " + dir);
}

std::pair<MarkerMatrix, PhenotypeVector> load_complete_dataset(const RunConfig& cfg) {
  require(!cfg.genotype_path.empty(), "a genotype file is required (config key 'genotype')");
  require(!cfg.phenotype_path.empty(), "a phenotype file is required (config key 'phenotype')");
  auto [geno, pheno] = load_dataset(cfg.genotype_path, cfg.phenotype_path);
  require(!geno.has_missing(),
          "genotypes contain missing cells; run `decaykit preprocess` first");
  return {std::move(geno), std::move(*pheno)};
}

/// Markers that carry no variation break standardization; they are dropped
/// from analysis inputs with a note on stderr.
MarkerMatrix drop_zero_variance(const MarkerMatrix& m) {
  std::vector<bool> keep(static_cast<std::size_t>(m.m()), true);
  Eigen::Index dropped = 0;
  for (Eigen::Index j = 0; j < m.m(); ++j) {
    const double first = m.counts(0, j);
    bool constant = true;
    for (Eigen::Index i = 1; i < m.n() && constant; ++i) constant = m.counts(i, j) == first;
    if (constant) {
      keep[static_cast<std::size_t>(j)] = false;
      ++dropped;
    }
  }
  if (dropped == 0) return m;
  std::cerr << "note: dropping " << dropped << " monomorphic markers\n";
  MarkerMatrix out;
  out.individual_ids = m.individual_ids;
  out.counts.resize(m.n(), m.m() - dropped);
  Eigen::Index c = 0;
  for (Eigen::Index j = 0; j < m.m(); ++j) {
    if (!keep[static_cast<std::size_t>(j)]) continue;
    out.counts.col(c++) = m.counts.col(j);
    out.marker_ids.push_back(m.marker_ids[static_cast<std::size_t>(j)]);
  }
  return out;
}

PhenotypeVector subset_pheno(const PhenotypeVector& y, const std::vector<int>& rows) {
  PhenotypeVector out;
  out.trait_name = y.trait_name;
  out.values.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.values(static_cast<Eigen::Index>(i)) = y.values(rows[i]);
  }
  return out;
}

std::string cv_result_to_json(const CVResult& cv) {
  nlohmann::json j;
  j["best_alpha"] = cv.best_alpha;
  j["best_lambda"] = cv.best_lambda;
  j["best_mean_rho"] = cv.best_mean_rho;
  j["n_runs"] = cv.n_runs;
  j["n_folds"] = cv.n_folds;
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& cell : cv.grid) {
    grid.push_back({{"alpha", cell.alpha},
                    {"lambda", cell.lambda},
                    {"mean_rho", std::isnan(cell.mean_rho)
                                     ? nlohmann::json()
                                     : nlohmann::json(cell.mean_rho)}});
  }
  j["grid"] = std::move(grid);
  return j.dump(2) + "\n";
}

struct DecayArtifacts {
  PopulationSplit split;
  CVResult tuned;
  DecayCurve curve;
};

// Shared decay-curve pipeline: cluster, tune, swap-resample, smooth, persist.
DecayArtifacts run_decay_pipeline(const MarkerMatrix& data, const PhenotypeVector& pheno,
                                  const RunConfig& cfg, const std::string& out_dir,
                                  const std::string& prefix) {
  const MarkerMatrix clean = drop_zero_variance(data);
  const Eigen::MatrixXd x_std = standardize(clean);
  const KinshipMatrix kin = allelic_kinship(x_std, clean.individual_ids);

  DecayArtifacts art;
  art.split = kmeans_split(clean, x_std, cfg.decay.kmeans, cfg.seed);
  if (cfg.decay.target_n_ta > 0 &&
      cfg.decay.target_n_ta < static_cast<int>(art.split.target.size())) {
    art.split = rebalance_split(art.split, clean, cfg.decay.target_n_ta);
  }
  write_text_file(join_path(out_dir, prefix + "split.json"),
                  art.split.to_json_string(clean.individual_ids));

  const MarkerMatrix x_tr = clean.subset_rows(art.split.training);
  const PhenotypeVector y_tr = subset_pheno(pheno, art.split.training);
  art.tuned = tune_cv(x_tr, y_tr, cfg.cv, cfg.seed, cfg.threads);
  write_text_file(join_path(out_dir, prefix + "cv_tuning.json"), cv_result_to_json(art.tuned));

  const ElasticNetModel model =
      fit(x_tr, y_tr, art.tuned.best_alpha, art.tuned.best_lambda);
  write_text_file(join_path(out_dir, prefix + "model.json"), model.to_json_string());

  DecayPointSet points =
      generate_decay_points(clean, pheno, art.split, cfg.decay.schedule,
                            penalty_from(art.tuned), cfg.seed, cfg.threads, &kin);
  if (points.stopped_by_fst && points.m_levels.size() == 1) {
    std::cerr << "warning: F_ST of the clustered split is already at or below fst_stop; "
                 "only the m = 0 level was generated\n";
  }
  write_decay_points_csv(join_path(out_dir, prefix + "decay_points.csv"), points);
  art.curve = build_decay_curve(std::move(points), cfg.decay.loess);
  write_text_file(join_path(out_dir, prefix + "curve.json"), decay_curve_to_json(art.curve));
  return art;
}

SvgPlot::Points curve_points(const DecayCurve& curve) {
  SvgPlot::Points pts;
  for (const DecayPoint& p : curve.data.points) pts.emplace_back(p.fst, p.rho);
  return pts;
}

void add_curve_layers(SvgPlot& plot, const DecayCurve& curve) {
  if (curve.has_loess) {
    std::vector<double> x(curve.loess.grid.data(), curve.loess.grid.data() + curve.loess.grid.size());
    std::vector<double> lo(curve.loess.lo.data(), curve.loess.lo.data() + curve.loess.lo.size());
    std::vector<double> hi(curve.loess.hi.data(), curve.loess.hi.data() + curve.loess.hi.size());
    plot.add_band(x, lo, hi, "#4477cc", 0.2);
    SvgPlot::Points mean;
    for (Eigen::Index g = 0; g < curve.loess.grid.size(); ++g) {
      mean.emplace_back(curve.loess.grid(g), curve.loess.mean(g));
    }
    plot.add_line(mean, "#2255aa", false, 2.0);
  }
  if (curve.has_fits) {
    double x0 = 0.0, x1 = 0.0;
    for (const DecayPoint& p : curve.data.points) {
      x0 = std::min(x0, p.fst);
      x1 = std::max(x1, p.fst);
    }
    SvgPlot::Points line{{x0, curve.linear.intercept + curve.linear.slope * x0},
                         {x1, curve.linear.intercept + curve.linear.slope * x1}};
    plot.add_line(line, "#2255aa", true, 1.5);
  }
  plot.add_scatter(curve_points(curve), "#4477cc", 2.5, true);
  // the m = 0 point, the far end of the curve
  for (const DecayPoint& p : curve.data.points) {
    if (p.m_swapped == 0) {
      plot.add_scatter({{p.fst, p.rho}}, "#cc3333", 4.0, false);
      break;
    }
  }
}

std::optional<double> rho_l_at(const DecayCurve& curve, double fst) {
  if (!curve.has_fits) return std::nullopt;
  return curve.linear.intercept + curve.linear.slope * fst;
}

nlohmann::json json_or_null(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json();
}

}  // namespace

int cmd_preprocess(const RunConfig& cfg) {
  require(!cfg.genotype_path.empty(), "a genotype file is required (config key 'genotype')");
  ensure_dir(cfg.output_dir);
  auto [geno, pheno] = load_dataset(
      cfg.genotype_path,
      cfg.phenotype_path.empty() ? std::nullopt : std::make_optional(cfg.phenotype_path));
  auto [clean, report] = qc_pipeline(geno, cfg.qc, cfg.seed);
  save_genotypes(join_path(cfg.output_dir, "genotype_qc.csv"), clean);
  write_text_file(join_path(cfg.output_dir, "qc_report.json"), report.to_json_string());
  if (pheno) {
    save_phenotypes(join_path(cfg.output_dir, "phenotype_qc.csv"), clean, *pheno);
  }
  std::cerr << "preprocess: kept " << clean.m() << " of " << geno.m() << " markers, imputed "
            << report.imputed_cells << " cells\n";
  return 0;
}

int cmd_decay(const RunConfig& cfg) {
  ensure_dir(cfg.output_dir);
  const auto [geno, pheno] = load_complete_dataset(cfg);
  const DecayArtifacts art = run_decay_pipeline(geno, pheno, cfg, cfg.output_dir, "");
  if (cfg.decay.plot) {
    SvgPlot plot("Decay of predictive correlation", "F_ST", "predictive correlation");
    add_curve_layers(plot, art.curve);
    plot.save(join_path(cfg.output_dir, "plot.svg"));
  }
  return 0;
}

int cmd_holdout(const RunConfig& cfg) {
  ensure_dir(cfg.output_dir);
  const auto [geno_raw, pheno] = load_complete_dataset(cfg);
  const MarkerMatrix geno = drop_zero_variance(geno_raw);

  int n_tr = cfg.holdout.n_tr;
  int n_ta = cfg.holdout.n_ta;
  PopulationSplit split;
  if (n_tr <= 0 || n_ta <= 0) {
    const Eigen::MatrixXd x_std = standardize(geno);
    split = kmeans_split(geno, x_std, cfg.decay.kmeans, cfg.seed);
    if (cfg.decay.target_n_ta > 0 &&
        cfg.decay.target_n_ta < static_cast<int>(split.target.size())) {
      split = rebalance_split(split, geno, cfg.decay.target_n_ta);
    }
    n_tr = static_cast<int>(split.training.size());
    n_ta = static_cast<int>(split.target.size());
  } else {
    // explicit sizes: tune on a seed-derived subset of matching size
    Rng rng = derive_rng(cfg.seed, "holdout_tuning_subset");
    std::vector<int> order(static_cast<std::size_t>(geno.n()));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    split.training.assign(order.begin(), order.begin() + n_tr);
    std::sort(split.training.begin(), split.training.end());
  }

  const MarkerMatrix x_tr = geno.subset_rows(split.training);
  const PhenotypeVector y_tr = subset_pheno(pheno, split.training);
  const CVResult tuned = tune_cv(x_tr, y_tr, cfg.cv, cfg.seed, cfg.threads);

  const std::vector<HoldoutResult> results = holdout_cv(
      geno, pheno, n_tr, n_ta, cfg.holdout.n_reps, penalty_from(tuned), cfg.seed, cfg.threads);
  write_holdout_csv(join_path(cfg.output_dir, "holdout.csv"), results);

  double fst_sum = 0.0, rho_sum = 0.0;
  int rho_n = 0;
  for (const HoldoutResult& r : results) {
    fst_sum += r.fst;
    if (!std::isnan(r.rho_cv)) {
      rho_sum += r.rho_cv;
      ++rho_n;
    }
  }
  nlohmann::json j;
  j["n_reps"] = static_cast<int>(results.size());
  j["n_tr"] = n_tr;
  j["n_ta"] = n_ta;
  j["mean_fst"] = fst_sum / static_cast<double>(results.size());
  j["mean_rho_cv"] = rho_n > 0 ? nlohmann::json(rho_sum / rho_n) : nlohmann::json();
  j["best_alpha"] = tuned.best_alpha;
  j["best_lambda"] = tuned.best_lambda;
  write_text_file(join_path(cfg.output_dir, "holdout_summary.json"), j.dump(2) + "\n");
  return 0;
}

namespace {

void write_generations_csv(const std::string& path, const std::vector<SelectionRecord>& records) {
  CsvTable table;
  table.header = {"sim", "generation", "fst", "rho", "mean_g"};
  for (const SelectionRecord& r : records) {
    table.rows.push_back({std::to_string(r.sim), std::to_string(r.generation),
                          format_double(r.fst), format_double(r.rho), format_double(r.mean_g)});
  }
  write_csv(path, table);
}

nlohmann::json rounds_comparison(const std::vector<SelectionRound>& rounds,
                                 const DecayCurve* curve, double window) {
  nlohmann::json arr = nlohmann::json::array();
  for (const SelectionRound& round : rounds) {
    nlohmann::json row;
    row["generation"] = round.generation;
    row["mean_fst"] = round.mean_fst;
    row["mean_rho"] = std::isnan(round.mean_rho) ? nlohmann::json() : nlohmann::json(round.mean_rho);
    row["mean_genetic_value"] = round.mean_genetic_value;
    if (curve) {
      const std::optional<double> rho_d = evaluate_rho_d(*curve, round.mean_fst, window);
      const std::optional<double> rho_l = rho_l_at(*curve, round.mean_fst);
      row["rho_d"] = json_or_null(rho_d);
      row["rho_l"] = json_or_null(rho_l);
      if (rho_d && !std::isnan(round.mean_rho)) {
        row["abs_diff_rho_d"] = std::fabs(round.mean_rho - *rho_d);
      }
      if (rho_l && !std::isnan(round.mean_rho)) {
        row["abs_diff_rho_l"] = std::fabs(round.mean_rho - *rho_l);
      }
    }
    arr.push_back(std::move(row));
  }
  return arr;
}

// One full breeding-program pass: tune/fit on the training set, run the
// selection sims, optionally estimate the decay curve and compare.
void breeding_pass(const RunConfig& cfg, const HaplotypePopulation& founders_hap,
                   const MarkerMatrix& founder_geno, const PhenotypeVector& founder_pheno,
                   const TraitArchitecture& arch, const SelectionConfig& sel_cfg,
                   std::uint64_t seed, const std::string& prefix,
                   std::vector<CapturedGeneration>* captured_out) {
  const CVResult tuned = tune_cv(founder_geno, founder_pheno, cfg.cv, seed, cfg.threads);
  const ElasticNetModel model =
      fit(founder_geno, founder_pheno, tuned.best_alpha, tuned.best_lambda);
  write_text_file(join_path(cfg.output_dir, prefix + "model.json"), model.to_json_string());

  const SelectionResult result =
      run_selection_program(founders_hap, arch, model, sel_cfg, seed, cfg.threads);
  write_generations_csv(join_path(cfg.output_dir, prefix + "generations.csv"), result.records);
  if (captured_out) *captured_out = result.captured;

  std::optional<DecayArtifacts> art;
  if (cfg.breeding.estimate_curve) {
    RunConfig curve_cfg = cfg;
    curve_cfg.seed = seed;
    art = run_decay_pipeline(founder_geno, founder_pheno, curve_cfg, cfg.output_dir,
                             prefix + "curve_");
  }

  nlohmann::json j;
  j["n_sims"] = sel_cfg.n_sims;
  j["n_rounds"] = sel_cfg.n_rounds;
  j["n_causal"] = cfg.breeding.n_causal;
  j["h2"] = cfg.breeding.h2;
  j["generations"] =
      rounds_comparison(result.rounds, art ? &art->curve : nullptr, cfg.decay.window);
  write_text_file(join_path(cfg.output_dir, prefix + "comparison.json"), j.dump(2) + "\n");

  if (cfg.decay.plot && art) {
    SvgPlot plot("Breeding program vs decay curve", "F_ST", "predictive correlation");
    add_curve_layers(plot, art->curve);
    for (const SelectionRound& round : result.rounds) {
      if (std::isnan(round.mean_rho)) continue;
      plot.add_labelled_point(round.mean_fst, round.mean_rho,
                              "g" + std::to_string(round.generation), "#227733");
    }
    plot.save(join_path(cfg.output_dir, prefix + "plot.svg"));
  }
}

}  // namespace

int cmd_simulate_breeding(const RunConfig& cfg) {
  ensure_dir(cfg.output_dir);
  const BreedingConfig& b = cfg.breeding;

  MarkerMatrix founder_geno;
  HaplotypePopulation founders_hap;
  if (!cfg.genotype_path.empty()) {
    founder_geno = load_genotypes(cfg.genotype_path);
    require(!founder_geno.has_missing(),
            "founder genotypes contain missing cells; run `decaykit preprocess` first");
    const GeneticMap map =
        GeneticMap::uniform(founder_geno.m(), b.n_chromosomes, b.chrom_length);
    founders_hap = phase_founders(founder_geno, map, cfg.seed);
    if (static_cast<int>(founders_hap.size()) < b.n_founders) {
      // top the founder set up by random mating, as when a small panel seeds
      // a larger simulated program
      const int extra = b.n_founders - static_cast<int>(founders_hap.size());
      Rng rng = derive_rng(cfg.seed, "founder_expansion");
      const HaplotypePopulation bred = random_mate(founders_hap, extra, rng, "bred");
      founders_hap = concat_populations({&founders_hap, &bred});
      founder_geno = founders_hap.genotypes();
      std::cerr << "note: expanded founders to " << founders_hap.size()
                << " via random mating\n";
    }
  } else {
    Rng rng = derive_rng(cfg.seed, "synthetic_founders");
    const Eigen::VectorXd p = random_ancestral_freqs(b.n_markers, rng);
    founder_geno = genotypes_from_freqs(b.n_founders, p, rng, "f");
    const GeneticMap map = GeneticMap::uniform(b.n_markers, b.n_chromosomes, b.chrom_length);
    founders_hap = phase_founders(founder_geno, map, cfg.seed);
  }

  const TraitArchitecture arch =
      make_architecture(founder_geno, b.n_causal, b.h2, b.sigma_e, cfg.seed);
  const PhenotypeVector founder_pheno =
      simulate_phenotypes(founder_geno, arch, derive_rng(cfg.seed, "founder_pheno"().next_u64());

  SelectionConfig sel_cfg = b.selection;
  sel_cfg.capture_rounds = b.augment_after_round;
  std::vector<CapturedGeneration> captured;
  breeding_pass(cfg, founders_hap, founder_geno, founder_pheno, arch, sel_cfg, cfg.seed, "",
                &captured);

  if (b.augment_after_round > 0) {
    require(static_cast<int>(captured.size()) == b.augment_after_round,
            "simulate-breeding: captured generations missing");
    auto [aug_geno, aug_pheno] = augment_training(founder_geno, founder_pheno, captured);
    std::vector<const HaplotypePopulation*> parts{&founders_hap};
    for (const auto& gen : captured) parts.push_back(&gen.population);
    const HaplotypePopulation aug_hap = concat_populations(parts);
    SelectionConfig aug_cfg = b.selection;
    aug_cfg.capture_rounds = 0;
    std::cerr << "note: augmented rerun with " << aug_geno.n() << " training individuals\n";
    breeding_pass(cfg, aug_hap, aug_geno, aug_pheno, arch, aug_cfg,
                  derive_rng(cfg.seed, "augmented_rerun").next_u64(), "augmented_", nullptr);
  }
  return 0;
}

int cmd_simulate_crosspop(const RunConfig& cfg) {
  ensure_dir(cfg.output_dir);
  const CrosspopConfig& c = cfg.crosspop;

  std::vector<MarkerMatrix> populations;
  std::vector<std::string> names;
  if (!c.population_paths.empty()) {
    require(c.population_paths.size() >= 2,
            "simulate-crosspop: need a training and at least one target population");
    for (const auto& path : c.population_paths) {
      populations.push_back(load_genotypes(path));
      require(!populations.back().has_missing(),
              "population " + path + " contains missing cells; run preprocess first");
      names.push_back(std::filesystem::path(path).stem().string());
    }
  } else {
    require(c.n_populations >= 2, "simulate-crosspop: n_populations must be at least 2");
    require(static_cast<int>(c.fst.size()) >= c.n_populations - 1,
            "simulate-crosspop: need one fst per synthetic target population");
    Rng rng = derive_rng(cfg.seed, "crosspop_populations");
    const Eigen::VectorXd p = random_ancestral_freqs(c.n_markers, rng);
    populations.push_back(genotypes_from_freqs(c.n_individuals, p, rng, "pop0_"));
    names.push_back("pop0");
    for (int i = 1; i < c.n_populations; ++i) {
      const Eigen::VectorXd q =
          balding_nichols_freqs(p, c.fst[static_cast<std::size_t>(i - 1)], rng);
      populations.push_back(
          genotypes_from_freqs(c.n_individuals, q, rng, "pop" + std::to_string(i) + "_"));
      names.push_back("pop" + std::to_string(i));
    }
    for (std::size_t i = 0; i < populations.size(); ++i) {
      save_genotypes(join_path(cfg.output_dir, names[i] + "_genotypes.csv"), populations[i]);
    }
  }

  TraitArchitecture arch;
  const std::vector<PhenotypeVector> phenos =
      crosspop_simulate(populations, c.n_causal, c.h2, cfg.seed, &arch);

  const MarkerMatrix& training = populations[0];
  const PhenotypeVector& y_train = phenos[0];
  const CVResult tuned = tune_cv(training, y_train, cfg.cv, cfg.seed, cfg.threads);
  const ElasticNetModel model = fit(training, y_train, tuned.best_alpha, tuned.best_lambda);
  write_text_file(join_path(cfg.output_dir, "model.json"), model.to_json_string());

  std::vector<int> all_training(static_cast<std::size_t>(training.n()));
  std::iota(all_training.begin(), all_training.end(), 0);
  const Eigen::VectorXd train_freqs = allele_frequencies(training, all_training);

  struct TargetRow {
    std::string name;
    int n = 0;
    double fst = 0.0;
    double rho_p = kNaN;
    Interval ci;
  };
  std::vector<TargetRow> rows;
  for (std::size_t i = 1; i < populations.size(); ++i) {
    TargetRow row;
    row.name = names[i];
    row.n = static_cast<int>(populations[i].n());
    row.fst = estimate_fst(build_allele_frequency_set(train_freqs, populations[i])).value;
    const Eigen::VectorXd pred = predict(model, populations[i]);
    const Eigen::VectorXd pc = pred.array() - pred.mean();
    const Eigen::VectorXd tc = phenos[i].values.array() - phenos[i].values.mean();
    const double sp2 = pc.squaredNorm();
    const double st2 = tc.squaredNorm();
    if (sp2 > 0.0 && st2 > 0.0) {
      row.rho_p = pc.dot(tc) / std::sqrt(sp2 * st2);
      row.ci = fisher_z_interval(row.rho_p, row.n);
    }
    rows.push_back(std::move(row));
  }

  CsvTable table;
  table.header = {"population", "n", "fst", "rho_p", "ci_lo", "ci_hi"};
  for (const TargetRow& row : rows) {
    table.rows.push_back({row.name, std::to_string(row.n), format_double(row.fst),
                          format_double(row.rho_p), format_double(row.ci.lo),
                          format_double(row.ci.hi)});
  }
  write_csv(join_path(cfg.output_dir, "populations.csv"), table);

  std::optional<DecayArtifacts> art;
  if (c.estimate_curve) {
    art = run_decay_pipeline(training, y_train, cfg, cfg.output_dir, "curve_");
  }

  nlohmann::json j;
  j["training_population"] = names[0];
  j["n_causal"] = c.n_causal;
  j["h2"] = c.h2;
  nlohmann::json targets = nlohmann::json::array();
  for (const TargetRow& row : rows) {
    nlohmann::json t;
    t["population"] = row.name;
    t["n"] = row.n;
    t["fst"] = row.fst;
    t["rho_p"] = std::isnan(row.rho_p) ? nlohmann::json() : nlohmann::json(row.rho_p);
    t["ci_lo"] = row.ci.lo;
    t["ci_hi"] = row.ci.hi;
    if (art) {
      const std::optional<double> rho_d = evaluate_rho_d(art->curve, row.fst, cfg.decay.window);
      const std::optional<double> rho_l = rho_l_at(art->curve, row.fst);
      t["rho_d"] = json_or_null(rho_d);
      t["rho_l"] = json_or_null(rho_l);
      if (!std::isnan(row.rho_p)) {
        if (rho_d) {
          t["abs_diff_rho_d"] = std::fabs(row.rho_p - *rho_d);
          t["rho_d_in_ci"] = (*rho_d >= row.ci.lo && *rho_d <= row.ci.hi);
        }
        if (rho_l) {
          t["abs_diff_rho_l"] = std::fabs(row.rho_p - *rho_l);
          t["rho_l_in_ci"] = (*rho_l >= row.ci.lo && *rho_l <= row.ci.hi);
        }
      }
    }
    targets.push_back(std::move(t));
  }
  j["targets"] = std::move(targets);
  write_text_file(join_path(cfg.output_dir, "comparison.json"), j.dump(2) + "\n");

  if (cfg.decay.plot && art) {
    SvgPlot plot("Cross-population prediction vs decay curve", "F_ST",
                 "predictive correlation");
    add_curve_layers(plot, art->curve);
    for (const TargetRow& row : rows) {
      if (std::isnan(row.rho_p)) continue;
      plot.add_labelled_point(row.fst, row.rho_p, row.name, "#cc3333");
    }
    plot.save(join_path(cfg.output_dir, "plot.svg"));
  }
  return 0;
}

int cmd_report(const ReportInputs& inputs) {
  ensure_dir(inputs.output_dir);
  require(!inputs.curve_path.empty(), "report: --curve is required");
  const nlohmann::json curve_json = nlohmann::json::parse(read_text_file(inputs.curve_path));

  DecayPointSet points;
  for (const auto& p : curve_json.at("points")) {
    points.points.push_back({p.at("m").get<int>(), p.at("fst").get<double>(),
                             p.at("rho").get<double>(), p.at("replicate").get<int>()});
    if (p.contains("kbar")) points.kbar.push_back(p.at("kbar").get<double>());
  }
  if (points.kbar.size() != points.points.size()) points.kbar.clear();
  const DecayCurve curve = build_decay_curve(std::move(points));

  nlohmann::json report;
  report["n_points"] = curve.data.points.size();
  if (curve.has_fits) {
    report["linear"] = {{"intercept", curve.linear.intercept},
                        {"slope", curve.linear.slope},
                        {"r2", curve.linear.r2}};
    report["quadratic"] = {{"intercept", curve.quadratic.intercept},
                           {"slope", curve.quadratic.slope},
                           {"r2", curve.quadratic.r2}};
  }

  SvgPlot plot("Decay curve report", "F_ST", "predictive correlation");
  add_curve_layers(plot, curve);

  if (!inputs.holdout_path.empty()) {
    const CsvTable t = read_csv(inputs.holdout_path);
    require(t.header == std::vector<std::string>({"replicate", "fst", "rho_cv"}),
            "report: unexpected holdout CSV header");
    double fst_sum = 0.0, rho_sum = 0.0;
    int n = 0;
    SvgPlot::Points pts;
    for (const auto& row : t.rows) {
      const double fst = std::stod(row[1]);
      const double rho = std::stod(row[2]);
      if (std::isnan(rho)) continue;
      fst_sum += fst;
      rho_sum += rho;
      ++n;
      pts.emplace_back(fst, rho);
    }
    require(n > 0, "report: holdout CSV has no usable rows");
    const double mean_fst = fst_sum / n;
    const double mean_rho = rho_sum / n;
    plot.add_scatter(pts, "#888888", 2.5, false);
    const std::optional<double> rho_d = evaluate_rho_d(curve, mean_fst, inputs.window);
    nlohmann::json h;
    h["mean_fst"] = mean_fst;
    h["mean_rho_cv"] = mean_rho;
    h["rho_d_at_mean_fst"] = json_or_null(rho_d);
    if (rho_d) h["abs_diff"] = std::fabs(mean_rho - *rho_d);
    report["holdout"] = std::move(h);
  }

  if (!inputs.generations_path.empty()) {
    const CsvTable t = read_csv(inputs.generations_path);
    require(t.header == std::vector<std::string>({"sim", "generation", "fst", "rho", "mean_g"}),
            "report: unexpected generations CSV header");
    std::map<int, std::array<double, 4>> acc;  // gen -> {fst_sum, rho_sum, rho_n, count}
    for (const auto& row : t.rows) {
      const int gen = std::stoi(row[1]);
      auto& a = acc[gen];
      a[0] += std::stod(row[2]);
      const double rho = std::stod(row[3]);
      if (!std::isnan(rho)) {
        a[1] += rho;
        a[2] += 1.0;
      }
      a[3] += 1.0;
    }
    nlohmann::json gens = nlohmann::json::array();
    for (const auto& [gen, a] : acc) {
      const double mean_fst = a[0] / a[3];
      const double mean_rho = a[2] > 0 ? a[1] / a[2] : kNaN;
      nlohmann::json row;
      row["generation"] = gen;
      row["mean_fst"] = mean_fst;
      row["mean_rho"] = std::isnan(mean_rho) ? nlohmann::json() : nlohmann::json(mean_rho);
      const std::optional<double> rho_d = evaluate_rho_d(curve, mean_fst, inputs.window);
      const std::optional<double> rho_l = rho_l_at(curve, mean_fst);
      row["rho_d"] = json_or_null(rho_d);
      row["rho_l"] = json_or_null(rho_l);
      if (!std::isnan(mean_rho)) {
        if (rho_d) row["abs_diff_rho_d"] = std::fabs(mean_rho - *rho_d);
        if (rho_l) row["abs_diff_rho_l"] = std::fabs(mean_rho - *rho_l);
        plot.add_labelled_point(mean_fst, mean_rho, "g" + std::to_string(gen), "#227733");
      }
      gens.push_back(std::move(row));
    }
    report["generations"] = std::move(gens);
  }

  if (!inputs.populations_path.empty()) {
    const CsvTable t = read_csv(inputs.populations_path);
    require(t.header == std::vector<std::string>(
                            {"population", "n", "fst", "rho_p", "ci_lo", "ci_hi"}),
            "report: unexpected populations CSV header");
    nlohmann::json pops = nlohmann::json::array();
    for (const auto& row : t.rows) {
      const double fst = std::stod(row[2]);
      const double rho_p = std::stod(row[3]);
      nlohmann::json p;
      p["population"] = row[0];
      p["fst"] = fst;
      p["rho_p"] = std::isnan(rho_p) ? nlohmann::json() : nlohmann::json(rho_p);
      const std::optional<double> rho_d = evaluate_rho_d(curve, fst, inputs.window);
      const std::optional<double> rho_l = rho_l_at(curve, fst);
      p["rho_d"] = json_or_null(rho_d);
      p["rho_l"] = json_or_null(rho_l);
      pops.push_back(std::move(p));
      if (!std::isnan(rho_p)) plot.add_labelled_point(fst, rho_p, row[0], "#cc3333");
    }
    report["populations"] = std::move(pops);
  }

  if (!curve.data.kbar.empty() && curve.data.points.size() >= 4) {
    Eigen::VectorXd fst(static_cast<Eigen::Index>(curve.data.points.size()));
    Eigen::VectorXd kbar(static_cast<Eigen::Index>(curve.data.points.size()));
    for (std::size_t i = 0; i < curve.data.points.size(); ++i) {
      fst(static_cast<Eigen::Index>(i)) = curve.data.points[i].fst;
      kbar(static_cast<Eigen::Index>(i)) = curve.data.kbar[i];
    }
    const CorrelationTest test = fst_kinship_diagnostics(fst, kbar);
    report["fst_kinship"] = {
        {"correlation", test.r}, {"t", test.t}, {"p", test.p}, {"n", test.n}};
  }

  write_text_file(join_path(inputs.output_dir, "report.json"), report.dump(2) + "\n");
  if (inputs.plot) plot.save(join_path(inputs.output_dir, "report.svg"));
  return 0;
}

}  // namespace decaykit::cli
