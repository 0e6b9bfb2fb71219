#include "run_config.hpp"

#include "json.hpp"

#include "decaykit/csv.hpp"
#include "decaykit/error.hpp"

namespace decaykit::cli {

namespace {

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::from_json_file(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("config " + path + ": " + e.what());
  }
  RunConfig cfg;
  if (j.contains("seed")) {
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.seed_set = true;
  }
  read_if(j, "output_dir", cfg.output_dir);
  read_if(j, "threads", cfg.threads);
  read_if(j, "genotype", cfg.genotype_path);
  read_if(j, "phenotype", cfg.phenotype_path);

  if (j.contains("qc")) {
    const auto& q = j.at("qc");
    read_if(q, "maf_min", cfg.qc.maf_min);
    read_if(q, "missing_max", cfg.qc.missing_max);
    read_if(q, "ld_r_max", cfg.qc.ld_r_max);
    read_if(q, "knn_k", cfg.qc.knn_k);
  }
  if (j.contains("cv")) {
    const auto& c = j.at("cv");
    read_if(c, "alphas", cfg.cv.alphas);
    read_if(c, "n_lambda", cfg.cv.n_lambda);
    read_if(c, "lambda_min_ratio", cfg.cv.lambda_min_ratio);
    read_if(c, "n_runs", cfg.cv.n_runs);
    read_if(c, "n_folds", cfg.cv.n_folds);
  }
  if (j.contains("decay")) {
    const auto& d = j.at("decay");
    read_if(d, "m_step", cfg.decay.schedule.m_step);
    read_if(d, "n_reps", cfg.decay.schedule.n_reps);
    read_if(d, "fst_stop", cfg.decay.schedule.fst_stop);
    read_if(d, "max_levels", cfg.decay.schedule.max_levels);
    read_if(d, "window", cfg.decay.window);
    read_if(d, "target_n_ta", cfg.decay.target_n_ta);
    read_if(d, "kmeans_starts", cfg.decay.kmeans.n_starts);
    read_if(d, "kmeans_max_iter", cfg.decay.kmeans.max_iter);
    read_if(d, "loess_span", cfg.decay.loess.span);
    read_if(d, "loess_degree", cfg.decay.loess.degree);
    read_if(d, "loess_grid_size", cfg.decay.loess.grid_size);
    read_if(d, "plot", cfg.decay.plot);
  }
  if (j.contains("holdout")) {
    const auto& h = j.at("holdout");
    read_if(h, "n_reps", cfg.holdout.n_reps);
    read_if(h, "n_tr", cfg.holdout.n_tr);
    read_if(h, "n_ta", cfg.holdout.n_ta);
  }
  if (j.contains("breeding")) {
    const auto& b = j.at("breeding");
    read_if(b, "n_founders", cfg.breeding.n_founders);
    read_if(b, "n_markers", cfg.breeding.n_markers);
    read_if(b, "n_chromosomes", cfg.breeding.n_chromosomes);
    read_if(b, "chrom_length", cfg.breeding.chrom_length);
    read_if(b, "n_causal", cfg.breeding.n_causal);
    read_if(b, "h2", cfg.breeding.h2);
    read_if(b, "sigma_e", cfg.breeding.sigma_e);
    read_if(b, "n_rounds", cfg.breeding.selection.n_rounds);
    read_if(b, "n_progeny", cfg.breeding.selection.n_progeny);
    read_if(b, "n_selected", cfg.breeding.selection.n_selected);
    read_if(b, "n_sims", cfg.breeding.selection.n_sims);
    read_if(b, "augment_after_round", cfg.breeding.augment_after_round);
    read_if(b, "estimate_curve", cfg.breeding.estimate_curve);
  }
  if (j.contains("crosspop")) {
    const auto& c = j.at("crosspop");
    read_if(c, "populations", cfg.crosspop.population_paths);
    read_if(c, "n_populations", cfg.crosspop.n_populations);
    read_if(c, "n_individuals", cfg.crosspop.n_individuals);
    read_if(c, "n_markers", cfg.crosspop.n_markers);
    read_if(c, "fst", cfg.crosspop.fst);
    read_if(c, "n_causal", cfg.crosspop.n_causal);
    read_if(c, "h2", cfg.crosspop.h2);
    read_if(c, "estimate_curve", cfg.crosspop.estimate_curve);
  }
  return cfg;
}

void RunConfig::validate_seed() const {
  require(seed_set, "config: 'seed' is required (wall-clock seeding is not supported)");
}

}  // namespace decaykit::cli
