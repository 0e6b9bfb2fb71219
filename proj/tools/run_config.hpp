#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "decaykit/decay.hpp"
#include "decaykit/elastic_net.hpp"
#include "decaykit/geno.hpp"
#include "decaykit/loess.hpp"
#include "decaykit/sim.hpp"

namespace decaykit::cli {

struct DecayConfig {
  DecayScheduleParams schedule;
  double window = 0.01;
  int target_n_ta = 0;  // 0 = keep the k-means sizes
  KmeansOptions kmeans;
  LoessOptions loess;
  bool plot = false;
};

struct BreedingConfig {
  int n_founders = 200;  // synthetic founders, or mating-expansion target for loaded ones
  int n_markers = 2712;
  int n_chromosomes = 21;
  double chrom_length = 1.0;
  int n_causal = 200;
  double h2 = 0.55;
  double sigma_e = 1.0;
  SelectionConfig selection;
  int augment_after_round = 0;  // 0 = no augmented rerun
  bool estimate_curve = true;
};

struct CrosspopConfig {
  std::vector<std::string> population_paths;  // first = training; empty -> synthetic
  int n_populations = 3;
  int n_individuals = 150;
  int n_markers = 2000;
  std::vector<double> fst = {0.05, 0.10};  // one per synthetic target population
  int n_causal = 100;
  double h2 = 0.55;
  bool estimate_curve = true;
};

struct HoldoutConfig {
  int n_reps = 40;
  int n_tr = 0;  // 0 = take sizes from the k-means split
  int n_ta = 0;
};

struct RunConfig {
  std::uint64_t seed = 0;
  bool seed_set = false;  // wall-clock seeding is not allowed; seed is mandatory
  std::string output_dir = "out";
  int threads = 0;
  std::string genotype_path;
  std::string phenotype_path;
  QcParams qc;
  CvGrid cv;
  DecayConfig decay;
  HoldoutConfig holdout;
  BreedingConfig breeding;
  CrosspopConfig crosspop;

  static RunConfig from_json_file(const std::string& path);
  void validate_seed() const;
};

}  // namespace decaykit::cli
