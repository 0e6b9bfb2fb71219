#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "decaykit/elastic_net.hpp"
#include "decaykit/geno.hpp"
#include "decaykit/rng.hpp"

namespace decaykit {

/// Marker positions in Morgans, grouped by chromosome; chromosomes carry
/// contiguous marker index ranges in order.
struct GeneticMap {
  std::vector<std::vector<double>> positions;
  double chrom_length = 1.0;

  int n_chromosomes() const { return static_cast<int>(positions.size()); }
  Eigen::Index n_markers() const;
  void validate() const;

  /// Markers spread as evenly as possible over the chromosomes, regular
  /// spacing within each.
  static GeneticMap uniform(Eigen::Index n_markers, int n_chromosomes = 21,
                            double chrom_length = 1.0);
};

/// Phased diploid population: two binary haplotype matrices (n x m).
struct HaplotypePopulation {
  using HaploMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
  HaploMatrix h1, h2;
  GeneticMap map;
  std::vector<std::string> individual_ids;
  std::vector<std::string> marker_ids;

  Eigen::Index size() const { return h1.rows(); }
  MarkerMatrix genotypes() const;  // h1 + h2, entries in {0,1,2}
  HaplotypePopulation subset(const std::vector<int>& rows) const;
};

/// Deterministic phasing for homozygotes; heterozygotes get (0,1) or (1,0)
/// with equal probability per locus.
HaplotypePopulation phase_founders(const MarkerMatrix& m, const GeneticMap& map,
                                   std::uint64_t seed);

/// One meiosis: per chromosome, Poisson(chrom length) crossovers at uniform
/// positions, alternating parental strands from a fair-coin start.
Eigen::Matrix<std::uint8_t, 1, Eigen::Dynamic> make_gamete(const HaplotypePopulation& pop,
                                                           Eigen::Index parent, Rng& rng);

/// Offspring from uniformly chosen distinct parent pairs (no selfing), each
/// the union of two independent gametes.
HaplotypePopulation random_mate(const HaplotypePopulation& pop, int n_offspring, Rng& rng,
                                const std::string& id_prefix = "prog");
HaplotypePopulation random_mate(const HaplotypePopulation& pop, int n_offspring,
                                std::uint64_t seed, const std::string& id_prefix = "prog");

struct TraitArchitecture {
  std::vector<int> causal_indices;
  Eigen::VectorXd effects;
  double sigma_e = 1.0;
  double h2_target = 0.55;
};

// Causal variants drawn among markers with MAF > 0.05 in the reference
// population; normal effects rescaled so the reference genetic variance is
// h2/(1-h2) * sigma_e^2.
TraitArchitecture make_architecture(const MarkerMatrix& reference, int n_causal, double h2_target,
                                    double sigma_e, std::uint64_t seed);

Eigen::VectorXd genetic_values(const MarkerMatrix& pop, const TraitArchitecture& arch);

/// y = X_causal * effects + N(0, sigma_e^2).
PhenotypeVector simulate_phenotypes(const MarkerMatrix& pop, const TraitArchitecture& arch,
                                    Rng& rng);
PhenotypeVector simulate_phenotypes(const MarkerMatrix& pop, const TraitArchitecture& arch,
                                    std::uint64_t seed);

struct SelectionConfig {
  int n_rounds = 10;
  int n_progeny = 200;
  int n_selected = 20;
  int n_sims = 100;
  // genotypes+phenotypes of the first sim's early rounds, kept for training
  // augmentation (0 = keep nothing)
  int capture_rounds = 0;
};

struct SelectionRecord {
  int sim = 0;
  int generation = 0;
  double fst = 0.0;
  double rho = 0.0;  // NaN when the fixed model predicted a constant
  double mean_g = 0.0;
};

struct SelectionRound {
  int generation = 0;
  double mean_fst = 0.0;
  double mean_rho = 0.0;
  double mean_genetic_value = 0.0;
};

struct CapturedGeneration {
  HaplotypePopulation population;
  PhenotypeVector phenotypes;
};

/// Row-wise concatenation; maps and marker sets must agree, ids must stay
/// unique.
HaplotypePopulation concat_populations(const std::vector<const HaplotypePopulation*>& parts);

struct SelectionResult {
  std::vector<SelectionRecord> records;  // ordered by (sim, generation)
  std::vector<SelectionRound> rounds;    // per-generation means over sims
  std::vector<CapturedGeneration> captured;
};

// Truncation-selection program: each round mates the current parents, draws
// phenotypes, estimates F_ST against the founders (ancestral frequencies),
// predicts with the FIXED founder-trained model, records the predictive
// correlation and mean genetic value, then keeps the n_selected progeny with
// the largest phenotypes as the next parents.
SelectionResult run_selection_program(const HaplotypePopulation& founders,
                                      const TraitArchitecture& arch, const ElasticNetModel& model,
                                      const SelectionConfig& config, std::uint64_t seed,
                                      int threads = 0);

/// Founders plus captured generations, concatenated for a model refit.
/// Individual ids must stay unique across the blocks.
std::pair<MarkerMatrix, PhenotypeVector> augment_training(
    const MarkerMatrix& founders, const PhenotypeVector& founder_pheno,
    const std::vector<CapturedGeneration>& generations);

// One shared trait architecture (causal set and effect sizes drawn once,
// scaled on the first population) applied to every population; noise is
// drawn independently per population.
std::vector<PhenotypeVector> crosspop_simulate(const std::vector<MarkerMatrix>& populations,
                                               int n_causal, double h2, std::uint64_t seed,
                                               TraitArchitecture* arch_out = nullptr);

}  // namespace decaykit
