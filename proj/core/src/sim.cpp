#include "decaykit/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "decaykit/error.hpp"
#include "decaykit/fst.hpp"
#include "decaykit/parallel.hpp"

namespace decaykit {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

Eigen::Index GeneticMap::n_markers() const {
  Eigen::Index total = 0;
  for (const auto& chrom : positions) total += static_cast<Eigen::Index>(chrom.size());
  return total;
}

void GeneticMap::validate() const {
  require(!positions.empty(), "GeneticMap: no chromosomes");
  require(chrom_length > 0.0, "GeneticMap: chromosome length must be positive");
  for (const auto& chrom : positions) {
    for (std::size_t i = 1; i < chrom.size(); ++i) {
      require(chrom[i] > chrom[i - 1], "GeneticMap: positions must be strictly increasing");
    }
  }
}

GeneticMap GeneticMap::uniform(Eigen::Index n_markers, int n_chromosomes, double chrom_length) {
  require(n_markers >= 1, "GeneticMap::uniform: need at least one marker");
  require(n_chromosomes >= 1, "GeneticMap::uniform: need at least one chromosome");
  GeneticMap map;
  map.chrom_length = chrom_length;
  map.positions.resize(static_cast<std::size_t>(n_chromosomes));
  const Eigen::Index base = n_markers / n_chromosomes;
  const Eigen::Index extra = n_markers % n_chromosomes;
  for (int c = 0; c < n_chromosomes; ++c) {
    const Eigen::Index count = base + (c < extra ? 1 : 0);
    auto& chrom = map.positions[static_cast<std::size_t>(c)];
    chrom.resize(static_cast<std::size_t>(count));
    for (Eigen::Index i = 0; i < count; ++i) {
      chrom[static_cast<std::size_t>(i)] =
          chrom_length * static_cast<double>(i + 1) / static_cast<double>(count + 1);
    }
  }
  map.validate();
  return map;
}

MarkerMatrix HaplotypePopulation::genotypes() const {
  MarkerMatrix out;
  out.counts = (h1.cast<double>() + h2.cast<double>());
  out.individual_ids = individual_ids;
  out.marker_ids = marker_ids;
  return out;
}

HaplotypePopulation HaplotypePopulation::subset(const std::vector<int>& rows) const {
  HaplotypePopulation out;
  out.map = map;
  out.marker_ids = marker_ids;
  out.h1.resize(static_cast<Eigen::Index>(rows.size()), h1.cols());
  out.h2.resize(static_cast<Eigen::Index>(rows.size()), h2.cols());
  out.individual_ids.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require(rows[r] >= 0 && rows[r] < size(), "HaplotypePopulation::subset: index out of range");
    out.h1.row(static_cast<Eigen::Index>(r)) = h1.row(rows[r]);
    out.h2.row(static_cast<Eigen::Index>(r)) = h2.row(rows[r]);
    out.individual_ids.push_back(individual_ids[static_cast<std::size_t>(rows[r])]);
  }
  return out;
}

HaplotypePopulation phase_founders(const MarkerMatrix& m, const GeneticMap& map,
                                   std::uint64_t seed) {
  require(!m.has_missing(), "phase_founders: genotypes contain missing cells");
  require(map.n_markers() == m.m(), "phase_founders: map does not cover the markers");
  HaplotypePopulation pop;
  pop.map = map;
  pop.marker_ids = m.marker_ids;
  pop.individual_ids = m.individual_ids;
  pop.h1.resize(m.n(), m.m());
  pop.h2.resize(m.n(), m.m());
  Rng rng = derive_rng(seed, "phase_founders");
  for (Eigen::Index i = 0; i < m.n(); ++i) {
    for (Eigen::Index j = 0; j < m.m(); ++j) {
      const double g = m.counts(i, j);
      if (g == 0.0) {
        pop.h1(i, j) = 0;
        pop.h2(i, j) = 0;
      } else if (g == 2.0) {
        pop.h1(i, j) = 1;
        pop.h2(i, j) = 1;
      } else {
        const bool flip = rng.bernoulli(0.5);
        pop.h1(i, j) = flip ? 1 : 0;
        pop.h2(i, j) = flip ? 0 : 1;
      }
    }
  }
  return pop;
}

Eigen::Matrix<std::uint8_t, 1, Eigen::Dynamic> make_gamete(const HaplotypePopulation& pop,
                                                           Eigen::Index parent, Rng& rng) {
  require(parent >= 0 && parent < pop.size(), "make_gamete: parent index out of range");
  Eigen::Matrix<std::uint8_t, 1, Eigen::Dynamic> gamete(pop.h1.cols());
  Eigen::Index marker = 0;
  for (const auto& chrom : pop.map.positions) {
    const int n_cross = rng.poisson(pop.map.chrom_length);
    std::vector<double> cuts(static_cast<std::size_t>(n_cross));
    for (auto& c : cuts) c = rng.uniform(0.0, pop.map.chrom_length);
    std::sort(cuts.begin(), cuts.end());
    bool first_strand = rng.bernoulli(0.5);
    std::size_t cut = 0;
    for (const double pos : chrom) {
      while (cut < cuts.size() && cuts[cut] <= pos) {
        first_strand = !first_strand;
        ++cut;
      }
      gamete(marker) = first_strand ? pop.h1(parent, marker) : pop.h2(parent, marker);
      ++marker;
    }
  }
  return gamete;
}

HaplotypePopulation random_mate(const HaplotypePopulation& pop, int n_offspring, Rng& rng,
                                const std::string& id_prefix) {
  require(pop.size() >= 2, "random_mate: need at least 2 parents");
  require(n_offspring >= 1, "random_mate: need at least 1 offspring");
  HaplotypePopulation out;
  out.map = pop.map;
  out.marker_ids = pop.marker_ids;
  out.h1.resize(n_offspring, pop.h1.cols());
  out.h2.resize(n_offspring, pop.h2.cols());
  out.individual_ids.reserve(static_cast<std::size_t>(n_offspring));
  const auto n = static_cast<std::int64_t>(pop.size());
  for (int k = 0; k < n_offspring; ++k) {
    const auto a = static_cast<Eigen::Index>(rng.uniform_int(0, n - 1));
    Eigen::Index b = a;
    while (b == a) b = static_cast<Eigen::Index>(rng.uniform_int(0, n - 1));
    out.h1.row(k) = make_gamete(pop, a, rng);
    out.h2.row(k) = make_gamete(pop, b, rng);
    out.individual_ids.push_back(id_prefix + "_" + std::to_string(k));
  }
  return out;
}

HaplotypePopulation random_mate(const HaplotypePopulation& pop, int n_offspring,
                                std::uint64_t seed, const std::string& id_prefix) {
  Rng rng = derive_rng(seed, "random_mate");
  return random_mate(pop, n_offspring, rng, id_prefix);
}

TraitArchitecture make_architecture(const MarkerMatrix& reference, int n_causal, double h2_target,
                                    double sigma_e, std::uint64_t seed) {
  require(!reference.has_missing(), "make_architecture: genotypes contain missing cells");
  require(n_causal >= 1, "make_architecture: need at least one causal variant");
  require(h2_target > 0.0 && h2_target < 1.0, "make_architecture: h2 must lie in (0, 1)");
  require(sigma_e > 0.0, "make_architecture: sigma_e must be positive");

  std::vector<int> eligible;
  for (Eigen::Index j = 0; j < reference.m(); ++j) {
    const double freq = reference.counts.col(j).mean() / 2.0;
    if (std::min(freq, 1.0 - freq) > 0.05) eligible.push_back(static_cast<int>(j));
  }
  require(!eligible.empty(), "make_architecture: no polymorphic causal candidates (MAF > 5%)");
  require(static_cast<int>(eligible.size()) >= n_causal,
          "make_architecture: only " + std::to_string(eligible.size()) +
              " markers have MAF > 5%, need " + std::to_string(n_causal));

  Rng rng = derive_rng(seed, "architecture");
  const std::vector<int> picks =
      rng.sample_without_replacement(static_cast<int>(eligible.size()), n_causal);
  TraitArchitecture arch;
  arch.sigma_e = sigma_e;
  arch.h2_target = h2_target;
  arch.causal_indices.reserve(static_cast<std::size_t>(n_causal));
  for (const int pick : picks) arch.causal_indices.push_back(eligible[static_cast<std::size_t>(pick)]);
  std::sort(arch.causal_indices.begin(), arch.causal_indices.end());

  arch.effects.resize(n_causal);
  for (int k = 0; k < n_causal; ++k) arch.effects(k) = rng.normal();
  const Eigen::VectorXd g = genetic_values(reference, arch);
  const double var_g =
      (g.array() - g.mean()).matrix().squaredNorm() / static_cast<double>(g.size() - 1);
  require(var_g > 0.0, "make_architecture: genetic values are constant in the reference");
  const double target_var = h2_target / (1.0 - h2_target) * sigma_e * sigma_e;
  arch.effects *= std::sqrt(target_var / var_g);
  return arch;
}

Eigen::VectorXd genetic_values(const MarkerMatrix& pop, const TraitArchitecture& arch) {
  require(arch.causal_indices.size() == static_cast<std::size_t>(arch.effects.size()),
          "genetic_values: effects do not match causal indices");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(pop.n());
  for (std::size_t k = 0; k < arch.causal_indices.size(); ++k) {
    const int j = arch.causal_indices[k];
    require(j >= 0 && j < pop.m(), "genetic_values: causal index out of range");
    g.noalias() += pop.counts.col(j) * arch.effects(static_cast<Eigen::Index>(k));
  }
  return g;
}

PhenotypeVector simulate_phenotypes(const MarkerMatrix& pop, const TraitArchitecture& arch,
                                    Rng& rng) {
  PhenotypeVector y;
  y.trait_name = "simulated";
  y.values = genetic_values(pop, arch);
  for (Eigen::Index i = 0; i < y.values.size(); ++i) {
    y.values(i) += arch.sigma_e * rng.normal();
  }
  return y;
}

PhenotypeVector simulate_phenotypes(const MarkerMatrix& pop, const TraitArchitecture& arch,
                                    std::uint64_t seed) {
  Rng rng = derive_rng(seed, "phenotypes");
  return simulate_phenotypes(pop, arch, rng);
}

HaplotypePopulation concat_populations(const std::vector<const HaplotypePopulation*>& parts) {
  require(!parts.empty(), "concat_populations: nothing to concatenate");
  Eigen::Index total = 0;
  for (const auto* part : parts) {
    require(part->marker_ids == parts[0]->marker_ids,
            "concat_populations: marker sets differ");
    total += part->size();
  }
  HaplotypePopulation out;
  out.map = parts[0]->map;
  out.marker_ids = parts[0]->marker_ids;
  out.h1.resize(total, parts[0]->h1.cols());
  out.h2.resize(total, parts[0]->h2.cols());
  Eigen::Index offset = 0;
  std::unordered_set<std::string> seen;
  for (const auto* part : parts) {
    out.h1.middleRows(offset, part->size()) = part->h1;
    out.h2.middleRows(offset, part->size()) = part->h2;
    for (const auto& id : part->individual_ids) {
      require(seen.insert(id).second, "concat_populations: duplicate individual id " + id);
      out.individual_ids.push_back(id);
    }
    offset += part->size();
  }
  return out;
}

SelectionResult run_selection_program(const HaplotypePopulation& founders,
                                      const TraitArchitecture& arch, const ElasticNetModel& model,
                                      const SelectionConfig& config, std::uint64_t seed,
                                      int threads) {
  require(config.n_rounds >= 1 && config.n_progeny >= 2 && config.n_sims >= 1,
          "run_selection_program: invalid configuration");
  require(config.n_selected >= 2 && config.n_selected < config.n_progeny,
          "run_selection_program: n_selected must lie in [2, n_progeny)");
  require(founders.size() >= 2, "run_selection_program: need at least 2 founders");

  const MarkerMatrix founder_geno = founders.genotypes();
  std::vector<int> all(static_cast<std::size_t>(founder_geno.n()));
  std::iota(all.begin(), all.end(), 0);
  const Eigen::VectorXd ancestral_p = allele_frequencies(founder_geno, all);

  SelectionResult result;
  result.records.resize(static_cast<std::size_t>(config.n_sims) *
                        static_cast<std::size_t>(config.n_rounds));
  std::vector<std::vector<CapturedGeneration>> captured_by_sim(
      static_cast<std::size_t>(config.n_sims));

  parallel_for(static_cast<std::size_t>(config.n_sims), threads, [&](std::size_t sim) {
    HaplotypePopulation parents = founders;
    for (int round = 1; round <= config.n_rounds; ++round) {
      Rng rng = derive_rng(seed, "selection_round",
                           {static_cast<std::uint64_t>(sim), static_cast<std::uint64_t>(round)});
      const std::string prefix =
          "sim" + std::to_string(sim) + "_g" + std::to_string(round);
      const HaplotypePopulation progeny =
          random_mate(parents, config.n_progeny, rng, prefix);
      const MarkerMatrix geno = progeny.genotypes();
      const PhenotypeVector pheno = simulate_phenotypes(geno, arch, rng);

      SelectionRecord rec;
      rec.sim = static_cast<int>(sim);
      rec.generation = round;
      rec.fst = estimate_fst(build_allele_frequency_set(ancestral_p, geno)).value;
      const Eigen::VectorXd pred = predict(model, geno);
      const Eigen::VectorXd pc = pred.array() - pred.mean();
      const Eigen::VectorXd tc = pheno.values.array() - pheno.values.mean();
      const double sp2 = pc.squaredNorm();
      const double st2 = tc.squaredNorm();
      rec.rho = (sp2 > 0.0 && st2 > 0.0) ? pc.dot(tc) / std::sqrt(sp2 * st2) : kNaN;
      rec.mean_g = genetic_values(geno, arch).mean();
      result.records[sim * static_cast<std::size_t>(config.n_rounds) +
                     static_cast<std::size_t>(round - 1)] = rec;

      if (sim == 0 && round <= config.capture_rounds) {
        captured_by_sim[0].push_back({progeny, pheno});
      }

      // truncation selection: largest phenotypes become the next parents
      std::vector<int> order(static_cast<std::size_t>(config.n_progeny));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&pheno](int a, int b) {
        return pheno.values(a) > pheno.values(b);
      });
      order.resize(static_cast<std::size_t>(config.n_selected));
      std::sort(order.begin(), order.end());
      parents = progeny.subset(order);
    }
  });
  result.captured = std::move(captured_by_sim[0]);

  result.rounds.reserve(static_cast<std::size_t>(config.n_rounds));
  for (int round = 1; round <= config.n_rounds; ++round) {
    SelectionRound mean_row;
    mean_row.generation = round;
    double fst_sum = 0.0, rho_sum = 0.0, g_sum = 0.0;
    int rho_n = 0;
    for (int sim = 0; sim < config.n_sims; ++sim) {
      const SelectionRecord& rec =
          result.records[static_cast<std::size_t>(sim) * static_cast<std::size_t>(config.n_rounds) +
                         static_cast<std::size_t>(round - 1)];
      fst_sum += rec.fst;
      g_sum += rec.mean_g;
      if (!std::isnan(rec.rho)) {
        rho_sum += rec.rho;
        ++rho_n;
      }
    }
    mean_row.mean_fst = fst_sum / config.n_sims;
    mean_row.mean_genetic_value = g_sum / config.n_sims;
    mean_row.mean_rho = rho_n > 0 ? rho_sum / rho_n : kNaN;
    result.rounds.push_back(mean_row);
  }
  return result;
}

std::pair<MarkerMatrix, PhenotypeVector> augment_training(
    const MarkerMatrix& founders, const PhenotypeVector& founder_pheno,
    const std::vector<CapturedGeneration>& generations) {
  require(founder_pheno.values.size() == founders.n(), "augment_training: phenotype length mismatch");
  Eigen::Index total = founders.n();
  std::vector<MarkerMatrix> gen_geno;
  gen_geno.reserve(generations.size());
  for (const auto& gen : generations) {
    gen_geno.push_back(gen.population.genotypes());
    require(gen_geno.back().marker_ids == founders.marker_ids,
            "augment_training: marker sets differ between blocks");
    require(gen.phenotypes.values.size() == gen_geno.back().n(),
            "augment_training: generation phenotype length mismatch");
    total += gen_geno.back().n();
  }
  MarkerMatrix geno;
  geno.marker_ids = founders.marker_ids;
  geno.counts.resize(total, founders.m());
  PhenotypeVector pheno;
  pheno.trait_name = founder_pheno.trait_name;
  pheno.values.resize(total);

  geno.counts.topRows(founders.n()) = founders.counts;
  geno.individual_ids = founders.individual_ids;
  pheno.values.head(founders.n()) = founder_pheno.values;
  Eigen::Index offset = founders.n();
  for (std::size_t g = 0; g < generations.size(); ++g) {
    const MarkerMatrix& block = gen_geno[g];
    geno.counts.middleRows(offset, block.n()) = block.counts;
    geno.individual_ids.insert(geno.individual_ids.end(), block.individual_ids.begin(),
                               block.individual_ids.end());
    pheno.values.segment(offset, block.n()) = generations[g].phenotypes.values;
    offset += block.n();
  }
  {
    std::unordered_set<std::string> seen;
    for (const auto& id : geno.individual_ids) {
      require(seen.insert(id).second, "augment_training: duplicate individual id " + id);
    }
  }
  return {std::move(geno), std::move(pheno)};
}

std::vector<PhenotypeVector> crosspop_simulate(const std::vector<MarkerMatrix>& populations,
                                               int n_causal, double h2, std::uint64_t seed,
                                               TraitArchitecture* arch_out) {
  require(!populations.empty(), "crosspop_simulate: no populations");
  for (std::size_t i = 1; i < populations.size(); ++i) {
    require(populations[i].marker_ids == populations[0].marker_ids,
            "crosspop_simulate: populations must share the marker set");
  }
  const TraitArchitecture arch =
      make_architecture(populations[0], n_causal, h2, 1.0, derive_rng(seed, "crosspop_arch").next_u64());
  std::vector<PhenotypeVector> out;
  out.reserve(populations.size());
  for (std::size_t i = 0; i < populations.size(); ++i) {
    Rng rng = derive_rng(seed, "crosspop_pheno", {static_cast<std::uint64_t>(i)});
    out.push_back(simulate_phenotypes(populations[i], arch, rng));
  }
  if (arch_out) *arch_out = arch;
  return out;
}

}  // namespace decaykit
