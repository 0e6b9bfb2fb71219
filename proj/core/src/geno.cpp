#include "decaykit/geno.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "decaykit/csv.hpp"
#include "decaykit/error.hpp"

namespace decaykit {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

void check_unique(const std::vector<std::string>& ids, const char* what) {
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) throw Error(std::string("duplicate ") + what + " id: " + id);
  }
}

}  // namespace

Eigen::Index MarkerMatrix::n_missing() const {
  return counts.array().isNaN().count();
}

void MarkerMatrix::validate() const {
  require(counts.rows() == static_cast<Eigen::Index>(individual_ids.size()),
          "MarkerMatrix: row count does not match individual ids");
  require(counts.cols() == static_cast<Eigen::Index>(marker_ids.size()),
          "MarkerMatrix: column count does not match marker ids");
  check_unique(marker_ids, "marker");
  check_unique(individual_ids, "individual");
  for (Eigen::Index j = 0; j < counts.cols(); ++j) {
    for (Eigen::Index i = 0; i < counts.rows(); ++i) {
      const double v = counts(i, j);
      if (std::isnan(v)) continue;
      if (v != 0.0 && v != 1.0 && v != 2.0) {
        throw Error("invalid allele count " + format_double(v) + " for marker " + marker_ids[j] +
                    ", individual " + individual_ids[i]);
      }
    }
  }
}

MarkerMatrix MarkerMatrix::subset_rows(const std::vector<int>& rows) const {
  MarkerMatrix out;
  out.counts.resize(static_cast<Eigen::Index>(rows.size()), counts.cols());
  out.individual_ids.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require(rows[r] >= 0 && rows[r] < counts.rows(), "subset_rows: index out of range");
    out.counts.row(static_cast<Eigen::Index>(r)) = counts.row(rows[r]);
    out.individual_ids.push_back(individual_ids[static_cast<std::size_t>(rows[r])]);
  }
  out.marker_ids = marker_ids;
  return out;
}

std::string QCReport::to_json_string() const {
  nlohmann::json j;
  j["removed_maf"] = removed_maf;
  j["removed_missing"] = removed_missing;
  j["removed_ld"] = removed_ld;
  j["imputed_cells"] = imputed_cells;
  return j.dump(2) + "\n";
}

MarkerMatrix load_genotypes(const std::string& path) {
  const CsvTable table = read_csv(path);
  require(!table.header.empty() && table.header[0] == "id",
          "genotype file " + path + ": header must start with 'id'");
  const std::size_t m = table.header.size() - 1;
  require(m >= 1, "genotype file " + path + ": no marker columns");
  MarkerMatrix out;
  out.marker_ids.assign(table.header.begin() + 1, table.header.end());
  out.counts.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(m));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line_no = r + 2;  // 1-based, after header
    if (row.size() != m + 1) {
      throw Error("genotype file " + path + ": line " + std::to_string(line_no) + " has " +
                  std::to_string(row.size()) + " fields, expected " + std::to_string(m + 1));
    }
    out.individual_ids.push_back(row[0]);
    for (std::size_t c = 0; c < m; ++c) {
      const std::string& cell = row[c + 1];
      double v;
      if (cell.empty() || cell == "NA") {
        v = kMissing;
      } else if (cell == "0") {
        v = 0.0;
      } else if (cell == "1") {
        v = 1.0;
      } else if (cell == "2") {
        v = 2.0;
      } else {
        throw Error("genotype file " + path + ": line " + std::to_string(line_no) +
                    ": invalid allele count '" + cell + "' (expected 0, 1, 2, NA or empty)");
      }
      out.counts(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  out.validate();
  return out;
}

PhenotypeVector load_phenotypes(const std::string& path, const MarkerMatrix& aligned_to) {
  const CsvTable table = read_csv(path);
  require(table.header.size() == 2 && table.header[0] == "id",
          "phenotype file " + path + ": expected header 'id,<trait>'");
  if (table.rows.size() != aligned_to.individual_ids.size()) {
    throw Error("phenotype file " + path + ": " + std::to_string(table.rows.size()) +
                " rows do not match " + std::to_string(aligned_to.individual_ids.size()) +
                " genotyped individuals");
  }
  std::unordered_map<std::string, double> by_id;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    require(row.size() == 2,
            "phenotype file " + path + ": line " + std::to_string(r + 2) + " malformed");
    double v;
    try {
      v = std::stod(row[1]);
    } catch (const std::exception&) {
      throw Error("phenotype file " + path + ": line " + std::to_string(r + 2) +
                  ": cannot parse value '" + row[1] + "'");
    }
    require(std::isfinite(v), "phenotype file " + path + ": non-finite value for id " + row[0]);
    require(by_id.emplace(row[0], v).second,
            "phenotype file " + path + ": duplicate id " + row[0]);
  }
  PhenotypeVector out;
  out.trait_name = table.header[1];
  out.values.resize(static_cast<Eigen::Index>(aligned_to.individual_ids.size()));
  for (std::size_t i = 0; i < aligned_to.individual_ids.size(); ++i) {
    const auto it = by_id.find(aligned_to.individual_ids[i]);
    if (it == by_id.end()) {
      throw Error("phenotype file " + path + ": no value for individual " +
                  aligned_to.individual_ids[i]);
    }
    out.values(static_cast<Eigen::Index>(i)) = it->second;
  }
  return out;
}

std::pair<MarkerMatrix, std::optional<PhenotypeVector>> load_dataset(
    const std::string& genotype_path, const std::optional<std::string>& phenotype_path) {
  MarkerMatrix m = load_genotypes(genotype_path);
  std::optional<PhenotypeVector> y;
  if (phenotype_path) y = load_phenotypes(*phenotype_path, m);
  return {std::move(m), std::move(y)};
}

void save_genotypes(const std::string& path, const MarkerMatrix& m) {
  CsvTable table;
  table.header.push_back("id");
  table.header.insert(table.header.end(), m.marker_ids.begin(), m.marker_ids.end());
  table.rows.reserve(static_cast<std::size_t>(m.n()));
  for (Eigen::Index i = 0; i < m.n(); ++i) {
    std::vector<std::string> row;
    row.reserve(static_cast<std::size_t>(m.m()) + 1);
    row.push_back(m.individual_ids[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < m.m(); ++j) {
      const double v = m.counts(i, j);
      row.push_back(std::isnan(v) ? "NA" : format_double(v));
    }
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

void save_phenotypes(const std::string& path, const MarkerMatrix& m, const PhenotypeVector& y) {
  require(y.values.size() == m.n(), "save_phenotypes: length mismatch");
  CsvTable table;
  table.header = {"id", y.trait_name.empty() ? "value" : y.trait_name};
  for (Eigen::Index i = 0; i < m.n(); ++i) {
    table.rows.push_back({m.individual_ids[static_cast<std::size_t>(i)],
                          format_double(y.values(i))});
  }
  write_csv(path, table);
}

namespace {

// MAF over non-missing cells; NaN if the marker has no data.
double minor_allele_frequency(const Eigen::VectorXd& col) {
  double sum = 0.0;
  Eigen::Index n_obs = 0;
  for (Eigen::Index i = 0; i < col.size(); ++i) {
    if (!std::isnan(col(i))) {
      sum += col(i);
      ++n_obs;
    }
  }
  if (n_obs == 0) return kMissing;
  const double freq = sum / (2.0 * static_cast<double>(n_obs));
  return std::min(freq, 1.0 - freq);
}

MarkerMatrix drop_columns(const MarkerMatrix& m, const std::vector<bool>& drop) {
  MarkerMatrix out;
  Eigen::Index kept = 0;
  for (std::size_t j = 0; j < drop.size(); ++j) {
    if (!drop[j]) ++kept;
  }
  out.counts.resize(m.n(), kept);
  out.marker_ids.reserve(static_cast<std::size_t>(kept));
  Eigen::Index c = 0;
  for (std::size_t j = 0; j < drop.size(); ++j) {
    if (drop[j]) continue;
    out.counts.col(c++) = m.counts.col(static_cast<Eigen::Index>(j));
    out.marker_ids.push_back(m.marker_ids[j]);
  }
  out.individual_ids = m.individual_ids;
  return out;
}

// Mean squared difference over individuals observed in both markers;
// infinity when they share none.
double marker_distance_sq(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double acc = 0.0;
  Eigen::Index overlap = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::isnan(a(i)) || std::isnan(b(i))) continue;
    const double d = a(i) - b(i);
    acc += d * d;
    ++overlap;
  }
  if (overlap == 0) return std::numeric_limits<double>::infinity();
  return acc / static_cast<double>(overlap);
}

double marker_mean(const Eigen::VectorXd& col) {
  double sum = 0.0;
  Eigen::Index n_obs = 0;
  for (Eigen::Index i = 0; i < col.size(); ++i) {
    if (!std::isnan(col(i))) {
      sum += col(i);
      ++n_obs;
    }
  }
  return n_obs > 0 ? sum / static_cast<double>(n_obs) : 1.0;
}

double round_to_allele_count(double v) {
  return std::clamp(std::round(v), 0.0, 2.0);
}

// Correlation over complete columns; 0 when either is constant.
double column_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double ma = a.mean();
  const double mb = b.mean();
  const Eigen::ArrayXd da = a.array() - ma;
  const Eigen::ArrayXd db = b.array() - mb;
  const double sa = (da * da).sum();
  const double sb = (db * db).sum();
  if (sa == 0.0 || sb == 0.0) return 0.0;
  return (da * db).sum() / std::sqrt(sa * sb);
}

}  // namespace

std::pair<MarkerMatrix, QCReport> qc_pipeline(const MarkerMatrix& m, const QcParams& params,
                                              [[maybe_unused]] std::uint64_t seed) {
  require(m.n() > 0 && m.m() > 0, "qc_pipeline: empty input");
  require(params.maf_min >= 0.0 && params.maf_min <= 0.5,
          "qc_pipeline: maf_min must lie in [0, 0.5]");
  require(params.missing_max >= 0.0 && params.missing_max <= 1.0,
          "qc_pipeline: missing_max must lie in [0, 1]");
  require(params.ld_r_max > 0.0 && params.ld_r_max <= 1.0,
          "qc_pipeline: ld_r_max must lie in (0, 1]");
  require(params.knn_k >= 1, "qc_pipeline: knn_k must be at least 1");

  QCReport report;

  // 1. MAF filter (strict <, computed over non-missing cells).
  std::vector<bool> drop(static_cast<std::size_t>(m.m()), false);
  for (Eigen::Index j = 0; j < m.m(); ++j) {
    const double maf = minor_allele_frequency(m.counts.col(j));
    if (std::isnan(maf) || maf < params.maf_min) {
      drop[static_cast<std::size_t>(j)] = true;
      report.removed_maf.push_back(m.marker_ids[static_cast<std::size_t>(j)]);
    }
  }
  MarkerMatrix cur = drop_columns(m, drop);

  // 2. Missingness filter (strict >).
  drop.assign(static_cast<std::size_t>(cur.m()), false);
  const double n_d = static_cast<double>(cur.n());
  for (Eigen::Index j = 0; j < cur.m(); ++j) {
    const double frac = static_cast<double>(cur.counts.col(j).array().isNaN().count()) / n_d;
    if (frac > params.missing_max) {
      drop[static_cast<std::size_t>(j)] = true;
      report.removed_missing.push_back(cur.marker_ids[static_cast<std::size_t>(j)]);
    }
  }
  cur = drop_columns(cur, drop);
  require(cur.m() > 0, "qc_pipeline: all markers removed");

  // 3. kNN imputation. Neighbours are the knn_k closest markers by mean
  //    squared difference over shared individuals; the imputed value is the
  //    mean of their observed values at the individual, rounded to {0,1,2}.
  //    Marker mean is the fallback when no neighbour informs the cell.
  std::vector<Eigen::Index> with_missing;
  for (Eigen::Index j = 0; j < cur.m(); ++j) {
    if (cur.counts.col(j).hasNaN()) with_missing.push_back(j);
  }
  if (!with_missing.empty()) {
    const Eigen::MatrixXd original = cur.counts;  // neighbours read pre-imputation values
    for (const Eigen::Index j : with_missing) {
      std::vector<std::pair<double, Eigen::Index>> dist;
      dist.reserve(static_cast<std::size_t>(cur.m()) - 1);
      for (Eigen::Index k = 0; k < cur.m(); ++k) {
        if (k == j) continue;
        const double d = marker_distance_sq(original.col(j), original.col(k));
        if (std::isfinite(d)) dist.emplace_back(d, k);
      }
      const std::size_t n_neighbours =
          std::min<std::size_t>(static_cast<std::size_t>(params.knn_k), dist.size());
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(n_neighbours),
                        dist.end());
      const double fallback = marker_mean(original.col(j));
      for (Eigen::Index i = 0; i < cur.n(); ++i) {
        if (!std::isnan(cur.counts(i, j))) continue;
        double sum = 0.0;
        int used = 0;
        for (std::size_t t = 0; t < n_neighbours; ++t) {
          const double v = original(i, dist[t].second);
          if (!std::isnan(v)) {
            sum += v;
            ++used;
          }
        }
        const double imputed = used > 0 ? sum / used : fallback;
        cur.counts(i, j) = round_to_allele_count(imputed);
        ++report.imputed_cells;
      }
    }
  }

  // 4. LD pruning: scan columns left to right, drop the later member of any
  //    pair with |r| above the threshold against an already-kept column.
  std::vector<Eigen::Index> kept;
  drop.assign(static_cast<std::size_t>(cur.m()), false);
  for (Eigen::Index j = 0; j < cur.m(); ++j) {
    bool pruned = false;
    for (const Eigen::Index k : kept) {
      if (std::fabs(column_correlation(cur.counts.col(k), cur.counts.col(j))) > params.ld_r_max) {
        pruned = true;
        break;
      }
    }
    if (pruned) {
      drop[static_cast<std::size_t>(j)] = true;
      report.removed_ld.push_back(cur.marker_ids[static_cast<std::size_t>(j)]);
    } else {
      kept.push_back(j);
    }
  }
  cur = drop_columns(cur, drop);
  require(cur.m() > 0, "qc_pipeline: all markers removed");
  return {std::move(cur), std::move(report)};
}

Eigen::MatrixXd standardize(const MarkerMatrix& m) {
  require(!m.has_missing(), "standardize: matrix contains missing cells");
  require(m.n() >= 2, "standardize: need at least 2 individuals");
  Eigen::MatrixXd x = m.counts;
  const double denom = static_cast<double>(m.n() - 1);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    x.col(j).array() -= mean;
    const double sd = std::sqrt(x.col(j).squaredNorm() / denom);
    if (sd == 0.0) {
      throw Error("standardize: zero-variance marker " +
                  m.marker_ids[static_cast<std::size_t>(j)]);
    }
    x.col(j) /= sd;
  }
  return x;
}

}  // namespace decaykit
