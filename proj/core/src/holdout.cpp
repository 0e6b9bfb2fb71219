#include "decaykit/holdout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "decaykit/csv.hpp"
#include "decaykit/error.hpp"
#include "decaykit/fst.hpp"
#include "decaykit/parallel.hpp"

namespace decaykit {

std::vector<HoldoutResult> holdout_cv(const MarkerMatrix& data, const PhenotypeVector& pheno,
                                      int n_tr, int n_ta, int n_reps, const PenaltyChoice& tuned,
                                      std::uint64_t seed, int threads) {
  require(n_tr >= 2 && n_ta >= 3, "holdout_cv: need n_tr >= 2 and n_ta >= 3");
  require(n_tr + n_ta <= static_cast<int>(data.n()),
          "holdout_cv: n_tr + n_ta exceeds the population");
  require(n_reps >= 1, "holdout_cv: need at least one replicate");
  require(pheno.values.size() == data.n(), "holdout_cv: phenotype length mismatch");

  std::vector<HoldoutResult> out(static_cast<std::size_t>(n_reps));
  parallel_for(static_cast<std::size_t>(n_reps), threads, [&](std::size_t rep) {
    Rng rng = derive_rng(seed, "holdout", {static_cast<std::uint64_t>(rep)});
    std::vector<int> order(static_cast<std::size_t>(data.n()));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    PopulationSplit split;
    split.training.assign(order.begin(), order.begin() + n_tr);
    split.target.assign(order.begin() + n_tr, order.begin() + n_tr + n_ta);
    std::sort(split.training.begin(), split.training.end());
    std::sort(split.target.begin(), split.target.end());

    HoldoutResult res;
    res.replicate = static_cast<int>(rep);
    res.n_tr = n_tr;
    res.n_ta = n_ta;
    res.fst = estimate_fst(data, split.training, split.target).value;

    const MarkerMatrix x_tr = data.subset_rows(split.training);
    PhenotypeVector y_tr;
    y_tr.values.resize(n_tr);
    for (int i = 0; i < n_tr; ++i) y_tr.values(i) = pheno.values(split.training[static_cast<std::size_t>(i)]);
    const ElasticNetModel model = fit(x_tr, y_tr, tuned.alpha, tuned.lambda);

    const MarkerMatrix x_ta = data.subset_rows(split.target);
    const Eigen::VectorXd pred = predict(model, x_ta);
    Eigen::VectorXd y_ta(n_ta);
    for (int i = 0; i < n_ta; ++i) y_ta(i) = pheno.values(split.target[static_cast<std::size_t>(i)]);
    const Eigen::VectorXd pc = pred.array() - pred.mean();
    const Eigen::VectorXd tc = y_ta.array() - y_ta.mean();
    const double sp2 = pc.squaredNorm();
    const double st2 = tc.squaredNorm();
    res.rho_cv = (sp2 > 0.0 && st2 > 0.0) ? pc.dot(tc) / std::sqrt(sp2 * st2)
                                          : std::numeric_limits<double>::quiet_NaN();
    out[rep] = res;
  });
  return out;
}

void write_holdout_csv(const std::string& path, const std::vector<HoldoutResult>& results) {
  CsvTable table;
  table.header = {"replicate", "fst", "rho_cv"};
  for (const HoldoutResult& r : results) {
    table.rows.push_back({std::to_string(r.replicate), format_double(r.fst),
                          format_double(r.rho_cv)});
  }
  write_csv(path, table);
}

}  // namespace decaykit
