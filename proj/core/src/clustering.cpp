#include "decaykit/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "decaykit/error.hpp"
#include "decaykit/rng.hpp"

namespace decaykit {

std::string PopulationSplit::to_json_string(const std::vector<std::string>& individual_ids) const {
  auto ids_of = [&individual_ids](const std::vector<int>& idx) {
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (const int i : idx) out.push_back(individual_ids[static_cast<std::size_t>(i)]);
    return out;
  };
  nlohmann::json j;
  j["training"] = ids_of(training);
  j["target"] = ids_of(target);
  j["fst0"] = fst0;
  return j.dump(2) + "\n";
}

namespace {

struct LloydResult {
  std::vector<int> assignment;
  double wcss = std::numeric_limits<double>::infinity();
};

LloydResult lloyd_k2(const Eigen::MatrixXd& x, int max_iter, Rng& rng) {
  const Eigen::Index n = x.rows();
  // Forgy init: two distinct random rows
  const auto i0 = static_cast<Eigen::Index>(rng.uniform_int(0, n - 1));
  Eigen::Index i1 = i0;
  while (i1 == i0) i1 = static_cast<Eigen::Index>(rng.uniform_int(0, n - 1));
  Eigen::MatrixXd centers(2, x.cols());
  centers.row(0) = x.row(i0);
  centers.row(1) = x.row(i1);

  const Eigen::VectorXd row_sq = x.rowwise().squaredNorm();
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  Eigen::VectorXd d0(n), d1(n);
  for (int iter = 0; iter < max_iter; ++iter) {
    d0 = row_sq - 2.0 * (x * centers.row(0).transpose()) +
         Eigen::VectorXd::Constant(n, centers.row(0).squaredNorm());
    d1 = row_sq - 2.0 * (x * centers.row(1).transpose()) +
         Eigen::VectorXd::Constant(n, centers.row(1).squaredNorm());
    bool changed = false;
    Eigen::Index n0 = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int a = d0(i) <= d1(i) ? 0 : 1;
      if (a != assignment[static_cast<std::size_t>(i)]) {
        assignment[static_cast<std::size_t>(i)] = a;
        changed = true;
      }
      n0 += (a == 0);
    }
    if (n0 == 0 || n0 == n) {
      // collapsed: reseat the empty center at the point farthest from the other
      const Eigen::VectorXd& d_live = (n0 == 0) ? d1 : d0;
      Eigen::Index far = 0;
      d_live.maxCoeff(&far);
      assignment[static_cast<std::size_t>(far)] = (n0 == 0) ? 0 : 1;
      changed = true;
      n0 = (n0 == 0) ? 1 : n0 - 1;
    }
    centers.setZero();
    Eigen::Index c0 = 0, c1 = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (assignment[static_cast<std::size_t>(i)] == 0) {
        centers.row(0) += x.row(i);
        ++c0;
      } else {
        centers.row(1) += x.row(i);
        ++c1;
      }
    }
    centers.row(0) /= static_cast<double>(c0);
    centers.row(1) /= static_cast<double>(c1);
    if (!changed) break;
  }

  LloydResult out;
  out.assignment = std::move(assignment);
  out.wcss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.wcss += (x.row(i) - centers.row(out.assignment[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return out;
}

}  // namespace

PopulationSplit kmeans_split(const MarkerMatrix& m, const Eigen::MatrixXd& x_std,
                             const KmeansOptions& options, std::uint64_t seed) {
  const Eigen::Index n = x_std.rows();
  require(n >= 4, "kmeans_split: need at least 4 individuals");
  require(m.n() == n, "kmeans_split: matrix and standardized rows disagree");
  require(options.n_starts >= 1 && options.max_iter >= 1, "kmeans_split: invalid options");
  {
    bool all_identical = true;
    for (Eigen::Index i = 1; i < n && all_identical; ++i) {
      all_identical = (x_std.row(i) - x_std.row(0)).squaredNorm() == 0.0;
    }
    require(!all_identical, "kmeans_split: degenerate input (all profiles identical)");
  }

  LloydResult best;
  for (int start = 0; start < options.n_starts; ++start) {
    Rng rng = derive_rng(seed, "kmeans_start", {static_cast<std::uint64_t>(start)});
    LloydResult res = lloyd_k2(x_std, options.max_iter, rng);
    if (res.wcss < best.wcss) best = std::move(res);
  }

  std::vector<int> cluster0, cluster1;
  for (Eigen::Index i = 0; i < n; ++i) {
    (best.assignment[static_cast<std::size_t>(i)] == 0 ? cluster0 : cluster1)
        .push_back(static_cast<int>(i));
  }
  // larger cluster trains; tie -> the cluster holding the lower first index
  bool zero_trains;
  if (cluster0.size() != cluster1.size()) {
    zero_trains = cluster0.size() > cluster1.size();
  } else {
    zero_trains = cluster0.front() < cluster1.front();
  }
  PopulationSplit split;
  split.training = zero_trains ? std::move(cluster0) : std::move(cluster1);
  split.target = zero_trains ? std::move(cluster1) : std::move(cluster0);
  split.fst0 = estimate_fst(m, split.training, split.target).value;
  return split;
}

PopulationSplit rebalance_split(const PopulationSplit& split, const MarkerMatrix& m,
                                int target_n_ta) {
  require(target_n_ta >= 3, "rebalance_split: target size below 3");
  require(target_n_ta <= static_cast<int>(split.target.size()),
          "rebalance_split: target size exceeds current target subsample");
  PopulationSplit current = split;
  while (static_cast<int>(current.target.size()) > target_n_ta) {
    double best_fst = -std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t t = 0; t < current.target.size(); ++t) {
      std::vector<int> training = current.training;
      training.push_back(current.target[t]);
      std::vector<int> target;
      target.reserve(current.target.size() - 1);
      for (std::size_t u = 0; u < current.target.size(); ++u) {
        if (u != t) target.push_back(current.target[u]);
      }
      const double f = estimate_fst(m, training, target).value;
      if (f > best_fst) {
        best_fst = f;
        best_idx = t;
      }
    }
    current.training.push_back(current.target[best_idx]);
    current.target.erase(current.target.begin() + static_cast<std::ptrdiff_t>(best_idx));
    std::sort(current.training.begin(), current.training.end());
    current.fst0 = best_fst;
  }
  return current;
}

}  // namespace decaykit
