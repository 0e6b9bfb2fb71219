#include "decaykit/elastic_net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "json.hpp"

#include "decaykit/error.hpp"
#include "decaykit/parallel.hpp"
#include "decaykit/rng.hpp"
#include "decaykit/stats.hpp"

namespace decaykit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Design {
  Eigen::MatrixXd x;  // centered, population-sd scaled; zero-variance columns zeroed
  Eigen::VectorXd means;
  Eigen::VectorXd sds;  // 0 for zero-variance columns
};

Design standardize_population(const Eigen::MatrixXd& counts) {
  Design d;
  const Eigen::Index n = counts.rows();
  const Eigen::Index m = counts.cols();
  d.x.resize(n, m);
  d.means.resize(m);
  d.sds.resize(m);
  const double n_d = static_cast<double>(n);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double mean = counts.col(j).mean();
    d.means(j) = mean;
    Eigen::VectorXd centered = counts.col(j).array() - mean;
    const double sd = std::sqrt(centered.squaredNorm() / n_d);
    d.sds(j) = sd;
    if (sd > 0.0) {
      d.x.col(j) = centered / sd;
    } else {
      d.x.col(j).setZero();
    }
  }
  return d;
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double objective(const Eigen::VectorXd& residual, const Eigen::VectorXd& beta, double alpha,
                 double lambda, double n_d) {
  return residual.squaredNorm() / (2.0 * n_d) +
         lambda * (alpha * beta.template lpNorm<1>() + 0.5 * (1.0 - alpha) * beta.squaredNorm());
}

// Coordinate descent on a standardized design; yc is the centered response.
// beta is updated in place; returns the residual.
Eigen::VectorXd descend(const Design& d, const Eigen::VectorXd& yc, double alpha, double lambda,
                        Eigen::VectorXd& beta, const FitOptions& options) {
  const Eigen::Index n = d.x.rows();
  const Eigen::Index m = d.x.cols();
  const double n_d = static_cast<double>(n);
  const double l1 = lambda * alpha;
  const double l2 = lambda * (1.0 - alpha);

  Eigen::VectorXd residual = yc - d.x * beta;
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (d.sds(j) == 0.0) continue;
      const double old = beta(j);
      // column has (1/n) x_j'x_j == 1 by construction
      const double z = d.x.col(j).dot(residual) / n_d + old;
      const double updated = soft_threshold(z, l1) / (1.0 + l2);
      const double delta = updated - old;
      if (delta != 0.0) {
        residual.noalias() -= delta * d.x.col(j);
        beta(j) = updated;
        max_delta = std::max(max_delta, std::fabs(delta));
      }
    }
    if (options.objective_trace) {
      options.objective_trace->push_back(objective(residual, beta, alpha, lambda, n_d));
    }
    if (max_delta < options.tol) break;
  }
  return residual;
}

void check_fit_inputs(const MarkerMatrix& x, const PhenotypeVector& y, double alpha,
                      double lambda) {
  require(x.n() >= 2, "fit: need at least 2 individuals");
  require(!x.has_missing(), "fit: genotypes contain missing cells");
  require(y.values.size() == x.n(), "fit: phenotype length does not match individuals");
  require(y.values.allFinite(), "fit: phenotypes must be finite");
  require(alpha >= 0.0 && alpha <= 1.0, "fit: alpha outside [0, 1]");
  require(lambda >= 0.0, "fit: lambda must be non-negative");
}

}  // namespace

ElasticNetModel fit(const MarkerMatrix& x, const PhenotypeVector& y, double alpha, double lambda,
                    const FitOptions& options) {
  check_fit_inputs(x, y, alpha, lambda);
  const Design d = standardize_population(x.counts);
  const double mu = y.values.mean();
  const Eigen::VectorXd yc = y.values.array() - mu;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.m());
  if (options.warm_start) {
    require(options.warm_start->size() == x.m(), "fit: warm start length mismatch");
    beta = *options.warm_start;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
      if (d.sds(j) == 0.0) beta(j) = 0.0;
    }
  }
  descend(d, yc, alpha, lambda, beta, options);

  ElasticNetModel model;
  model.intercept = mu;
  model.beta = std::move(beta);
  model.alpha = alpha;
  model.lambda = lambda;
  model.marker_ids = x.marker_ids;
  model.means = d.means;
  model.sds = d.sds;
  return model;
}

Eigen::VectorXd predict(const ElasticNetModel& model, const MarkerMatrix& x_new) {
  require(!x_new.has_missing(), "predict: genotypes contain missing cells");
  std::unordered_map<std::string, Eigen::Index> col_of;
  col_of.reserve(x_new.marker_ids.size());
  for (std::size_t j = 0; j < x_new.marker_ids.size(); ++j) {
    col_of.emplace(x_new.marker_ids[j], static_cast<Eigen::Index>(j));
  }
  std::string absent;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> align;  // (model col, x_new col)
  for (std::size_t j = 0; j < model.marker_ids.size(); ++j) {
    const auto it = col_of.find(model.marker_ids[j]);
    if (it == col_of.end()) {
      if (!absent.empty()) absent += ", ";
      absent += model.marker_ids[j];
      continue;
    }
    align.emplace_back(static_cast<Eigen::Index>(j), it->second);
  }
  if (!absent.empty()) throw Error("predict: markers absent from input: " + absent);

  Eigen::VectorXd y_hat = Eigen::VectorXd::Constant(x_new.n(), model.intercept);
  for (const auto& [mj, cj] : align) {
    const double b = model.beta(mj);
    if (b == 0.0 || model.sds(mj) == 0.0) continue;
    y_hat.noalias() +=
        (x_new.counts.col(cj).array() - model.means(mj)).matrix() * (b / model.sds(mj));
  }
  return y_hat;
}

double lambda_max(const MarkerMatrix& x, const PhenotypeVector& y, double alpha) {
  require(alpha > 0.0, "lambda_max: alpha must be positive");
  check_fit_inputs(x, y, alpha, 0.0);
  const Design d = standardize_population(x.counts);
  const Eigen::VectorXd yc = y.values.array() - y.values.mean();
  const double z = (d.x.transpose() * yc).cwiseAbs().maxCoeff();
  return z / (static_cast<double>(x.n()) * alpha);
}

double kkt_max_violation(const ElasticNetModel& model, const MarkerMatrix& x,
                         const PhenotypeVector& y) {
  const Design d = standardize_population(x.counts);
  const Eigen::VectorXd residual =
      (y.values.array() - model.intercept).matrix() - d.x * model.beta;
  const double n_d = static_cast<double>(x.n());
  const double l1 = model.lambda * model.alpha;
  const double l2 = model.lambda * (1.0 - model.alpha);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < model.beta.size(); ++j) {
    if (d.sds(j) == 0.0) continue;
    const double grad = d.x.col(j).dot(residual) / n_d;
    const double b = model.beta(j);
    if (b == 0.0) {
      worst = std::max(worst, std::fabs(grad) - l1);  // negative when satisfied
    } else {
      worst = std::max(worst, std::fabs(grad - l1 * (b > 0 ? 1.0 : -1.0) - l2 * b));
    }
  }
  return std::max(worst, 0.0);
}

namespace {

std::vector<double> lambda_path(double lam_max, int n_lambda, double min_ratio) {
  std::vector<double> path(static_cast<std::size_t>(n_lambda));
  if (n_lambda == 1) {
    path[0] = lam_max;
    return path;
  }
  const double log_max = std::log(lam_max);
  const double log_min = std::log(lam_max * min_ratio);
  for (int i = 0; i < n_lambda; ++i) {
    path[static_cast<std::size_t>(i)] =
        std::exp(log_max + (log_min - log_max) * static_cast<double>(i) /
                               static_cast<double>(n_lambda - 1));
  }
  return path;
}

}  // namespace

CVResult tune_cv(const MarkerMatrix& x, const PhenotypeVector& y, const CvGrid& grid,
                 std::uint64_t seed, int threads) {
  require(grid.n_folds >= 2, "tune_cv: need at least 2 folds");
  require(x.n() >= grid.n_folds, "tune_cv: fewer individuals than folds");
  require(!grid.alphas.empty() && grid.n_lambda >= 1 && grid.n_runs >= 1,
          "tune_cv: empty grid");
  check_fit_inputs(x, y, grid.alphas.front(), 0.0);
  {
    const Eigen::VectorXd yc = y.values.array() - y.values.mean();
    require(yc.squaredNorm() > 0.0, "tune_cv: constant phenotype (correlation undefined)");
  }

  const Eigen::Index n = x.n();
  const std::size_t n_alphas = grid.alphas.size();
  const std::size_t n_lambda = static_cast<std::size_t>(grid.n_lambda);

  // per-alpha lambda path from the full data (alpha floored at 0.1)
  std::vector<std::vector<double>> paths(n_alphas);
  for (std::size_t a = 0; a < n_alphas; ++a) {
    const double alpha_eff = std::max(grid.alphas[a], 0.1);
    paths[a] = lambda_path(lambda_max(x, y, alpha_eff), grid.n_lambda, grid.lambda_min_ratio);
  }

  // fold assignment per run: shuffled indices dealt round-robin
  std::vector<std::vector<int>> fold_of_run(static_cast<std::size_t>(grid.n_runs));
  for (int run = 0; run < grid.n_runs; ++run) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng = derive_rng(seed, "cv_folds", {static_cast<std::uint64_t>(run)});
    rng.shuffle(order);
    std::vector<int> fold(static_cast<std::size_t>(n));
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      fold[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % static_cast<std::size_t>(grid.n_folds));
    }
    fold_of_run[static_cast<std::size_t>(run)] = std::move(fold);
  }

  // task = (alpha, run, fold): one warm-started path fit, one rho per lambda
  const std::size_t n_tasks =
      n_alphas * static_cast<std::size_t>(grid.n_runs) * static_cast<std::size_t>(grid.n_folds);
  std::vector<std::vector<double>> task_rho(n_tasks);  // NaN = undefined correlation

  parallel_for(n_tasks, threads, [&](std::size_t task) {
    const std::size_t a = task / static_cast<std::size_t>(grid.n_runs * grid.n_folds);
    const std::size_t rest = task % static_cast<std::size_t>(grid.n_runs * grid.n_folds);
    const int run = static_cast<int>(rest) / grid.n_folds;
    const int fold = static_cast<int>(rest) % grid.n_folds;
    const double alpha = grid.alphas[a];

    std::vector<int> train_rows, test_rows;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (fold_of_run[static_cast<std::size_t>(run)][static_cast<std::size_t>(i)] == fold) {
        test_rows.push_back(static_cast<int>(i));
      } else {
        train_rows.push_back(static_cast<int>(i));
      }
    }

    Eigen::MatrixXd counts_tr(train_rows.size(), x.m());
    Eigen::VectorXd y_tr(train_rows.size());
    for (std::size_t r = 0; r < train_rows.size(); ++r) {
      counts_tr.row(static_cast<Eigen::Index>(r)) = x.counts.row(train_rows[r]);
      y_tr(static_cast<Eigen::Index>(r)) = y.values(train_rows[r]);
    }
    Eigen::MatrixXd counts_te(test_rows.size(), x.m());
    Eigen::VectorXd y_te(test_rows.size());
    for (std::size_t r = 0; r < test_rows.size(); ++r) {
      counts_te.row(static_cast<Eigen::Index>(r)) = x.counts.row(test_rows[r]);
      y_te(static_cast<Eigen::Index>(r)) = y.values(test_rows[r]);
    }

    const Design d = standardize_population(counts_tr);
    const double mu = y_tr.mean();
    const Eigen::VectorXd yc = y_tr.array() - mu;

    // standardize held-out with training stats
    Eigen::MatrixXd x_te = counts_te;
    for (Eigen::Index j = 0; j < x_te.cols(); ++j) {
      if (d.sds(j) > 0.0) {
        x_te.col(j) = (x_te.col(j).array() - d.means(j)) / d.sds(j);
      } else {
        x_te.col(j).setZero();
      }
    }

    std::vector<double>& rho_out = task_rho[task];
    rho_out.assign(n_lambda, kNaN);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.m());
    FitOptions opts;
    for (std::size_t li = 0; li < n_lambda; ++li) {
      descend(d, yc, alpha, paths[a][li], beta, opts);
      const Eigen::VectorXd pred = Eigen::VectorXd::Constant(x_te.rows(), mu) + x_te * beta;
      if (pred.size() >= 3) {
        const Eigen::VectorXd pc = pred.array() - pred.mean();
        const Eigen::VectorXd tc = y_te.array() - y_te.mean();
        const double sp = pc.squaredNorm();
        const double st = tc.squaredNorm();
        if (sp > 0.0 && st > 0.0) rho_out[li] = pc.dot(tc) / std::sqrt(sp * st);
      }
    }
  });

  CVResult result;
  result.n_runs = grid.n_runs;
  result.n_folds = grid.n_folds;
  result.grid.reserve(n_alphas * n_lambda);
  const int min_valid = (grid.n_runs * grid.n_folds + 1) / 2;
  double best = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t a = 0; a < n_alphas; ++a) {
    for (std::size_t li = 0; li < n_lambda; ++li) {
      double sum = 0.0;
      int valid = 0;
      for (int run = 0; run < grid.n_runs; ++run) {
        for (int fold = 0; fold < grid.n_folds; ++fold) {
          const std::size_t task =
              a * static_cast<std::size_t>(grid.n_runs * grid.n_folds) +
              static_cast<std::size_t>(run * grid.n_folds + fold);
          const double r = task_rho[task][li];
          if (!std::isnan(r)) {
            sum += r;
            ++valid;
          }
        }
      }
      CVResult::Cell cell;
      cell.alpha = grid.alphas[a];
      cell.lambda = paths[a][li];
      cell.mean_rho = valid >= min_valid ? sum / valid : kNaN;
      result.grid.push_back(cell);
      if (std::isnan(cell.mean_rho)) continue;
      const bool better =
          !found || cell.mean_rho > best ||
          (cell.mean_rho == best &&
           (cell.lambda < result.best_lambda ||
            (cell.lambda == result.best_lambda && cell.alpha < result.best_alpha)));
      if (better) {
        found = true;
        best = cell.mean_rho;
        result.best_alpha = cell.alpha;
        result.best_lambda = cell.lambda;
        result.best_mean_rho = cell.mean_rho;
      }
    }
  }
  require(found, "tune_cv: no grid cell produced a defined held-out correlation");
  return result;
}

double predictive_correlation(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  return pearson(y_true, y_pred);
}

double pev(double rho, double var_y) {
  require(std::fabs(rho) <= 1.0, "pev: |rho| must not exceed 1");
  require(var_y >= 0.0, "pev: variance must be non-negative");
  return (1.0 - rho * rho) * var_y;
}

std::string ElasticNetModel::to_json_string() const {
  nlohmann::json j;
  j["intercept"] = intercept;
  j["alpha"] = alpha;
  j["lambda"] = lambda;
  nlohmann::json coefs = nlohmann::json::array();
  for (Eigen::Index k = 0; k < beta.size(); ++k) {
    if (beta(k) == 0.0) continue;
    coefs.push_back({{"marker", marker_ids[static_cast<std::size_t>(k)]},
                     {"beta", beta(k)},
                     {"mean", means(k)},
                     {"sd", sds(k)}});
  }
  j["coefficients"] = std::move(coefs);
  return j.dump(2) + "\n";
}

ElasticNetModel ElasticNetModel::from_json_string(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ElasticNetModel model;
  model.intercept = j.at("intercept").get<double>();
  model.alpha = j.at("alpha").get<double>();
  model.lambda = j.at("lambda").get<double>();
  const auto& coefs = j.at("coefficients");
  const Eigen::Index m = static_cast<Eigen::Index>(coefs.size());
  model.beta.resize(m);
  model.means.resize(m);
  model.sds.resize(m);
  Eigen::Index k = 0;
  for (const auto& c : coefs) {
    model.marker_ids.push_back(c.at("marker").get<std::string>());
    model.beta(k) = c.at("beta").get<double>();
    model.means(k) = c.at("mean").get<double>();
    model.sds(k) = c.at("sd").get<double>();
    ++k;
  }
  return model;
}

}  // namespace decaykit
