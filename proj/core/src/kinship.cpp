#include "decaykit/kinship.hpp"

#include <cmath>
#include <unordered_set>

#include "decaykit/csv.hpp"
#include "decaykit/error.hpp"

namespace decaykit {

KinshipMatrix allelic_kinship(const Eigen::MatrixXd& x_std,
                              std::vector<std::string> individual_ids) {
  require(x_std.cols() >= 1, "allelic_kinship: need at least one marker");
  for (Eigen::Index j = 0; j < x_std.cols(); ++j) {
    if (std::fabs(x_std.col(j).mean()) > 1e-6) {
      throw Error("allelic_kinship: input is not column-standardized (column " +
                  std::to_string(j) + " has nonzero mean)");
    }
  }
  KinshipMatrix out;
  const double m = static_cast<double>(x_std.cols());
  out.k.noalias() = (x_std * x_std.transpose()) / m;
  // symmetrize away accumulation-order noise
  out.k = ((out.k + out.k.transpose()) * 0.5).eval();
  if (individual_ids.empty()) {
    individual_ids.reserve(static_cast<std::size_t>(x_std.rows()));
    for (Eigen::Index i = 0; i < x_std.rows(); ++i) {
      individual_ids.push_back("ind" + std::to_string(i));
    }
  }
  require(static_cast<Eigen::Index>(individual_ids.size()) == x_std.rows(),
          "allelic_kinship: id count does not match rows");
  out.individual_ids = std::move(individual_ids);
  return out;
}

double mean_cross_kinship(const KinshipMatrix& kin, const std::vector<int>& set_a,
                          const std::vector<int>& set_b) {
  require(!set_a.empty() && !set_b.empty(), "mean_cross_kinship: empty set");
  std::unordered_set<int> a_members(set_a.begin(), set_a.end());
  for (const int j : set_b) {
    require(!a_members.count(j), "mean_cross_kinship: sets overlap at index " + std::to_string(j));
  }
  double acc = 0.0;
  for (const int i : set_a) {
    require(i >= 0 && i < kin.k.rows(), "mean_cross_kinship: index out of range");
    for (const int j : set_b) {
      require(j >= 0 && j < kin.k.rows(), "mean_cross_kinship: index out of range");
      acc += kin.k(i, j);
    }
  }
  return acc / (static_cast<double>(set_a.size()) * static_cast<double>(set_b.size()));
}

double euclidean_distance_sq(const Eigen::MatrixXd& x_std, Eigen::Index i, Eigen::Index j) {
  require(i >= 0 && i < x_std.rows() && j >= 0 && j < x_std.rows(),
          "euclidean_distance_sq: index out of range");
  return (x_std.row(i) - x_std.row(j)).squaredNorm();
}

void save_kinship_csv(const std::string& path, const KinshipMatrix& kin) {
  CsvTable table;
  table.header.push_back("id");
  table.header.insert(table.header.end(), kin.individual_ids.begin(), kin.individual_ids.end());
  for (Eigen::Index i = 0; i < kin.k.rows(); ++i) {
    std::vector<std::string> row;
    row.reserve(static_cast<std::size_t>(kin.k.cols()) + 1);
    row.push_back(kin.individual_ids[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < kin.k.cols(); ++j) row.push_back(format_double(kin.k(i, j)));
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

}  // namespace decaykit
