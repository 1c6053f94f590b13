#include "privae/classic.hpp"

#include <Eigen/Cholesky>
#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace privae {

namespace {

constexpr double kCovarianceRidge = 1e-9;

double log_unit_ball_volume(double dims) {
  return 0.5 * dims * std::log(std::numbers::pi) - std::lgamma(0.5 * dims + 1.0);
}

// Distance from each point to its k-th nearest neighbor (self excluded).
std::vector<double> kth_neighbor_distances(const Matrix& data, std::size_t k) {
  const Eigen::Index n = data.rows();
  std::vector<double> eps(static_cast<std::size_t>(n));
  std::vector<double> row(static_cast<std::size_t>(n - 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) row[c++] = (data.row(i) - data.row(j)).squaredNorm();
    }
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    eps[static_cast<std::size_t>(i)] = std::sqrt(row[k - 1]);
  }
  return eps;
}

Matrix jittered(const Matrix& data) {
  const double scale = std::max(1.0, data.cwiseAbs().maxCoeff());
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> noise(0.0, kTieJitter * scale);
  Matrix out = data;
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] += noise(rng);
  return out;
}

}  // namespace

double knn_entropy(const Matrix& data, std::size_t k) {
  const auto n = static_cast<std::size_t>(data.rows());
  if (k < 1) throw std::invalid_argument("knn_entropy: k must be >= 1");
  if (n <= k) {
    throw std::invalid_argument("knn_entropy: need more than k = " + std::to_string(k) +
                                " samples, got " + std::to_string(n));
  }
  if (!data.allFinite()) throw std::invalid_argument("knn_entropy: non-finite data");

  std::vector<double> eps = kth_neighbor_distances(data, k);
  if (std::any_of(eps.begin(), eps.end(), [](double e) { return e == 0.0; })) {
    eps = kth_neighbor_distances(jittered(data), k);
    if (std::any_of(eps.begin(), eps.end(), [](double e) { return e == 0.0; })) {
      throw std::domain_error("knn_entropy: zero neighbor distance after tie jitter");
    }
  }

  const double dims = static_cast<double>(data.cols());
  double log_sum = 0.0;
  for (double e : eps) log_sum += std::log(e);
  return boost::math::digamma(static_cast<double>(n)) -
         boost::math::digamma(static_cast<double>(k)) + log_unit_ball_volume(dims) +
         dims * log_sum / static_cast<double>(n);
}

double kde_entropy(const Matrix& data, const KdeBandwidth& bandwidth) {
  const Eigen::Index n = data.rows();
  const Eigen::Index dims = data.cols();
  if (n < 2) throw std::invalid_argument("kde_entropy: need at least 2 samples");
  if (!data.allFinite()) throw std::invalid_argument("kde_entropy: non-finite data");
  if (!(bandwidth.multiple > 0.0)) throw std::invalid_argument("kde_entropy: multiple must be > 0");

  const Eigen::RowVectorXd mu = data.colwise().mean();
  const Matrix centered = data.rowwise() - mu;
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  const double mean_var = cov.trace() / static_cast<double>(dims);
  if (!(mean_var > 0.0)) throw std::domain_error("kde_entropy: degenerate data (zero variance)");
  cov.diagonal().array() += kCovarianceRidge * mean_var;

  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw std::domain_error("kde_entropy: covariance not SPD");
  const Eigen::MatrixXd lower = llt.matrixL();
  // Whitened samples: y = L^{-1} (x - mu); H(x) = H(y) + log det L.
  const Matrix white = lower.triangularView<Eigen::Lower>().solve(centered.transpose()).transpose();
  double log_det_l = 0.0;
  for (Eigen::Index d = 0; d < dims; ++d) log_det_l += std::log(lower(d, d));

  const double dd = static_cast<double>(dims);
  const double h = bandwidth.multiple *
                   std::pow(4.0 / ((dd + 2.0) * static_cast<double>(n)), 1.0 / (dd + 4.0));
  const double inv_two_h2 = 1.0 / (2.0 * h * h);
  const double log_norm =
      -0.5 * dd * std::log(2.0 * std::numbers::pi) - dd * std::log(h) -
      std::log(static_cast<double>(n - 1));

  double total = 0.0;
  std::vector<double> logk(static_cast<std::size_t>(n - 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t c = 0;
    double peak = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double v = -(white.row(i) - white.row(j)).squaredNorm() * inv_two_h2;
      logk[c++] = v;
      peak = std::max(peak, v);
    }
    double acc = 0.0;
    for (double v : logk) acc += std::exp(v - peak);
    total += peak + std::log(acc) + log_norm;
  }
  return -total / static_cast<double>(n) + log_det_l;
}

ClassicEstimator parse_classic_estimator(std::string_view name) {
  if (name == "knn") return ClassicEstimator::knn;
  if (name == "kde") return ClassicEstimator::kde;
  throw std::invalid_argument("unknown classic estimator '" + std::string(name) +
                              "' (expected knn or kde)");
}

double classic_total_correlation(const Matrix& z, ClassicEstimator estimator, std::size_t k) {
  if (z.cols() < 2) throw std::invalid_argument("classic_total_correlation: need d >= 2");
  auto h = [&](const Matrix& m) {
    return estimator == ClassicEstimator::knn ? knn_entropy(m, k) : kde_entropy(m);
  };
  double marginal = 0.0;
  for (Eigen::Index j = 0; j < z.cols(); ++j) marginal += h(Matrix(z.col(j)));
  return marginal - h(z);
}

}  // namespace privae
