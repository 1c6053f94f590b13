#include "privae/pri.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace privae {

namespace {

// Unnormalized kernel values exp(-|a_i - b_j|^2 / (2 s^2)) with s^2 = 2 sigma^2.
Eigen::MatrixXd kernel_matrix(const Matrix& a, const Matrix& b, double sigma) {
  const double inv = 1.0 / (4.0 * sigma * sigma);
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      k(i, j) = std::exp(-(a.row(i) - b.row(j)).squaredNorm() * inv);
    }
  }
  return k;
}

double log_kernel_norm(double sigma, Eigen::Index dims) {
  const double s2 = 2.0 * sigma * sigma;
  return -0.5 * static_cast<double>(dims) * std::log(2.0 * std::numbers::pi * s2);
}

void check_shapes(const Matrix& y, const Matrix& x) {
  if (x.rows() == 0) throw std::invalid_argument("PRI: data cloud X is empty");
  if (y.rows() == 0) throw std::invalid_argument("PRI: variable cloud Y is empty");
  if (y.cols() != x.cols()) {
    throw std::invalid_argument("PRI: Y has dimension " + std::to_string(y.cols()) +
                                " but X has " + std::to_string(x.cols()));
  }
  if (!y.allFinite() || !x.allFinite()) throw std::invalid_argument("PRI: non-finite points");
}

[[noreturn]] void underflow(const char* what) {
  throw std::domain_error(std::string("PRI: ") + what +
                          " underflowed to zero; increase the kernel width sigma");
}

}  // namespace

void PriConfig::validate() const {
  if (!(gamma >= 0.0)) throw std::invalid_argument("PriConfig: gamma must be >= 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("PriConfig: sigma must be > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("PriConfig: tol must be > 0");
  if (mode == PriMode::gradient_descent && !(step > 0.0)) {
    throw std::invalid_argument("PriConfig: gradient step must be > 0");
  }
}

double pri_objective(const Matrix& y, const Matrix& x, const PriConfig& cfg) {
  cfg.validate();
  check_shapes(y, x);
  const double m = static_cast<double>(y.rows());
  const double n = static_cast<double>(x.rows());
  const double norm = log_kernel_norm(cfg.sigma, x.cols());
  const double sum_yy = kernel_matrix(y, y, cfg.sigma).sum();
  const double sum_yx = kernel_matrix(y, x, cfg.sigma).sum();
  if (!(sum_yy > 0.0)) underflow("information potential IP(Y)");
  if (!(sum_yx > 0.0)) underflow("cross information potential CIP(Y, X)");
  const double log_ip = std::log(sum_yy) - 2.0 * std::log(m) + norm;
  const double log_cip = std::log(sum_yx) - std::log(m) - std::log(n) + norm;
  return -(1.0 - cfg.gamma) * log_ip - 2.0 * cfg.gamma * log_cip;
}

Matrix pri_gradient(const Matrix& y, const Matrix& x, const PriConfig& cfg) {
  cfg.validate();
  check_shapes(y, x);
  const double s2 = 2.0 * cfg.sigma * cfg.sigma;
  const Eigen::MatrixXd gyy = kernel_matrix(y, y, cfg.sigma);
  const Eigen::MatrixXd gyx = kernel_matrix(y, x, cfg.sigma);
  const double sum_yy = gyy.sum();
  const double sum_yx = gyx.sum();
  if (!(sum_yy > 0.0)) underflow("information potential IP(Y)");
  if (!(sum_yx > 0.0)) underflow("cross information potential CIP(Y, X)");

  // d log IP / d y_k = (2/s^2) sum_j G_kj (y_j - y_k) / sum G(Y,Y)
  // d log CIP / d y_k = (1/s^2) sum_j G(y_k - x_j)(x_j - y_k) / sum G(Y,X)
  const Eigen::VectorXd wy = gyy.rowwise().sum();
  const Eigen::VectorXd wx = gyx.rowwise().sum();
  const Matrix pull_y = gyy * y - wy.asDiagonal() * y;
  const Matrix pull_x = gyx * x - wx.asDiagonal() * y;
  return -(1.0 - cfg.gamma) * (2.0 / (s2 * sum_yy)) * pull_y -
         2.0 * cfg.gamma * (1.0 / (s2 * sum_yx)) * pull_x;
}

PointCloud pri_step(const PointCloud& cloud, const Matrix& x, const PriConfig& cfg) {
  cfg.validate();
  const Matrix& y = cloud.points;
  check_shapes(y, x);
  PointCloud next{Matrix(), cloud.generation + 1};

  if (cfg.mode == PriMode::gradient_descent) {
    next.points = y - cfg.step * pri_gradient(y, x, cfg);
    return next;
  }

  const Eigen::MatrixXd gyy = kernel_matrix(y, y, cfg.sigma);
  const Eigen::VectorXd wy = gyy.rowwise().sum();
  if (cfg.gamma == 0.0) {
    if ((wy.array() <= 0.0).any()) underflow("fixed-point denominator");
    next.points = (gyy * y).array().colwise() / wy.array();
    return next;
  }

  const Eigen::MatrixXd gyx = kernel_matrix(y, x, cfg.sigma);
  const Eigen::VectorXd wx = gyx.rowwise().sum();
  if ((wx.array() <= 0.0).any()) underflow("fixed-point denominator");
  const double c = gyx.sum() / gyy.sum();
  const double weight = c * (1.0 - cfg.gamma) / cfg.gamma;
  const Matrix shift_x = gyx * x;
  const Matrix pull_y = gyy * y - wy.asDiagonal() * y;
  next.points = (shift_x + weight * pull_y).array().colwise() / wx.array();
  return next;
}

PriRun pri_run(const Matrix& start, const Matrix& x, const PriConfig& cfg,
               std::size_t record_every) {
  cfg.validate();
  PriRun run;
  run.gamma = cfg.gamma;
  run.result = PointCloud{start, 0};
  run.objective.push_back(pri_objective(start, x, cfg));
  if (record_every > 0) {
    run.trajectory.push_back(start);
    run.recorded.push_back(0);
  }
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    PointCloud next = pri_step(run.result, x, cfg);
    if (!next.points.allFinite()) {
      throw std::domain_error("PRI: iterate became non-finite at iteration " + std::to_string(it));
    }
    const double displacement =
        (next.points - run.result.points).rowwise().norm().mean();
    run.result = std::move(next);
    run.objective.push_back(pri_objective(run.result.points, x, cfg));
    if (record_every > 0 && it % record_every == 0) {
      run.trajectory.push_back(run.result.points);
      run.recorded.push_back(it);
    }
    if (displacement < cfg.tol) {
      run.converged = true;
      break;
    }
  }
  if (record_every > 0 && run.recorded.back() != run.result.generation) {
    run.trajectory.push_back(run.result.points);
    run.recorded.push_back(run.result.generation);
  }
  return run;
}

Matrix jittered_start(const Matrix& x, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma / 10.0);
  Matrix y = x;
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] += noise(rng);
  return y;
}

double data_scale(const Matrix& x) {
  if (x.rows() < 2) return 1.0;
  const Eigen::RowVectorXd mu = x.colwise().mean();
  const double var = (x.rowwise() - mu).array().square().sum() /
                     static_cast<double>((x.rows() - 1) * x.cols());
  return var > 0.0 ? std::sqrt(var) : 1.0;
}

std::vector<PriRun> pri_sweep(const Matrix& x, std::span<const double> gammas,
                              const PriConfig& base, const SweepOptions& options) {
  if (gammas.empty()) throw std::invalid_argument("pri_sweep: gamma list is empty");
  base.validate();
  const Matrix start = jittered_start(x, base.sigma, options.seed);
  std::vector<PriRun> runs;
  runs.reserve(gammas.size());
  for (double g : gammas) {
    PriConfig cfg = base;
    cfg.gamma = g;
    runs.push_back(pri_run(start, x, cfg, options.record_every));
  }
  return runs;
}

}  // namespace privae
