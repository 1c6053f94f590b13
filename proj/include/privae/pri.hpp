#pragma once

// Principle of Relevant Information on point clouds. The variable cloud Y
// trades its own Renyi quadratic entropy against its Cauchy-Schwarz style
// cross term with the fixed data X, both estimated with Parzen windows:
//
//   J(Y) = -(1 - gamma) log IP(Y) - 2 gamma log CIP(Y, X)
//   IP(Y)     = 1/M^2  sum_ij G(y_i - y_j)
//   CIP(Y, X) = 1/(MN) sum_ij G(y_i - x_j)
//
// with G the Gaussian density of width sigma * sqrt(2). gamma = 0 collapses Y
// to a point, gamma = 1 is mean shift toward the modes of X, and large gamma
// returns the data itself.

#include "privae/gram.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace privae {

struct PointCloud {
  Matrix points;  // rows are points
  std::size_t generation = 0;
};

enum class PriMode { fixed_point, gradient_descent };

struct PriConfig {
  double gamma = 1.0;
  double sigma = 1.0;
  std::size_t max_iters = 500;
  double tol = 1e-6;  // on mean point displacement per iteration
  PriMode mode = PriMode::fixed_point;
  double step = 0.1;  // gradient_descent only

  void validate() const;
};

double pri_objective(const Matrix& y, const Matrix& x, const PriConfig& cfg);
/// dJ/dY, same shape as y.
Matrix pri_gradient(const Matrix& y, const Matrix& x, const PriConfig& cfg);

/// One synchronous update of every point.
///
/// Fixed-point mode solves the stationarity condition of J for y_k:
///   gamma > 0: y_k <- m_X(y_k) + c (1 - gamma)/gamma * sum_j G_kj (y_j - y_k) / sum_j G(y_k - x_j)
///              with m_X the mean-shift target over X and c = sum G(Y,X) / sum G(Y,Y)
///   gamma = 0: y_k <- sum_j G_kj y_j / sum_j G_kj (blurring mean shift)
PointCloud pri_step(const PointCloud& y, const Matrix& x, const PriConfig& cfg);

struct PriRun {
  double gamma = 0.0;
  PointCloud result;
  std::vector<double> objective;       // index 0 is the initial cloud
  std::vector<Matrix> trajectory;      // clouds at recorded iterations, index 0 initial
  std::vector<std::size_t> recorded;   // iteration number of each trajectory entry
  bool converged = false;
};

struct SweepOptions {
  std::uint64_t seed = 0;
  /// Keep every n-th iterate in PriRun::trajectory; 0 keeps none.
  std::size_t record_every = 0;
};

/// Iterates pri_step from `start` until the mean displacement drops below
/// cfg.tol or cfg.max_iters is reached.
PriRun pri_run(const Matrix& start, const Matrix& x, const PriConfig& cfg,
               std::size_t record_every = 0);

/// One run per gamma, each from Y0 = X + N(0, (sigma/10)^2) jitter drawn with
/// the same seed.
std::vector<PriRun> pri_sweep(const Matrix& x, std::span<const double> gammas,
                              const PriConfig& base, const SweepOptions& options = {});

/// Initial cloud used by pri_sweep.
Matrix jittered_start(const Matrix& x, double sigma, std::uint64_t seed);

/// RMS per-coordinate standard deviation of the data; tol defaults scale with it.
double data_scale(const Matrix& x);

}  // namespace privae
