#pragma once

// Baseline Shannon estimators (nats) used to cross-check the matrix-based
// Renyi trends. Both are brute force O(N^2) and suffer from the curse of
// dimensionality; callers should keep dimension small (the CLI caps d at 16).

#include "privae/gram.hpp"

#include <cstddef>
#include <string_view>

namespace privae {

inline constexpr std::size_t kDefaultKnnK = 3;
inline constexpr long kMaxClassicDimension = 16;

/// Relative magnitude of the deterministic jitter applied when duplicate
/// points would give a zero neighbor distance.
inline constexpr double kTieJitter = 1e-10;

/// Kozachenko-Leonenko estimate:
///   psi(N) - psi(k) + log c_D + (D/N) sum_i log eps_i
/// with eps_i the Euclidean distance to the k-th neighbor and c_D the volume
/// of the unit D-ball.
double knn_entropy(const Matrix& data, std::size_t k = kDefaultKnnK);

struct KdeBandwidth {
  /// Silverman's rule applied to the sample covariance:
  /// H = (multiple * (4 / ((D + 2) N))^(1 / (D + 4)))^2 * Cov.
  double multiple = 1.0;
};

/// Leave-one-out resubstitution estimate -(1/N) sum_i log p_{-i}(x_i) with a
/// Gaussian kernel. A relative ridge keeps rank-deficient covariances usable.
double kde_entropy(const Matrix& data, const KdeBandwidth& bandwidth = {});

enum class ClassicEstimator { knn, kde };

ClassicEstimator parse_classic_estimator(std::string_view name);

/// sum_j H(z_j) - H(z) with the chosen estimator.
double classic_total_correlation(const Matrix& z, ClassicEstimator estimator,
                                 std::size_t k = kDefaultKnnK);

}  // namespace privae
