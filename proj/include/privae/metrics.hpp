#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace privae {

inline constexpr std::size_t kDefaultMigBins = 20;

struct MigResult {
  double score = 0.0;
  std::vector<double> per_factor;       // gap / H(v_k) for each scored factor
  std::vector<std::size_t> scored;      // factor columns that were scored
  std::vector<std::string> warnings;    // skipped constant factors
};

/// Equal-count bin index of every value: bin = floor(rank * bins / N), where
/// tied values share the smallest rank of their group.
std::vector<int> equal_count_bins(std::span<const double> values, std::size_t bins);

/// Discrete mutual information (nats) between two label vectors.
double discrete_mutual_information(std::span<const int> a, std::span<const int> b);
double discrete_entropy(std::span<const int> labels);

/// Mutual Information Gap. Latents are discretized into `bins` equal-count
/// bins; per factor, (I(z_j*; v) - I(z_j**; v)) / H(v) with j* the best and
/// j** the runner-up latent (ties go to the lower index). Constant factors
/// are skipped with a warning; if every factor is constant this throws.
MigResult mig(const Eigen::MatrixXd& latent_means, const Eigen::MatrixXi& factors,
              std::size_t bins = kDefaultMigBins);

/// Sample Pearson correlation. Throws on unequal length, fewer than 3 points,
/// or a constant series.
double pearson(std::span<const double> a, std::span<const double> b);

struct PhaseReport {
  std::size_t peak_index = 0;
  bool final_below_peak = false;  // final smoothed value more than 5% under the peak
  std::vector<double> smoothed;
};

/// Centered moving average of half-width `smooth_window` (truncated at the
/// ends), then the global maximum (first occurrence).
PhaseReport phase_detect(std::span<const double> series, std::size_t smooth_window);

/// Least-squares slope of series against its index.
double trend_slope(std::span<const double> series);

}  // namespace privae
