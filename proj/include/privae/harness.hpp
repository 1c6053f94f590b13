#pragma once

// Library side of the `privae` command line tool. Every command is a plain
// function so tests and the acceptance runner drive the same code paths as
// the executable.

#include "privae/config.hpp"
#include "privae/metrics.hpp"
#include "privae/pri.hpp"
#include "privae/train.hpp"
#include "privae/vae.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace privae {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RunSummary {
  std::string loss;
  std::size_t steps_completed = 0;
  bool diverged = false;
  std::string divergence;
  double final_mig = kNaN;
  double recon_initial = kNaN;
  double recon_final = kNaN;
  double pearson_i_t = kNaN;  // nan when undefined (constant or too short series)
  std::size_t i_peak_step = 0;
  bool i_final_below_peak = false;
  std::size_t t_peak_step = 0;
  bool t_final_below_peak = false;
  double latent_std = kNaN;  // mean per-dimension std of sampled z over the dataset

  void write(std::ostream& out) const;
  static RunSummary read(const std::filesystem::path& path);
};

struct TrainRun {
  vae::VaeModel model;
  TrainResult result;
  RunSummary summary;
  std::optional<MigResult> mig;
};

/// Trains on the factor grid as described by `cfg`; no files are written.
TrainRun run_training(const RunConfig& cfg, const RecordCallback& on_record = {});
/// Writes config.txt, info_plane.csv, summary.txt and model.ckpt into cfg.out.
void write_training_outputs(const RunConfig& cfg, const TrainRun& run);

/// Exit codes: 0 success, 2 usage or configuration error, 3 training diverged.
int cmd_train(const RunConfig& cfg, std::ostream& log);

/// Two interleaving half circles with Gaussian noise.
Matrix two_moons(std::size_t n, double noise, std::uint64_t seed);
Matrix isotropic_gaussian(std::size_t n, std::size_t dims, std::uint64_t seed);
/// Resolves cfg.pri_data (two_moons, gaussian3d, or a CSV file).
Matrix pri_dataset(const RunConfig& cfg);

struct PriSweepReport {
  Matrix data;
  double sigma = 0.0;
  std::vector<PriRun> runs;
  std::vector<double> entropy_bits;  // Renyi entropy of each converged cloud at width sigma
};

PriSweepReport run_pri_sweep(const Matrix& x, const RunConfig& cfg);
void write_pri_outputs(const RunConfig& cfg, const PriSweepReport& report);
int cmd_pri(const RunConfig& cfg, std::ostream& log);

/// Mean distance from each row of y to its nearest row of x.
double mean_nearest_distance(const Matrix& y, const Matrix& x);
/// RMS per-coordinate standard deviation of a cloud (0 for a single point).
double cloud_stddev(const Matrix& y);

struct EstimateOptions {
  std::vector<std::filesystem::path> files;
  std::string quantity = "entropy";  // entropy, mi, tc
  std::string estimator = "renyi";   // renyi, knn, kde
  double alpha = kDefaultAlpha;
  KernelSpec kernel = KernelSpec::median(1.0);
  std::size_t k = 3;
  std::size_t batch = 0;  // Renyi only: average over consecutive batches; 0 = all rows
  std::filesystem::path out;  // optional CSV
};

struct EstimateResult {
  double value = 0.0;
  std::string units;
};
EstimateResult run_estimate(const EstimateOptions& opt);
/// Prints a one-row table and writes opt.out when set. Nonzero on error.
int cmd_estimate(const EstimateOptions& opt, std::ostream& out, std::ostream& err);

/// Merges summaries of several run directories into out/compare.csv,
/// out/compare_runs.txt and out/compare.svg. Needs at least two usable runs.
int cmd_compare(const std::vector<std::filesystem::path>& runs, const std::filesystem::path& out,
                std::ostream& log, std::ostream& err);

}  // namespace privae
