#pragma once

#include "privae/gram.hpp"
#include "privae/renyi.hpp"
#include "privae/vae.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace privae {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(std::span<ad::Parameter> params, const AdamConfig& cfg);
  /// Applies one update from the accumulated gradients, then clears them.
  void step();
  std::size_t steps_taken() const { return t_; }

 private:
  std::span<ad::Parameter> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::size_t t_ = 0;
};

struct InfoPlaneConfig {
  std::size_t samples = 6400;  // split into batches of `batch`, each a random subset
  std::size_t batch = 64;
  KernelSpec kernel = KernelSpec::median(1.0);
  std::vector<double> alphas = {kDefaultAlpha};
  /// Rows of the sampled latents kept on each record (for offline estimators).
  std::size_t keep_latents = 0;
};

struct InfoPlaneRecord {
  std::size_t step = 0;
  std::vector<InfoPlanePoint> points;  // one per alpha
  double recon_loss = 0.0;             // negative Bernoulli log-likelihood, nats per image
  double total_loss = 0.0;
  Matrix latents;                      // first keep_latents sampled z rows
};

struct TrainConfig {
  vae::LossSpec loss;
  AdamConfig adam;
  std::size_t steps = 0;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  /// Info-plane cadence; 0 disables measurement.
  std::size_t log_every = 0;
  bool force = false;
  /// N in the minibatch density weights; 0 uses the number of images.
  std::size_t dataset_size = 0;
  InfoPlaneConfig info;
};

struct TrainResult {
  std::vector<InfoPlaneRecord> records;
  std::vector<std::string> warnings;
  std::size_t steps_completed = 0;
  bool diverged = false;
  std::string divergence;  // message naming the non-finite term
  /// Index into records of the last record taken before divergence, or -1.
  long last_good_record = -1;
};

using RecordCallback = std::function<void(const InfoPlaneRecord&)>;

/// Trains `model` on the rows of `images` (values in [0, 1]). Records are taken
/// at step 0, every log_every steps, and after the final step. A non-finite
/// loss stops training and is reported through TrainResult::diverged rather
/// than thrown.
TrainResult train(vae::VaeModel& model, const Matrix& images, const TrainConfig& cfg,
                  const RecordCallback& on_record = {});

/// Latent measurement used by train(): draws cfg.samples / cfg.batch random
/// batches of `images`, encodes them with sampled z, and averages the
/// info-plane quantities.
InfoPlaneRecord measure_info_plane(const vae::VaeModel& model, const Matrix& images,
                                   const InfoPlaneConfig& cfg, std::uint64_t seed);

/// Posterior means for every row of `images`.
Matrix encode_means(const vae::VaeModel& model, const Matrix& images);
/// One reparameterized sample per row of `images`.
Matrix encode_samples(const vae::VaeModel& model, const Matrix& images, std::uint64_t seed);

ad::Tensor to_tensor(const Matrix& m);

}  // namespace privae
