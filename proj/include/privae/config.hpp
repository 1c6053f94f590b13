#pragma once

// Flat `key = value` run configuration. '#' starts a comment, blank lines
// are ignored, unknown keys and malformed values are errors that name the
// offending line.

#include "privae/gram.hpp"
#include "privae/vae.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace privae {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  // objective
  vae::LossSpec loss = vae::LossSpec::beta_vae(4.0);
  bool force = false;

  // training
  std::uint64_t seed = 0;
  std::size_t steps = 5000;
  std::size_t batch_size = 64;
  std::size_t log_every = 100;
  double lr = 1e-4;
  std::size_t latent_dim = 10;
  std::size_t dataset_size = 0;  // density weighting N; 0 = number of images

  // measurement
  std::size_t info_samples = 6400;
  std::size_t info_batch = 64;
  std::vector<double> alphas = {1.01};
  KernelSpec kernel = KernelSpec::median(1.0);
  std::size_t mig_bins = 20;
  std::size_t smooth_window = 3;
  std::size_t keep_latents = 0;

  // PRI sweep
  std::string pri_data = "two_moons";  // two_moons, gaussian3d, or a CSV path
  std::size_t pri_samples = 500;
  std::vector<double> gammas = {0.0, 1.0, 2.0, 5.0, 100.0};
  KernelSpec pri_kernel = KernelSpec::median(1.0);
  std::size_t pri_max_iters = 500;
  double pri_tol = 1e-6;  // relative to the data scale
  std::size_t pri_record_every = 10;

  std::filesystem::path out = "run";

  /// Throws ConfigError("<source>:<line>: ...") on the first problem.
  static RunConfig parse(std::istream& in, const std::string& source = "config");
  static RunConfig load(const std::filesystem::path& path);

  /// Every key with its resolved value, in a stable order. parse(write(c)) == c.
  void write(std::ostream& out) const;
};

std::vector<double> parse_double_list(const std::string& text);
KernelSpec parse_kernel(const std::string& text, double multiple);
std::string format_kernel(const KernelSpec& k);

}  // namespace privae
