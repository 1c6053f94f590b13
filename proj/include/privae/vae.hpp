#pragma once

// Gaussian-encoder / Bernoulli-decoder VAE with the family of objectives that
// regularize the aggregate posterior q(z): ELBO, beta-VAE, annealed VAE,
// InfoVAE, beta-TCVAE, PRI-VAE and their starred variants.
//
// All objectives are written as a quantity to maximize. `loss` in
// LossBreakdown is its negation, ready for gradient descent.

#include "privae/autodiff.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace privae::vae {

using ad::Tensor;

inline constexpr double kLogVarMin = -20.0;
inline constexpr double kLogVarMax = 2.0;

struct Architecture {
  std::size_t input_dim = 256;
  std::vector<std::size_t> hidden = {256, 128};  // decoder mirrors this list
  std::size_t latent_dim = 10;
};

class VaeModel {
 public:
  VaeModel(const Architecture& arch, std::uint64_t seed);

  struct Encoding {
    Tensor mu;      // [M, d]
    Tensor logvar;  // [M, d], clamped to [kLogVarMin, kLogVarMax]
  };
  Encoding encode(const Tensor& x) const;
  Tensor decode_logits(const Tensor& z) const;

  const Architecture& architecture() const { return arch_; }
  std::size_t latent_dim() const { return arch_.latent_dim; }
  std::span<ad::Parameter> parameters() { return params_; }
  std::span<const ad::Parameter> parameters() const { return params_; }

  /// Replaces parameter values by name. Every parameter must be supplied with
  /// a matching shape.
  void load_parameters(std::span<const ad::Parameter> values);

 private:
  struct Layer {
    std::size_t weight;  // index into params_, [in, out]
    std::size_t bias;    // [out]
  };
  Tensor apply(const std::vector<Layer>& layers, Tensor h) const;

  Architecture arch_;
  std::vector<ad::Parameter> params_;
  std::vector<Layer> encoder_;
  std::vector<Layer> decoder_;
};

enum class LossKind {
  elbo,
  beta_vae,
  annealed_vae,
  info_vae,
  beta_tcvae,
  pri_vae,
  pri_vae_star,
  beta_tcvae_star,
};

LossKind parse_loss_kind(std::string_view name);
std::string_view loss_kind_name(LossKind kind);

/// Weights of one objective. Which fields matter depends on `kind`:
///   elbo             recon - KL
///   beta_vae         recon - beta KL
///   annealed_vae     recon - gamma |KL - C(t)|, C ramps linearly 0 -> c_max over c_steps
///   info_vae         recon - lambda KL(q(z)||p(z))
///   beta_tcvae       recon - (I(x;z) + beta TC + dimwise KL)
///   pri_vae          recon - alpha H(z) - beta KL(q(z)||p(z))
///   pri_vae_star     pri_vae - gamma TC
///   beta_tcvae_star  recon - H(z) - beta TC - dimwise KL
struct LossSpec {
  LossKind kind = LossKind::elbo;
  double alpha = 0.0;
  double beta = 1.0;
  double gamma = 0.0;
  double lambda = 0.0;
  double c_max = 0.0;
  std::size_t c_steps = 0;

  static LossSpec elbo();
  static LossSpec beta_vae(double beta);
  static LossSpec annealed_vae(double gamma, double c_max, std::size_t c_steps);
  static LossSpec info_vae(double lambda);
  static LossSpec beta_tcvae(double beta);
  static LossSpec pri_vae(double alpha, double beta);
  static LossSpec pri_vae_star(double alpha, double beta, double gamma);
  static LossSpec beta_tcvae_star(double beta);

  std::string describe() const;
  bool needs_densities() const;

  /// Throws on invalid weights. For the PRI objectives, beta <= alpha makes
  /// the latent entropy term dominate and is refused unless `force`; any
  /// beta < 2 alpha is reported as a warning.
  std::vector<std::string> validate(bool force) const;
};

/// z = mu + exp(logvar / 2) * eps with eps ~ N(0, I) from `rng`.
Tensor reparameterized_sample(const Tensor& mu, const Tensor& logvar, std::mt19937_64& rng);

/// Per-sample KL(N(mu, diag(exp(logvar))) || N(0, I)), shape [M].
Tensor gaussian_kl_closed_form(const Tensor& mu, const Tensor& logvar);

/// Elementwise log N(z; mu, exp(logvar)), broadcasting.
Tensor gaussian_log_density(const Tensor& z, const Tensor& mu, const Tensor& logvar);

/// Log densities evaluated at each sample s. Marginal densities may be
/// estimates (minibatch) or exact (enumeration).
struct DensityEstimates {
  Tensor log_q_z_given_x;  // [S]     log q(z_s | x_s)
  Tensor log_q_z;          // [S]     log q(z_s)
  Tensor log_q_z_dims;     // [S, d]  log q(z_sj)
  Tensor log_p_z;          // [S]     log p(z_s)
  Tensor log_p_z_dims;     // [S, d]  log p(z_sj)
};

/// Minibatch weighted sampling with dataset size N and batch size M:
///   log q(z_i) ~ logsumexp_j log q(z_i | x_j) - log(N M)
/// and likewise per dimension. The estimator is biased by the constant
/// -log N relative to the plain batch mixture; the decomposition identities
/// are unaffected because the constant cancels inside every difference.
DensityEstimates minibatch_weighted_densities(const Tensor& z, const Tensor& mu,
                                              const Tensor& logvar, std::size_t dataset_size);

/// Expectations under per-sample weights (summing to one):
///   mutual_info  E[log q(z|x) - log q(z)]
///   marginal_kl  E[log q(z) - log p(z)]
///   total_corr   E[log q(z) - sum_j log q(z_j)]
///   dimwise_kl   sum_j E[log q(z_j) - log p(z_j)]
///   entropy      -E[log q(z)]
struct DecompositionTerms {
  Tensor mutual_info;
  Tensor marginal_kl;
  Tensor total_corr;
  Tensor dimwise_kl;
  Tensor entropy;
};

DecompositionTerms decomposition_terms(const DensityEstimates& densities, const Tensor& weights);
/// Uniform weights 1/S.
DecompositionTerms decomposition_terms(const DensityEstimates& densities);

/// Mean over the batch of sum_pixels [x log sigmoid(l) + (1 - x) log(1 - sigmoid(l))].
Tensor bernoulli_log_likelihood(const Tensor& x, const Tensor& logits);

struct LossBreakdown {
  Tensor objective;  // scalar to maximize
  Tensor loss;       // -objective
  double recon_log_likelihood = 0.0;
  double kl = 0.0;   // mean closed-form KL(q(z|x) || p(z))
  /// Present when the objective needed the aggregate-posterior terms.
  double mutual_info = 0.0;
  double marginal_kl = 0.0;
  double total_corr = 0.0;
  double dimwise_kl = 0.0;
  double entropy = 0.0;
};

/// Combines already computed pieces into the objective for `spec` at
/// training step `step` (used by the annealed schedule). `terms` may be
/// null when !spec.needs_densities(). Throws std::domain_error naming the
/// first non-finite term.
LossBreakdown assemble_objective(const LossSpec& spec, const Tensor& recon, const Tensor& kl,
                                 const DecompositionTerms* terms, std::size_t step);

/// Full forward pass on one minibatch.
LossBreakdown evaluate_batch(const LossSpec& spec, const VaeModel& model, const Tensor& x,
                             std::mt19937_64& rng, std::size_t step, std::size_t dataset_size);

/// Exact expectations for a model with finitely many x and z values. The
/// prior factorizes over latent dimensions; q(z | x) is an arbitrary table.
struct DiscreteLatentModel {
  std::vector<double> p_x;                       // [X]
  std::vector<std::size_t> latent_cardinality;   // [d]
  std::vector<std::vector<double>> q_z_given_x;  // [X][prod cardinality], last dim fastest
  std::vector<std::vector<double>> prior;        // [d][cardinality_j]

  void validate() const;
  std::size_t latent_states() const;
  std::vector<std::size_t> unravel(std::size_t z) const;
};

/// Enumerates every (x, z) with p(x) q(z|x) > 0 and returns the exact
/// densities together with the matching weights.
struct EnumeratedDensities {
  DensityEstimates densities;
  Tensor weights;
  double expected_kl = 0.0;  // E_p(x) KL(q(z|x) || p(z))
};
EnumeratedDensities enumerate_densities(const DiscreteLatentModel& model);

}  // namespace privae::vae
