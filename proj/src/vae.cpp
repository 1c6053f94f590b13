#include "privae/vae.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace privae::vae {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

using ad::Shape;

Tensor init_uniform(Shape shape, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  std::vector<double> v(ad::numel(shape));
  for (double& x : v) x = u(rng);
  return Tensor::variable(std::move(shape), std::move(v));
}

void require_finite(const Tensor& t, const char* name) {
  for (double v : t.values()) {
    if (!std::isfinite(v)) {
      throw std::domain_error(std::string("non-finite ") + name + " in objective");
    }
  }
}

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("loss weight ") + name + " must be finite and >= 0");
  }
}

}  // namespace

VaeModel::VaeModel(const Architecture& arch, std::uint64_t seed) : arch_(arch) {
  if (arch.input_dim == 0 || arch.latent_dim == 0) {
    throw std::invalid_argument("VaeModel: input and latent dimensions must be > 0");
  }
  std::mt19937_64 rng(seed);
  auto add_layer = [&](std::vector<Layer>& stack, const std::string& prefix, std::size_t in,
                       std::size_t out) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    const std::string id = prefix + "." + std::to_string(stack.size());
    Layer layer{params_.size(), params_.size() + 1};
    params_.push_back({id + ".weight", init_uniform({in, out}, bound, rng)});
    params_.push_back({id + ".bias", init_uniform({out}, bound, rng)});
    stack.push_back(layer);
  };

  std::size_t width = arch.input_dim;
  for (std::size_t h : arch.hidden) {
    add_layer(encoder_, "encoder", width, h);
    width = h;
  }
  add_layer(encoder_, "encoder", width, 2 * arch.latent_dim);

  width = arch.latent_dim;
  for (auto it = arch.hidden.rbegin(); it != arch.hidden.rend(); ++it) {
    add_layer(decoder_, "decoder", width, *it);
    width = *it;
  }
  add_layer(decoder_, "decoder", width, arch.input_dim);
}

Tensor VaeModel::apply(const std::vector<Layer>& layers, Tensor h) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = ad::matmul(h, params_[layers[i].weight].tensor) + params_[layers[i].bias].tensor;
    if (i + 1 < layers.size()) h = ad::relu(h);
  }
  return h;
}

VaeModel::Encoding VaeModel::encode(const Tensor& x) const {
  if (x.rank() != 2 || x.dim(1) != arch_.input_dim) {
    throw ad::ShapeError("encode: expected [M, " + std::to_string(arch_.input_dim) + "], got " +
                         ad::to_string(x.shape()));
  }
  const Tensor out = apply(encoder_, x);
  const std::size_t d = arch_.latent_dim;
  return {ad::slice(out, 1, 0, d), ad::clamp(ad::slice(out, 1, d, d), kLogVarMin, kLogVarMax)};
}

Tensor VaeModel::decode_logits(const Tensor& z) const {
  if (z.rank() != 2 || z.dim(1) != arch_.latent_dim) {
    throw ad::ShapeError("decode: expected [M, " + std::to_string(arch_.latent_dim) + "], got " +
                         ad::to_string(z.shape()));
  }
  return apply(decoder_, z);
}

void VaeModel::load_parameters(std::span<const ad::Parameter> values) {
  if (values.size() != params_.size()) {
    throw std::invalid_argument("load_parameters: expected " + std::to_string(params_.size()) +
                                " parameters, got " + std::to_string(values.size()));
  }
  for (auto& p : params_) {
    const ad::Parameter* match = nullptr;
    for (const auto& v : values) {
      if (v.name == p.name) match = &v;
    }
    if (!match) throw std::invalid_argument("load_parameters: missing parameter '" + p.name + "'");
    if (match->tensor.shape() != p.tensor.shape()) {
      throw std::invalid_argument("load_parameters: '" + p.name + "' has shape " +
                                  ad::to_string(match->tensor.shape()) + ", model expects " +
                                  ad::to_string(p.tensor.shape()));
    }
    const auto src = match->tensor.values();
    auto dst = p.tensor.mutable_values();
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

// ---- objectives ----------------------------------------------------------------

LossKind parse_loss_kind(std::string_view name) {
  for (LossKind k : {LossKind::elbo, LossKind::beta_vae, LossKind::annealed_vae, LossKind::info_vae,
                     LossKind::beta_tcvae, LossKind::pri_vae, LossKind::pri_vae_star,
                     LossKind::beta_tcvae_star}) {
    if (loss_kind_name(k) == name) return k;
  }
  throw std::invalid_argument(
      "unknown loss '" + std::string(name) +
      "' (expected elbo, beta_vae, annealed_vae, info_vae, beta_tcvae, pri_vae, pri_vae_star, "
      "beta_tcvae_star)");
}

std::string_view loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::elbo: return "elbo";
    case LossKind::beta_vae: return "beta_vae";
    case LossKind::annealed_vae: return "annealed_vae";
    case LossKind::info_vae: return "info_vae";
    case LossKind::beta_tcvae: return "beta_tcvae";
    case LossKind::pri_vae: return "pri_vae";
    case LossKind::pri_vae_star: return "pri_vae_star";
    case LossKind::beta_tcvae_star: return "beta_tcvae_star";
  }
  return "?";
}

LossSpec LossSpec::elbo() { return {}; }

LossSpec LossSpec::beta_vae(double beta) {
  LossSpec s;
  s.kind = LossKind::beta_vae;
  s.beta = beta;
  return s;
}

LossSpec LossSpec::annealed_vae(double gamma, double c_max, std::size_t c_steps) {
  LossSpec s;
  s.kind = LossKind::annealed_vae;
  s.gamma = gamma;
  s.c_max = c_max;
  s.c_steps = c_steps;
  return s;
}

LossSpec LossSpec::info_vae(double lambda) {
  LossSpec s;
  s.kind = LossKind::info_vae;
  s.lambda = lambda;
  return s;
}

LossSpec LossSpec::beta_tcvae(double beta) {
  LossSpec s;
  s.kind = LossKind::beta_tcvae;
  s.beta = beta;
  return s;
}

LossSpec LossSpec::pri_vae(double alpha, double beta) {
  LossSpec s;
  s.kind = LossKind::pri_vae;
  s.alpha = alpha;
  s.beta = beta;
  return s;
}

LossSpec LossSpec::pri_vae_star(double alpha, double beta, double gamma) {
  LossSpec s;
  s.kind = LossKind::pri_vae_star;
  s.alpha = alpha;
  s.beta = beta;
  s.gamma = gamma;
  return s;
}

LossSpec LossSpec::beta_tcvae_star(double beta) {
  LossSpec s;
  s.kind = LossKind::beta_tcvae_star;
  s.beta = beta;
  return s;
}

std::string LossSpec::describe() const {
  std::ostringstream os;
  os << loss_kind_name(kind);
  switch (kind) {
    case LossKind::elbo: break;
    case LossKind::beta_vae:
    case LossKind::beta_tcvae:
    case LossKind::beta_tcvae_star: os << "(beta=" << beta << ")"; break;
    case LossKind::annealed_vae:
      os << "(gamma=" << gamma << ", c_max=" << c_max << ", c_steps=" << c_steps << ")";
      break;
    case LossKind::info_vae: os << "(lambda=" << lambda << ")"; break;
    case LossKind::pri_vae: os << "(alpha=" << alpha << ", beta=" << beta << ")"; break;
    case LossKind::pri_vae_star:
      os << "(alpha=" << alpha << ", beta=" << beta << ", gamma=" << gamma << ")";
      break;
  }
  return os.str();
}

bool LossSpec::needs_densities() const {
  return kind != LossKind::elbo && kind != LossKind::beta_vae && kind != LossKind::annealed_vae;
}

std::vector<std::string> LossSpec::validate(bool force) const {
  require_nonnegative(alpha, "alpha");
  require_nonnegative(beta, "beta");
  require_nonnegative(gamma, "gamma");
  require_nonnegative(lambda, "lambda");
  require_nonnegative(c_max, "c_max");
  if (kind == LossKind::annealed_vae && c_steps == 0 && c_max > 0.0) {
    throw std::invalid_argument("annealed_vae: c_steps must be > 0 when c_max > 0");
  }
  std::vector<std::string> warnings;
  if (kind == LossKind::pri_vae || kind == LossKind::pri_vae_star) {
    if (beta <= alpha && !force) {
      throw std::invalid_argument(describe() +
                                  ": beta <= alpha lets the entropy term drive q(z) to collapse; "
                                  "pass --force to train anyway");
    }
    if (beta < 2.0 * alpha) {
      std::ostringstream os;
      os << describe() << ": beta < 2 alpha, training may collapse or diverge";
      warnings.push_back(os.str());
    }
  }
  return warnings;
}

// ---- densities -------------------------------------------------------------------

Tensor reparameterized_sample(const Tensor& mu, const Tensor& logvar, std::mt19937_64& rng) {
  if (mu.shape() != logvar.shape()) {
    throw ad::ShapeError("reparameterized_sample: mu " + ad::to_string(mu.shape()) +
                         " vs logvar " + ad::to_string(logvar.shape()));
  }
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> eps(mu.size());
  for (double& e : eps) e = n01(rng);
  const Tensor sd = ad::exp(0.5 * ad::clamp(logvar, kLogVarMin, kLogVarMax));
  return mu + sd * Tensor::constant(mu.shape(), std::move(eps));
}

Tensor gaussian_kl_closed_form(const Tensor& mu, const Tensor& logvar) {
  const Tensor per_dim = ad::square(mu) + ad::exp(logvar) - logvar - 1.0;
  return 0.5 * ad::sum(per_dim, 1);
}

Tensor gaussian_log_density(const Tensor& z, const Tensor& mu, const Tensor& logvar) {
  const Tensor quad = ad::square(z - mu) * ad::exp(-logvar);
  return -0.5 * (quad + logvar + kLog2Pi);
}

DensityEstimates minibatch_weighted_densities(const Tensor& z, const Tensor& mu,
                                              const Tensor& logvar, std::size_t dataset_size) {
  if (z.rank() != 2 || z.shape() != mu.shape() || z.shape() != logvar.shape()) {
    throw ad::ShapeError("minibatch_weighted_densities: z, mu, logvar must share shape [M, d]");
  }
  const std::size_t m = z.dim(0);
  const std::size_t d = z.dim(1);
  if (dataset_size < m) {
    throw std::invalid_argument("minibatch_weighted_densities: dataset size " +
                                std::to_string(dataset_size) + " < batch size " +
                                std::to_string(m));
  }
  const double log_nm =
      std::log(static_cast<double>(dataset_size)) + std::log(static_cast<double>(m));

  // pair(i, j, k) = log q(z_ik | x_j)
  const Tensor pair = gaussian_log_density(ad::reshape(z, {m, 1, d}), ad::reshape(mu, {1, m, d}),
                                           ad::reshape(logvar, {1, m, d}));
  DensityEstimates e;
  e.log_q_z_given_x = ad::sum(gaussian_log_density(z, mu, logvar), 1);
  e.log_q_z = ad::logsumexp(ad::sum(pair, 2), 1) - log_nm;
  e.log_q_z_dims = ad::logsumexp(pair, 1) - log_nm;
  e.log_p_z_dims = -0.5 * (ad::square(z) + kLog2Pi);
  e.log_p_z = ad::sum(e.log_p_z_dims, 1);
  return e;
}

DecompositionTerms decomposition_terms(const DensityEstimates& e, const Tensor& weights) {
  const std::size_t s = e.log_q_z.size();
  if (weights.rank() != 1 || weights.dim(0) != s) {
    throw ad::ShapeError("decomposition_terms: weights must have shape [" + std::to_string(s) +
                         "], got " + ad::to_string(weights.shape()));
  }
  auto expect = [&](const Tensor& v) { return ad::sum(weights * v); };
  const Tensor w_col = ad::reshape(weights, {s, 1});
  const Tensor sum_log_q_dims = ad::sum(e.log_q_z_dims, 1);

  DecompositionTerms t;
  t.mutual_info = expect(e.log_q_z_given_x - e.log_q_z);
  t.marginal_kl = expect(e.log_q_z - e.log_p_z);
  t.total_corr = expect(e.log_q_z - sum_log_q_dims);
  t.dimwise_kl = ad::sum(w_col * (e.log_q_z_dims - e.log_p_z_dims));
  t.entropy = -expect(e.log_q_z);
  return t;
}

DecompositionTerms decomposition_terms(const DensityEstimates& e) {
  const std::size_t s = e.log_q_z.size();
  if (s == 0) throw std::invalid_argument("decomposition_terms: no samples");
  return decomposition_terms(e, Tensor::full({s}, 1.0 / static_cast<double>(s)));
}

Tensor bernoulli_log_likelihood(const Tensor& x, const Tensor& logits) {
  if (x.shape() != logits.shape() || x.rank() != 2) {
    throw ad::ShapeError("bernoulli_log_likelihood: x " + ad::to_string(x.shape()) +
                         " vs logits " + ad::to_string(logits.shape()));
  }
  // x log s(l) + (1 - x) log(1 - s(l)) = x l - softplus(l)
  const Tensor per_pixel = x * logits - ad::softplus(logits);
  return ad::scale(ad::sum(per_pixel), 1.0 / static_cast<double>(x.dim(0)));
}

LossBreakdown assemble_objective(const LossSpec& spec, const Tensor& recon, const Tensor& kl,
                                 const DecompositionTerms* terms, std::size_t step) {
  if (spec.needs_densities() && terms == nullptr) {
    throw std::invalid_argument(spec.describe() + " needs the aggregate-posterior terms");
  }
  require_finite(recon, "reconstruction term");
  require_finite(kl, "KL term");

  LossBreakdown out;
  out.recon_log_likelihood = recon.item();
  out.kl = kl.item();
  if (terms) {
    require_finite(terms->mutual_info, "mutual information term");
    require_finite(terms->marginal_kl, "marginal KL term");
    require_finite(terms->total_corr, "total correlation term");
    require_finite(terms->dimwise_kl, "dimension-wise KL term");
    require_finite(terms->entropy, "latent entropy term");
    out.mutual_info = terms->mutual_info.item();
    out.marginal_kl = terms->marginal_kl.item();
    out.total_corr = terms->total_corr.item();
    out.dimwise_kl = terms->dimwise_kl.item();
    out.entropy = terms->entropy.item();
  }

  Tensor penalty;
  switch (spec.kind) {
    case LossKind::elbo:
      penalty = kl;
      break;
    case LossKind::beta_vae:
      penalty = spec.beta * kl;
      break;
    case LossKind::annealed_vae: {
      const double frac =
          spec.c_steps == 0 ? 1.0
                            : std::min(1.0, static_cast<double>(step) /
                                                static_cast<double>(spec.c_steps));
      penalty = spec.gamma * ad::abs(kl - spec.c_max * frac);
      break;
    }
    case LossKind::info_vae:
      penalty = spec.lambda * terms->marginal_kl;
      break;
    case LossKind::beta_tcvae:
      penalty = terms->mutual_info + spec.beta * terms->total_corr + terms->dimwise_kl;
      break;
    case LossKind::pri_vae:
      penalty = spec.alpha * terms->entropy + spec.beta * terms->marginal_kl;
      break;
    case LossKind::pri_vae_star:
      penalty = spec.alpha * terms->entropy + spec.beta * terms->marginal_kl +
                spec.gamma * terms->total_corr;
      break;
    case LossKind::beta_tcvae_star:
      penalty = terms->entropy + spec.beta * terms->total_corr + terms->dimwise_kl;
      break;
  }
  out.objective = recon - penalty;
  out.loss = -out.objective;
  require_finite(out.objective, "total");
  return out;
}

LossBreakdown evaluate_batch(const LossSpec& spec, const VaeModel& model, const Tensor& x,
                             std::mt19937_64& rng, std::size_t step, std::size_t dataset_size) {
  const auto enc = model.encode(x);
  const Tensor z = reparameterized_sample(enc.mu, enc.logvar, rng);
  const Tensor recon = bernoulli_log_likelihood(x, model.decode_logits(z));
  const Tensor kl = ad::mean(gaussian_kl_closed_form(enc.mu, enc.logvar));
  if (!spec.needs_densities()) return assemble_objective(spec, recon, kl, nullptr, step);
  const DensityEstimates dens = minibatch_weighted_densities(z, enc.mu, enc.logvar, dataset_size);
  const DecompositionTerms terms = decomposition_terms(dens);
  return assemble_objective(spec, recon, kl, &terms, step);
}

// ---- exact enumeration --------------------------------------------------------

std::size_t DiscreteLatentModel::latent_states() const {
  std::size_t n = 1;
  for (std::size_t c : latent_cardinality) n *= c;
  return n;
}

std::vector<std::size_t> DiscreteLatentModel::unravel(std::size_t z) const {
  std::vector<std::size_t> idx(latent_cardinality.size());
  for (std::size_t j = latent_cardinality.size(); j-- > 0;) {
    idx[j] = z % latent_cardinality[j];
    z /= latent_cardinality[j];
  }
  return idx;
}

void DiscreteLatentModel::validate() const {
  auto is_distribution = [](const std::vector<double>& p) {
    double total = 0.0;
    for (double v : p) {
      if (!(v >= 0.0) || !std::isfinite(v)) return false;
      total += v;
    }
    return std::abs(total - 1.0) <= 1e-9;
  };
  if (p_x.empty() || !is_distribution(p_x)) {
    throw std::invalid_argument("DiscreteLatentModel: p(x) is not a distribution");
  }
  if (latent_cardinality.empty()) throw std::invalid_argument("DiscreteLatentModel: no latents");
  if (prior.size() != latent_cardinality.size()) {
    throw std::invalid_argument("DiscreteLatentModel: one prior factor per latent dimension");
  }
  for (std::size_t j = 0; j < prior.size(); ++j) {
    if (prior[j].size() != latent_cardinality[j] || !is_distribution(prior[j])) {
      throw std::invalid_argument("DiscreteLatentModel: prior factor " + std::to_string(j) +
                                  " is not a distribution over its states");
    }
    for (double v : prior[j]) {
      if (v <= 0.0) throw std::invalid_argument("DiscreteLatentModel: prior must be positive");
    }
  }
  if (q_z_given_x.size() != p_x.size()) {
    throw std::invalid_argument("DiscreteLatentModel: one q(z|x) row per x");
  }
  for (const auto& row : q_z_given_x) {
    if (row.size() != latent_states() || !is_distribution(row)) {
      throw std::invalid_argument("DiscreteLatentModel: q(z|x) row is not a distribution");
    }
  }
}

EnumeratedDensities enumerate_densities(const DiscreteLatentModel& model) {
  model.validate();
  const std::size_t nz = model.latent_states();
  const std::size_t d = model.latent_cardinality.size();

  std::vector<double> q_z(nz, 0.0);
  for (std::size_t x = 0; x < model.p_x.size(); ++x) {
    for (std::size_t z = 0; z < nz; ++z) q_z[z] += model.p_x[x] * model.q_z_given_x[x][z];
  }
  std::vector<std::vector<double>> q_dims(d);
  for (std::size_t j = 0; j < d; ++j) q_dims[j].assign(model.latent_cardinality[j], 0.0);
  for (std::size_t z = 0; z < nz; ++z) {
    const auto idx = model.unravel(z);
    for (std::size_t j = 0; j < d; ++j) q_dims[j][idx[j]] += q_z[z];
  }

  std::vector<double> w, lqx, lq, lp, lq_dims, lp_dims;
  double expected_kl = 0.0;
  for (std::size_t x = 0; x < model.p_x.size(); ++x) {
    for (std::size_t z = 0; z < nz; ++z) {
      const double joint = model.p_x[x] * model.q_z_given_x[x][z];
      if (joint <= 0.0) continue;
      const auto idx = model.unravel(z);
      double log_p = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double lpj = std::log(model.prior[j][idx[j]]);
        lq_dims.push_back(std::log(q_dims[j][idx[j]]));
        lp_dims.push_back(lpj);
        log_p += lpj;
      }
      const double log_qx = std::log(model.q_z_given_x[x][z]);
      w.push_back(joint);
      lqx.push_back(log_qx);
      lq.push_back(std::log(q_z[z]));
      lp.push_back(log_p);
      expected_kl += joint * (log_qx - log_p);
    }
  }

  const std::size_t s = w.size();
  EnumeratedDensities out;
  out.weights = Tensor::constant({s}, std::move(w));
  out.densities.log_q_z_given_x = Tensor::constant({s}, std::move(lqx));
  out.densities.log_q_z = Tensor::constant({s}, std::move(lq));
  out.densities.log_p_z = Tensor::constant({s}, std::move(lp));
  out.densities.log_q_z_dims = Tensor::constant({s, d}, std::move(lq_dims));
  out.densities.log_p_z_dims = Tensor::constant({s, d}, std::move(lp_dims));
  out.expected_kl = expected_kl;
  return out;
}

}  // namespace privae::vae
