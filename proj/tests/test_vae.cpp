#include "privae/vae.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

namespace ad = privae::ad;
namespace vae = privae::vae;
using ad::Tensor;
using vae::LossKind;
using vae::LossSpec;

namespace {

Tensor tensor_from(const Eigen::MatrixXd& m) {
  std::vector<double> v;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) v.push_back(m(i, j));
  }
  return Tensor::constant({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())}, v);
}

double at(const Tensor& t, std::size_t i, std::size_t j) { return t.values()[i * t.dim(1) + j]; }

vae::Architecture small_arch() {
  vae::Architecture a;
  a.input_dim = 12;
  a.hidden = {8, 6};
  a.latent_dim = 3;
  return a;
}

Tensor binary_batch(std::size_t m, std::size_t pixels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution b(0.3);
  std::vector<double> v(m * pixels);
  for (double& x : v) x = b(rng) ? 1.0 : 0.0;
  return Tensor::constant({m, pixels}, v);
}

std::vector<LossSpec> registry() {
  return {LossSpec::elbo(),
          LossSpec::beta_vae(4.0),
          LossSpec::annealed_vae(10.0, 5.0, 100),
          LossSpec::info_vae(2.0),
          LossSpec::beta_tcvae(6.0),
          LossSpec::pri_vae(0.6, 6.0),
          LossSpec::pri_vae_star(0.5, 1.0, 4.0),
          LossSpec::beta_tcvae_star(6.0)};
}

// Random discrete toy model with strictly positive tables.
vae::DiscreteLatentModel random_discrete_model(std::size_t inputs, std::vector<std::size_t> card,
                                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  vae::DiscreteLatentModel m;
  m.latent_cardinality = card;
  auto normalized = [&](std::size_t n) {
    std::vector<double> v(n);
    double s = 0.0;
    for (double& x : v) s += (x = u(rng));
    for (double& x : v) x /= s;
    return v;
  };
  m.p_x = normalized(inputs);
  for (std::size_t x = 0; x < inputs; ++x) m.q_z_given_x.push_back(normalized(m.latent_states()));
  for (std::size_t c : card) m.prior.push_back(normalized(c));
  return m;
}

struct ExactTerms {
  double expected_kl, mutual_info, marginal_kl, total_corr, dimwise_kl;
};

// Direct enumeration with explicit loops over x and z.
ExactTerms exact_terms(const vae::DiscreteLatentModel& m) {
  const std::size_t nz = m.latent_states();
  const std::size_t d = m.latent_cardinality.size();
  std::vector<double> qz(nz, 0.0);
  for (std::size_t x = 0; x < m.p_x.size(); ++x) {
    for (std::size_t z = 0; z < nz; ++z) qz[z] += m.p_x[x] * m.q_z_given_x[x][z];
  }
  auto digits = [&](std::size_t z) {
    std::vector<std::size_t> idx(d);
    for (std::size_t j = d; j-- > 0;) {
      idx[j] = z % m.latent_cardinality[j];
      z /= m.latent_cardinality[j];
    }
    return idx;
  };
  std::vector<std::vector<double>> qj(d);
  for (std::size_t j = 0; j < d; ++j) qj[j].assign(m.latent_cardinality[j], 0.0);
  for (std::size_t z = 0; z < nz; ++z) {
    const auto idx = digits(z);
    for (std::size_t j = 0; j < d; ++j) qj[j][idx[j]] += qz[z];
  }
  auto prior = [&](std::size_t z) {
    double p = 1.0;
    const auto idx = digits(z);
    for (std::size_t j = 0; j < d; ++j) p *= m.prior[j][idx[j]];
    return p;
  };
  ExactTerms t{};
  for (std::size_t x = 0; x < m.p_x.size(); ++x) {
    for (std::size_t z = 0; z < nz; ++z) {
      const double q = m.q_z_given_x[x][z];
      t.expected_kl += m.p_x[x] * q * std::log(q / prior(z));
      t.mutual_info += m.p_x[x] * q * std::log(q / qz[z]);
    }
  }
  for (std::size_t z = 0; z < nz; ++z) {
    t.marginal_kl += qz[z] * std::log(qz[z] / prior(z));
    double prod = 1.0;
    const auto idx = digits(z);
    for (std::size_t j = 0; j < d; ++j) prod *= qj[j][idx[j]];
    t.total_corr += qz[z] * std::log(qz[z] / prod);
  }
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t c = 0; c < m.latent_cardinality[j]; ++c) {
      t.dimwise_kl += qj[j][c] * std::log(qj[j][c] / m.prior[j][c]);
    }
  }
  return t;
}

}  // namespace

// ---- model --------------------------------------------------------------------------

TEST(VaeModel, ShapesAndNames) {
  const vae::VaeModel model(vae::Architecture{}, 0);
  const auto x = binary_batch(5, 256, 1);
  const auto enc = model.encode(x);
  EXPECT_EQ(enc.mu.shape(), (ad::Shape{5, 10}));
  EXPECT_EQ(enc.logvar.shape(), (ad::Shape{5, 10}));
  EXPECT_EQ(model.decode_logits(enc.mu).shape(), (ad::Shape{5, 256}));
  std::set<std::string> names;
  for (const auto& p : model.parameters()) EXPECT_TRUE(names.insert(p.name).second) << p.name;
  EXPECT_TRUE(names.count("encoder.0.weight"));
}

TEST(VaeModel, EncoderEmitsTwiceTheLatentDim) {
  const vae::VaeModel model(small_arch(), 0);
  std::size_t last_out = 0;
  std::size_t first_decoder_in = 0;
  for (const auto& p : model.parameters()) {
    if (p.name.rfind("encoder.", 0) == 0 && p.tensor.rank() == 2) last_out = p.tensor.dim(1);
    if (p.name == "decoder.0.weight") first_decoder_in = p.tensor.dim(0);
  }
  EXPECT_EQ(last_out, 2 * small_arch().latent_dim);
  EXPECT_EQ(first_decoder_in, small_arch().latent_dim);
}

TEST(VaeModel, SeedDeterminesInitialization) {
  const vae::VaeModel a(small_arch(), 3), b(small_arch(), 3), c(small_arch(), 4);
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    const auto va = a.parameters()[i].tensor.values();
    const auto vb = b.parameters()[i].tensor.values();
    EXPECT_TRUE(std::equal(va.begin(), va.end(), vb.begin()));
  }
  const auto va = a.parameters()[0].tensor.values();
  const auto vc = c.parameters()[0].tensor.values();
  EXPECT_FALSE(std::equal(va.begin(), va.end(), vc.begin()));
}

TEST(VaeModel, LoadParametersChecksNamesAndShapes) {
  vae::VaeModel a(small_arch(), 1);
  const vae::VaeModel b(small_arch(), 2);
  a.load_parameters(b.parameters());
  const auto x = binary_batch(3, 12, 5);
  EXPECT_EQ(a.encode(x).mu.values()[0], b.encode(x).mu.values()[0]);
  std::vector<ad::Parameter> wrong(b.parameters().begin(), b.parameters().end());
  wrong[0].tensor = Tensor::variable({1}, {0.0});
  EXPECT_THROW(a.load_parameters(wrong), std::invalid_argument);
  wrong.pop_back();
  EXPECT_THROW(a.load_parameters(wrong), std::invalid_argument);
}

TEST(VaeModel, LogVarIsClamped) {
  vae::VaeModel model(small_arch(), 0);
  for (auto& p : model.parameters()) {
    for (double& v : p.tensor.mutable_values()) v *= 60.0;
  }
  const auto enc = model.encode(binary_batch(6, 12, 2));
  for (double v : enc.logvar.values()) {
    EXPECT_GE(v, vae::kLogVarMin);
    EXPECT_LE(v, vae::kLogVarMax);
  }
}

// ---- sampling and closed forms ------------------------------------------------------

TEST(Reparameterization, VanishingVarianceReturnsMean) {
  const auto mu = Tensor::constant({2, 3}, {0.1, -2, 3, 4, 5, -6});
  const auto logvar = Tensor::full({2, 3}, -std::numeric_limits<double>::infinity());
  std::mt19937_64 rng(0);
  const auto z = vae::reparameterized_sample(mu, logvar, rng);
  // Guarded at log var = -20: sd = e^-10.
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(z.values()[i], mu.values()[i], 6 * std::exp(-10.0));
}

TEST(Reparameterization, FixedSeedIsReproducible) {
  const auto mu = Tensor::constant({2, 2}, {0, 1, 2, 3});
  const auto logvar = Tensor::constant({2, 2}, {0, -1, 0.5, 0});
  std::mt19937_64 r1(9), r2(9);
  const auto a = vae::reparameterized_sample(mu, logvar, r1);
  const auto b = vae::reparameterized_sample(mu, logvar, r2);
  EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
}

TEST(Reparameterization, MeanOfSamplesWithinClt) {
  constexpr std::size_t n = 100'000;
  const std::vector<double> mu{0.5, -1.0, 2.0};
  const std::vector<double> logvar{0.0, -1.0, 1.0};
  std::vector<double> m, lv;
  for (std::size_t i = 0; i < n; ++i) {
    m.insert(m.end(), mu.begin(), mu.end());
    lv.insert(lv.end(), logvar.begin(), logvar.end());
  }
  std::mt19937_64 rng(17);
  const auto z = vae::reparameterized_sample(Tensor::constant({n, 3}, m), Tensor::constant({n, 3}, lv), rng);
  for (std::size_t j = 0; j < 3; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += at(z, i, j) - mu[j];
    const double sd = std::exp(0.5 * logvar[j]);
    EXPECT_LT(std::abs(s / n), 3 * sd / std::sqrt(static_cast<double>(n))) << j;
  }
}

TEST(Reparameterization, DifferentiableThroughBothInputs) {
  auto mu = Tensor::variable({1, 2}, {0.3, -0.2});
  auto logvar = Tensor::variable({1, 2}, {0.1, -0.4});
  std::mt19937_64 rng(1);
  ad::backward(ad::sum(vae::reparameterized_sample(mu, logvar, rng)));
  EXPECT_DOUBLE_EQ(mu.grad()[0], 1.0);
  EXPECT_NE(logvar.grad()[0], 0.0);
}

TEST(GaussianKl, ClosedFormValues) {
  EXPECT_NEAR(vae::gaussian_kl_closed_form(Tensor::constant({1, 4}, {0, 0, 0, 0}),
                                           Tensor::constant({1, 4}, {0, 0, 0, 0}))
                  .item(),
              0.0, 1e-15);
  EXPECT_NEAR(
      vae::gaussian_kl_closed_form(Tensor::constant({1, 1}, {1.0}), Tensor::constant({1, 1}, {0.0})).item(),
      0.5, 1e-15);
}

TEST(GaussianKl, MatchesMonteCarlo) {
  const std::vector<double> mu{0.7, -0.3, 1.2};
  const std::vector<double> logvar{-0.5, 0.4, -1.0};
  const double closed = vae::gaussian_kl_closed_form(Tensor::constant({1, 3}, mu), Tensor::constant({1, 3}, logvar))
                            .values()[0];
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  double acc = 0.0;
  constexpr int n = 1'000'000;
  for (int s = 0; s < n; ++s) {
    for (std::size_t j = 0; j < 3; ++j) {
      const double var = std::exp(logvar[j]);
      const double z = mu[j] + std::sqrt(var) * n01(rng);
      acc += oracle::log_normal(z, mu[j], var) - oracle::log_normal(z, 0.0, 1.0);
    }
  }
  EXPECT_NEAR(acc / n, closed, 0.01 * closed);
}

// ---- minibatch densities ------------------------------------------------------------

TEST(MinibatchDensities, IdenticalEncodingsGiveComponentMinusLogN) {
  const std::size_t m = 4, n = 4;
  const auto mu = Tensor::constant({m, 2}, {0.2, -0.1, 0.2, -0.1, 0.2, -0.1, 0.2, -0.1});
  const auto logvar = Tensor::full({m, 2}, -0.3);
  const auto z = Tensor::constant({m, 2}, {0.0, 0.0, 1.0, -1.0, 0.5, 0.3, -0.7, 0.2});
  const auto e = vae::minibatch_weighted_densities(z, mu, logvar, n);
  for (std::size_t i = 0; i < m; ++i) {
    // The mixture of identical components is the component itself.
    double component = 0.0;
    for (std::size_t k = 0; k < 2; ++k) component += oracle::log_normal(at(z, i, k), at(mu, 0, k), std::exp(-0.3));
    EXPECT_NEAR(e.log_q_z.values()[i] + std::log(double(n)), component, 1e-12);
    EXPECT_NEAR(e.log_q_z_given_x.values()[i], component, 1e-12);
  }
}

TEST(MinibatchDensities, MatchesBruteForceMixture) {
  const Eigen::MatrixXd mu = oracle::gaussian_matrix(4, 2, 21);
  const Eigen::MatrixXd lv = 0.3 * oracle::gaussian_matrix(4, 2, 22);
  const Eigen::MatrixXd z = oracle::gaussian_matrix(4, 2, 23);
  const double n = 50.0;
  const auto e = vae::minibatch_weighted_densities(tensor_from(z), tensor_from(mu), tensor_from(lv), 50);
  const Eigen::MatrixXd var = lv.array().exp();
  for (Eigen::Index i = 0; i < 4; ++i) {
    const std::vector<double> zi{z(i, 0), z(i, 1)};
    EXPECT_NEAR(e.log_q_z.values()[i], oracle::weighted_mixture_log_density(zi, mu, var, n), 1e-10);
    for (Eigen::Index k = 0; k < 2; ++k) {
      const std::vector<double> zk{z(i, k)};
      EXPECT_NEAR(at(e.log_q_z_dims, i, k),
                  oracle::weighted_mixture_log_density(zk, mu.col(k), var.col(k), n), 1e-10);
    }
  }
}

TEST(MinibatchDensities, PriorAtOrigin) {
  const auto zero = Tensor::full({2, 5}, 0.0);
  const auto e = vae::minibatch_weighted_densities(zero, zero, zero, 10);
  for (double v : e.log_p_z.values()) EXPECT_NEAR(v, -2.5 * std::log(2 * std::numbers::pi), 1e-12);
}

TEST(MinibatchDensities, DatasetSmallerThanBatchIsAnError) {
  const auto t = Tensor::full({4, 2}, 0.0);
  EXPECT_THROW(vae::minibatch_weighted_densities(t, t, t, 3), std::invalid_argument);
}

TEST(MinibatchDensities, BoundedByLargestComponent) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::MatrixXd mu = oracle::gaussian_matrix(8, 3, 100 + seed);
    const Eigen::MatrixXd lv = 0.5 * oracle::gaussian_matrix(8, 3, 200 + seed);
    const Eigen::MatrixXd z = oracle::gaussian_matrix(8, 3, 300 + seed);
    const auto e = vae::minibatch_weighted_densities(tensor_from(z), tensor_from(mu), tensor_from(lv), 768);
    for (Eigen::Index i = 0; i < 8; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < 8; ++j) {
        double lp = 0.0;
        for (Eigen::Index k = 0; k < 3; ++k) lp += oracle::log_normal(z(i, k), mu(j, k), std::exp(lv(j, k)));
        best = std::max(best, lp);
      }
      EXPECT_TRUE(std::isfinite(e.log_q_z.values()[i]));
      EXPECT_LE(e.log_q_z.values()[i], best + 1e-12);
    }
  }
}

TEST(MinibatchDensities, EntropyMinusInformationIsConditionalTerm) {
  const Eigen::MatrixXd mu = oracle::gaussian_matrix(6, 4, 31);
  const Eigen::MatrixXd lv = 0.4 * oracle::gaussian_matrix(6, 4, 32);
  const Eigen::MatrixXd z = oracle::gaussian_matrix(6, 4, 33);
  const auto e = vae::minibatch_weighted_densities(tensor_from(z), tensor_from(mu), tensor_from(lv), 100);
  const auto t = vae::decomposition_terms(e);
  double mean_lqx = 0.0;
  for (double v : e.log_q_z_given_x.values()) mean_lqx += v / 6.0;
  EXPECT_NEAR(t.entropy.item() - t.mutual_info.item(), -mean_lqx, 1e-10);
}

TEST(MinibatchDensities, ConsistentAsBatchGrows) {
  // Gaussian-mixture "encoder" over N = 256 inputs with an exactly computable q(z).
  const std::size_t n = 256, d = 2;
  const Eigen::MatrixXd mu_all = oracle::gaussian_matrix(n, d, 41);
  const Eigen::MatrixXd var_all = Eigen::MatrixXd::Constant(n, d, 0.25);
  auto error_at = [&](std::size_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    Eigen::MatrixXd mu(m, d), lv(m, d), z(m, d);
    std::normal_distribution<double> n01;
    for (std::size_t i = 0; i < m; ++i) {
      mu.row(i) = mu_all.row(idx[i]);
      lv.row(i) = var_all.row(idx[i]).array().log();
      for (std::size_t k = 0; k < d; ++k) z(i, k) = mu(i, k) + 0.5 * n01(rng);
    }
    const auto e = vae::minibatch_weighted_densities(tensor_from(z), tensor_from(mu), tensor_from(lv), n);
    double err = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const std::vector<double> zi{z(i, 0), z(i, 1)};
      const double exact = oracle::weighted_mixture_log_density(zi, mu_all, var_all, 1.0);
      err += std::abs(e.log_q_z.values()[i] + std::log(double(n)) - exact);
    }
    return err / static_cast<double>(m);
  };
  std::vector<double> e16, e64;
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    e16.push_back(error_at(16, seed));
    e64.push_back(error_at(64, seed));
  }
  EXPECT_LE(oracle::median(e64), 0.5 * oracle::median(e16));
}

// ---- exact enumeration --------------------------------------------------------------

TEST(Enumeration, KlSplitsIntoInformationAndMarginalKl) {
  const auto model = random_discrete_model(4, {2, 2}, 5);
  const auto en = vae::enumerate_densities(model);
  const auto t = vae::decomposition_terms(en.densities, en.weights);
  const auto exact = exact_terms(model);
  EXPECT_NEAR(t.mutual_info.item() + t.marginal_kl.item(), exact.expected_kl, 1e-9);
  EXPECT_NEAR(t.mutual_info.item(), exact.mutual_info, 1e-12);
  EXPECT_NEAR(t.marginal_kl.item(), exact.marginal_kl, 1e-12);
  EXPECT_NEAR(en.expected_kl, exact.expected_kl, 1e-12);
}

TEST(Enumeration, MarginalKlSplitsIntoTcAndDimwiseKl) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t inputs = 1 + rng() % 8;
    const std::size_t d = 1 + rng() % 3;
    std::vector<std::size_t> card(d);
    for (auto& c : card) c = 2 + rng() % 2;
    const auto model = random_discrete_model(inputs, card, 1000 + seed);
    const auto en = vae::enumerate_densities(model);
    const auto t = vae::decomposition_terms(en.densities, en.weights);
    const auto exact = exact_terms(model);
    EXPECT_NEAR(t.marginal_kl.item(), t.total_corr.item() + t.dimwise_kl.item(), 1e-9);
    EXPECT_NEAR(t.total_corr.item(), exact.total_corr, 1e-12);
    EXPECT_NEAR(t.dimwise_kl.item(), exact.dimwise_kl, 1e-12);
    EXPECT_NEAR(t.mutual_info.item() + t.marginal_kl.item(), exact.expected_kl, 1e-9);
  }
}

TEST(Enumeration, RejectsInvalidTables) {
  auto model = random_discrete_model(2, {2}, 1);
  model.q_z_given_x[0][0] += 0.5;
  EXPECT_THROW(vae::enumerate_densities(model), std::invalid_argument);
}

// ---- loss registry ------------------------------------------------------------------

TEST(LossSpecTest, NamesRoundTrip) {
  for (const auto& s : registry()) {
    EXPECT_EQ(vae::parse_loss_kind(vae::loss_kind_name(s.kind)), s.kind);
  }
  EXPECT_THROW(vae::parse_loss_kind("factor_vae"), std::invalid_argument);
}

TEST(LossSpecTest, PriRegimeIsGuarded) {
  EXPECT_THROW(LossSpec::pri_vae(2.0, 1.0).validate(false), std::invalid_argument);
  EXPECT_THROW(LossSpec::pri_vae_star(1.0, 1.0, 1.0).validate(false), std::invalid_argument);
  EXPECT_FALSE(LossSpec::pri_vae(2.0, 1.0).validate(true).empty());
  EXPECT_EQ(LossSpec::pri_vae(1.0, 1.5).validate(false).size(), 1u);
  EXPECT_TRUE(LossSpec::pri_vae(0.6, 6.0).validate(false).empty());
  EXPECT_THROW(LossSpec::beta_vae(-1.0).validate(false), std::invalid_argument);
}

TEST(LossSpecTest, AnnealedCapacityRamps) {
  const auto spec = LossSpec::annealed_vae(2.0, 10.0, 100);
  const auto recon = Tensor::scalar(-50.0);
  const auto kl = Tensor::scalar(3.0);
  // objective = recon - gamma |KL - C(t)|, C(t) = 10 min(1, t/100)
  EXPECT_DOUBLE_EQ(vae::assemble_objective(spec, recon, kl, nullptr, 0).objective.item(), -56.0);
  EXPECT_DOUBLE_EQ(vae::assemble_objective(spec, recon, kl, nullptr, 30).objective.item(), -50.0);
  EXPECT_DOUBLE_EQ(vae::assemble_objective(spec, recon, kl, nullptr, 500).objective.item(), -64.0);
}

TEST(LossSpecTest, AssemblyFollowsTheTable) {
  const auto recon = Tensor::scalar(-100.0);
  const auto kl = Tensor::scalar(7.0);
  vae::DecompositionTerms t{Tensor::scalar(1.0), Tensor::scalar(2.0), Tensor::scalar(0.5),
                            Tensor::scalar(1.5), Tensor::scalar(9.0)};
  auto obj = [&](const LossSpec& s) { return vae::assemble_objective(s, recon, kl, &t, 0).objective.item(); };
  EXPECT_DOUBLE_EQ(obj(LossSpec::elbo()), -107.0);
  EXPECT_DOUBLE_EQ(obj(LossSpec::beta_vae(4.0)), -128.0);
  EXPECT_DOUBLE_EQ(obj(LossSpec::info_vae(3.0)), -106.0);
  EXPECT_DOUBLE_EQ(obj(LossSpec::beta_tcvae(6.0)), -100.0 - (1.0 + 3.0 + 1.5));
  EXPECT_DOUBLE_EQ(obj(LossSpec::pri_vae(0.5, 6.0)), -100.0 - (4.5 + 12.0));
  EXPECT_DOUBLE_EQ(obj(LossSpec::pri_vae_star(0.5, 1.0, 4.0)), -100.0 - (4.5 + 2.0 + 2.0));
  EXPECT_DOUBLE_EQ(obj(LossSpec::beta_tcvae_star(6.0)), -100.0 - (9.0 + 3.0 + 1.5));
  const auto b = vae::assemble_objective(LossSpec::elbo(), recon, kl, &t, 0);
  EXPECT_DOUBLE_EQ(b.loss.item(), -b.objective.item());
}

TEST(LossSpecTest, NonFiniteTermIsNamed) {
  vae::DecompositionTerms t{Tensor::scalar(1.0), Tensor::scalar(2.0),
                            Tensor::scalar(std::numeric_limits<double>::quiet_NaN()), Tensor::scalar(1.5),
                            Tensor::scalar(9.0)};
  try {
    vae::assemble_objective(LossSpec::beta_tcvae(6.0), Tensor::scalar(-1.0), Tensor::scalar(1.0), &t, 0);
    FAIL() << "NaN accepted";
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("total correlation"), std::string::npos) << e.what();
  }
  EXPECT_THROW(vae::assemble_objective(LossSpec::beta_tcvae(6.0), Tensor::scalar(-1.0), Tensor::scalar(1.0),
                                       nullptr, 0),
               std::invalid_argument);
}

TEST(LossReductions, BetaOneIsTheElbo) {
  const vae::VaeModel model(vae::Architecture{}, 0);
  const auto x = binary_batch(16, 256, 3);
  std::mt19937_64 r1(5), r2(5);
  const double a = vae::evaluate_batch(LossSpec::elbo(), model, x, r1, 0, 768).objective.item();
  const double b = vae::evaluate_batch(LossSpec::beta_vae(1.0), model, x, r2, 0, 768).objective.item();
  EXPECT_NEAR(a, b, 1e-12);
}

TEST(LossReductions, PriVaeWithoutEntropyIsInfoVae) {
  const vae::VaeModel model(vae::Architecture{}, 1);
  const auto x = binary_batch(16, 256, 4);
  std::mt19937_64 r1(6), r2(6);
  const double a = vae::evaluate_batch(LossSpec::pri_vae(0.0, 3.0), model, x, r1, 0, 768).objective.item();
  const double b = vae::evaluate_batch(LossSpec::info_vae(3.0), model, x, r2, 0, 768).objective.item();
  EXPECT_NEAR(a, b, 1e-12);
}

TEST(LossReductions, ReconstructionIsBernoulliLogLikelihood) {
  const auto x = Tensor::constant({2, 2}, {1, 0, 0, 1});
  const auto l = Tensor::constant({2, 2}, {0.3, -1.2, 2.0, 0.0});
  auto s = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const double expected =
      (std::log(s(0.3)) + std::log(1 - s(-1.2)) + std::log(1 - s(2.0)) + std::log(s(0.0))) / 2.0;
  EXPECT_NEAR(vae::bernoulli_log_likelihood(x, l).item(), expected, 1e-12);
}

namespace privae::vae {
void PrintTo(const LossSpec& spec, std::ostream* os) { *os << spec.describe(); }
}  // namespace privae::vae

class LossGradient : public ::testing::TestWithParam<LossSpec> {};

TEST_P(LossGradient, MatchesFiniteDifferencesOnFourSamples) {
  vae::VaeModel model(small_arch(), 7);
  const auto x = binary_batch(4, 12, 8);
  const LossSpec spec = GetParam();
  auto f = [&] {
    std::mt19937_64 rng(11);
    return vae::evaluate_batch(spec, model, x, rng, 10, 768).loss;
  };
  EXPECT_LT(ad::grad_check(f, model.parameters()), 1e-4) << spec.describe();
}

INSTANTIATE_TEST_SUITE_P(Registry, LossGradient, ::testing::ValuesIn(registry()),
                         [](const auto& info) { return std::string(vae::loss_kind_name(info.param.kind)); });
