#include "privae/train.hpp"

#include "privae/factor_dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace privae {

namespace {

constexpr std::uint64_t kNoiseStream = 0x9e3779b97f4a7c15ull;
constexpr std::uint64_t kMeasureStream = 0xc2b2ae3d27d4eb4full;

Matrix from_tensor(const ad::Tensor& t) {
  const auto v = t.values();
  Matrix m(static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = v[static_cast<std::size_t>(i * m.cols() + j)];
    }
  }
  return m;
}

}  // namespace

ad::Tensor to_tensor(const Matrix& m) {
  std::vector<double> v(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      v[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
    }
  }
  return ad::Tensor::constant({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())},
                              std::move(v));
}

Adam::Adam(std::span<ad::Parameter> params, const AdamConfig& cfg) : params_(params), cfg_(cfg) {
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("Adam: learning rate must be > 0");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    throw std::invalid_argument("Adam: betas must lie in [0, 1)");
  }
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor.size(), 0.0);
    v_.emplace_back(p.tensor.size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = params_[k].tensor;
    const auto g = p.grad();
    auto w = p.mutable_values();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      w[i] -= cfg_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.eps);
    }
    p.zero_grad();
  }
}

Matrix encode_means(const vae::VaeModel& model, const Matrix& images) {
  ad::NoGradGuard guard;
  return from_tensor(model.encode(to_tensor(images)).mu);
}

Matrix encode_samples(const vae::VaeModel& model, const Matrix& images, std::uint64_t seed) {
  ad::NoGradGuard guard;
  std::mt19937_64 rng(seed);
  const auto enc = model.encode(to_tensor(images));
  return from_tensor(vae::reparameterized_sample(enc.mu, enc.logvar, rng));
}

InfoPlaneRecord measure_info_plane(const vae::VaeModel& model, const Matrix& images,
                                   const InfoPlaneConfig& cfg, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(images.rows());
  if (cfg.batch < 2 || cfg.batch > n) {
    throw std::invalid_argument("info-plane batch must lie in [2, dataset size]");
  }
  const std::size_t batches = std::max<std::size_t>(1, cfg.samples / cfg.batch);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::vector<std::size_t> rows;
  rows.reserve(batches * cfg.batch);
  for (std::size_t b = 0; b < batches; ++b) {
    // Partial Fisher-Yates: the first `batch` entries become a uniform subset.
    for (std::size_t i = 0; i < cfg.batch; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(pool[i], pool[pick(rng)]);
      rows.push_back(pool[i]);
    }
  }
  const Matrix x = gather_rows(images, rows);
  const Matrix z = encode_samples(model, x, rng());

  InfoPlaneRecord rec;
  rec.points = averaged_info_plane(x, z, cfg.batch, cfg.kernel, cfg.alphas);
  if (cfg.keep_latents > 0) {
    rec.latents = z.topRows(std::min<Eigen::Index>(z.rows(), static_cast<Eigen::Index>(cfg.keep_latents)));
  }
  return rec;
}

TrainResult train(vae::VaeModel& model, const Matrix& images, const TrainConfig& cfg,
                  const RecordCallback& on_record) {
  TrainResult result;
  result.warnings = cfg.loss.validate(cfg.force);
  if (images.cols() != static_cast<Eigen::Index>(model.architecture().input_dim)) {
    throw std::invalid_argument("train: images have " + std::to_string(images.cols()) +
                                " pixels, model expects " +
                                std::to_string(model.architecture().input_dim));
  }
  const auto n = static_cast<std::size_t>(images.rows());
  if (cfg.batch_size == 0 || cfg.batch_size > n) {
    throw std::invalid_argument("train: batch size must lie in [1, dataset size]");
  }

  const std::size_t weight_n = cfg.dataset_size == 0 ? n : cfg.dataset_size;
  Adam adam(model.parameters(), cfg.adam);
  EpochSampler sampler(n, cfg.batch_size, cfg.seed);
  std::mt19937_64 noise(cfg.seed ^ kNoiseStream);

  for (std::size_t t = 0; t <= cfg.steps; ++t) {
    const bool training = t < cfg.steps;
    const bool record =
        cfg.log_every > 0 && cfg.steps > 0 && (t % cfg.log_every == 0 || t == cfg.steps);
    if (!training && !record) break;

    const ad::Tensor x = to_tensor(gather_rows(images, sampler.next_batch()));
    vae::LossBreakdown loss;
    try {
      if (training) {
        loss = vae::evaluate_batch(cfg.loss, model, x, noise, t, weight_n);
      } else {
        ad::NoGradGuard guard;
        loss = vae::evaluate_batch(cfg.loss, model, x, noise, t, weight_n);
      }
    } catch (const std::domain_error& e) {
      result.diverged = true;
      result.divergence = "step " + std::to_string(t) + ": " + e.what();
      break;
    }

    if (record) {
      InfoPlaneRecord rec;
      try {
        rec = measure_info_plane(model, images, cfg.info, cfg.seed ^ (kMeasureStream + t));
      } catch (const std::exception& e) {
        result.diverged = true;
        result.divergence = "step " + std::to_string(t) + ": latent measurement failed: " + e.what();
        break;
      }
      rec.step = t;
      rec.recon_loss = -loss.recon_log_likelihood;
      rec.total_loss = loss.loss.item();
      result.records.push_back(std::move(rec));
      result.last_good_record = static_cast<long>(result.records.size()) - 1;
      if (on_record) on_record(result.records.back());
    }

    if (training) {
      ad::backward(loss.loss);
      adam.step();
      result.steps_completed = t + 1;
    }
  }
  return result;
}

}  // namespace privae
