#include "privae/gram.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace privae {

namespace {

void require_finite(const Matrix& data, const char* op) {
  if (!data.allFinite()) throw std::invalid_argument(std::string(op) + ": non-finite data");
}

double squared_distance(const Matrix& data, Eigen::Index i, Eigen::Index j) {
  return (data.row(i) - data.row(j)).squaredNorm();
}

}  // namespace

std::string WidthRule::name() const {
  switch (kind) {
    case Kind::median_multiple:
      return "median-distance-multiple(" + std::to_string(multiple) + ")";
    case Kind::silverman:
      return "silverman";
  }
  return "unknown";
}

KernelSpec KernelSpec::fixed(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("KernelSpec: explicit sigma must be > 0");
  KernelSpec k;
  k.sigma = sigma;
  return k;
}

KernelSpec KernelSpec::median(double multiple) {
  if (!(multiple > 0.0)) throw std::invalid_argument("KernelSpec: median multiple must be > 0");
  KernelSpec k;
  k.rule = {WidthRule::Kind::median_multiple, multiple};
  return k;
}

KernelSpec KernelSpec::silverman() {
  KernelSpec k;
  k.rule = {WidthRule::Kind::silverman, 1.0};
  return k;
}

double median_pairwise_distance(const Matrix& data) {
  const Eigen::Index n = data.rows();
  if (n < 2) throw std::invalid_argument("median_pairwise_distance: need at least 2 samples");
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) d.push_back(std::sqrt(squared_distance(data, i, j)));
  }
  // Lower median for an even count keeps the value an observed distance.
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>((d.size() - 1) / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

double silverman_width(const Matrix& data) {
  const Eigen::Index n = data.rows();
  const Eigen::Index dims = data.cols();
  if (n < 2) throw std::invalid_argument("silverman_width: need at least 2 samples");
  const Eigen::RowVectorXd mu = data.colwise().mean();
  const double mean_var =
      (data.rowwise() - mu).array().square().sum() / static_cast<double>((n - 1) * dims);
  const double d = static_cast<double>(dims);
  return std::sqrt(mean_var) * std::pow(4.0 / ((d + 2.0) * static_cast<double>(n)), 1.0 / (d + 4.0));
}

double resolve_width(const Matrix& data, const KernelSpec& kernel) {
  if (kernel.sigma) {
    if (!(*kernel.sigma > 0.0)) throw std::invalid_argument("kernel width must be > 0");
    return *kernel.sigma;
  }
  require_finite(data, "resolve_width");
  double sigma = 0.0;
  switch (kernel.rule.kind) {
    case WidthRule::Kind::median_multiple:
      sigma = kernel.rule.multiple * median_pairwise_distance(data);
      break;
    case WidthRule::Kind::silverman:
      sigma = silverman_width(data);
      break;
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("width rule " + kernel.rule.name() +
                                " is degenerate: pairwise distances are zero");
  }
  return sigma;
}

NormalizedGram NormalizedGram::from_entries(Eigen::MatrixXd entries) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    throw std::invalid_argument("NormalizedGram: matrix must be square and nonempty");
  }
  if (!entries.allFinite()) throw std::invalid_argument("NormalizedGram: non-finite entries");
  if ((entries - entries.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("NormalizedGram: matrix is not symmetric");
  }
  if (std::abs(entries.trace() - 1.0) > 1e-10) {
    throw std::invalid_argument("NormalizedGram: trace is " + std::to_string(entries.trace()) +
                                ", expected 1");
  }
  return NormalizedGram(std::move(entries));
}

NormalizedGram NormalizedGram::identity(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  return NormalizedGram(Eigen::MatrixXd::Identity(m, m) / static_cast<double>(n));
}

NormalizedGram NormalizedGram::constant(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  return NormalizedGram(Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(n)));
}

NormalizedGram gram_with_width(const Matrix& data, double sigma) {
  const Eigen::Index n = data.rows();
  if (n < 2) throw std::invalid_argument("gram: need at least 2 samples");
  require_finite(data, "gram");
  if (!(sigma > 0.0)) throw std::invalid_argument("gram: kernel width must be > 0");
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  // RBF has K_ii = 1, so the normalization reduces to K / N.
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = inv_n;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = inv_n * std::exp(-squared_distance(data, i, j) * inv_two_var);
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  return NormalizedGram::from_entries(std::move(a));
}

NormalizedGram gram(const Matrix& data, const KernelSpec& kernel) {
  if (data.rows() < 2) throw std::invalid_argument("gram: need at least 2 samples");
  require_finite(data, "gram");
  return gram_with_width(data, resolve_width(data, kernel));
}

NormalizedGram hadamard_joint(std::span<const NormalizedGram> grams) {
  if (grams.size() < 2) throw std::invalid_argument("hadamard_joint: need at least 2 grams");
  Eigen::MatrixXd product = grams.front().entries();
  for (std::size_t k = 1; k < grams.size(); ++k) {
    if (grams[k].n() != grams.front().n()) {
      throw std::invalid_argument("hadamard_joint: size mismatch " +
                                  std::to_string(grams.front().n()) + " vs " +
                                  std::to_string(grams[k].n()));
    }
    product.array() *= grams[k].entries().array();
  }
  const double trace = product.trace();
  if (!(trace > 0.0)) throw std::domain_error("hadamard_joint: product has zero trace");
  product /= trace;
  // Re-symmetrize against roundoff in the division.
  product = 0.5 * (product + product.transpose()).eval();
  return NormalizedGram::from_entries(std::move(product));
}

NormalizedGram hadamard_joint(const NormalizedGram& a, const NormalizedGram& b) {
  const NormalizedGram pair[] = {a, b};
  return hadamard_joint(pair);
}

}  // namespace privae
