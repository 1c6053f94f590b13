#include "privae/renyi.hpp"

#include "privae/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace privae {

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("Renyi order alpha must be finite and > 0");
  }
}

bool is_constant_column(const Eigen::VectorXd& column) {
  return (column.array() == column(0)).all();
}

}  // namespace

Eigen::VectorXd spectrum(const NormalizedGram& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a.entries(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("spectrum: symmetric eigensolver failed to converge");
  }
  Eigen::VectorXd lambda = solver.eigenvalues();
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) <= kEigenvalueFloor) lambda(i) = 0.0;
  }
  return lambda;
}

double entropy_from_spectrum(const Eigen::VectorXd& eigenvalues, double alpha) {
  require_alpha(alpha);
  double bits = 0.0;
  if (alpha == 1.0) {
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
      const double l = eigenvalues(i);
      if (l > 0.0) bits -= l * std::log2(l);
    }
  } else {
    double power_sum = 0.0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
      const double l = eigenvalues(i);
      if (l > 0.0) power_sum += std::pow(l, alpha);
    }
    bits = std::log2(power_sum) / (1.0 - alpha);
  }
  return bits < 0.0 ? 0.0 : bits;
}

EntropyEstimate entropy(const NormalizedGram& a, double alpha) {
  require_alpha(alpha);
  return {entropy_from_spectrum(spectrum(a), alpha), alpha, a.n(), alpha == 1.0};
}

double mutual_information(const NormalizedGram& a, const NormalizedGram& b, double alpha) {
  if (a.n() != b.n()) {
    throw std::invalid_argument("mutual_information: sample counts differ (" +
                                std::to_string(a.n()) + " vs " + std::to_string(b.n()) + ")");
  }
  return entropy(a, alpha).bits + entropy(b, alpha).bits -
         entropy(hadamard_joint(a, b), alpha).bits;
}

double total_correlation(std::span<const NormalizedGram> grams, double alpha) {
  if (grams.size() < 2) throw std::invalid_argument("total_correlation: need d >= 2 dimensions");
  double marginal = 0.0;
  for (const auto& g : grams) marginal += entropy(g, alpha).bits;
  return marginal - entropy(hadamard_joint(grams), alpha).bits;
}

std::vector<NormalizedGram> per_dimension_grams(const Matrix& z, const KernelSpec& kernel) {
  std::vector<NormalizedGram> grams;
  grams.reserve(static_cast<std::size_t>(z.cols()));
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const Eigen::VectorXd column = z.col(j);
    if (!kernel.sigma && is_constant_column(column)) {
      grams.push_back(NormalizedGram::constant(static_cast<std::size_t>(z.rows())));
    } else {
      grams.push_back(gram(Matrix(column), kernel));
    }
  }
  return grams;
}

InfoPlanePoint info_plane_measure(const Matrix& x, const Matrix& z, const KernelSpec& kernel,
                                  double alpha) {
  const double alphas[] = {alpha};
  return info_plane_measure(x, z, kernel, alphas).front();
}

std::vector<InfoPlanePoint> info_plane_measure(const Matrix& x, const Matrix& z,
                                               const KernelSpec& kernel,
                                               std::span<const double> alphas) {
  if (x.rows() != z.rows()) {
    throw std::invalid_argument("info_plane_measure: x has " + std::to_string(x.rows()) +
                                " rows but z has " + std::to_string(z.rows()));
  }
  for (double a : alphas) require_alpha(a);

  const NormalizedGram gx = gram(x, kernel);
  const NormalizedGram gz = gram(z, kernel);
  const Eigen::VectorXd sx = spectrum(gx);
  const Eigen::VectorXd sz = spectrum(gz);
  const Eigen::VectorXd sxz = spectrum(hadamard_joint(gx, gz));

  std::vector<Eigen::VectorXd> dim_spectra;
  Eigen::VectorXd joint_dims_spectrum;
  const bool has_tc = z.cols() >= 2;
  if (has_tc) {
    const auto dims = per_dimension_grams(z, kernel);
    for (const auto& g : dims) dim_spectra.push_back(spectrum(g));
    joint_dims_spectrum = spectrum(hadamard_joint(dims));
  }

  std::vector<InfoPlanePoint> out;
  out.reserve(alphas.size());
  for (double a : alphas) {
    InfoPlanePoint p;
    p.entropy_bits = entropy_from_spectrum(sz, a);
    p.mutual_information_bits =
        entropy_from_spectrum(sx, a) + p.entropy_bits - entropy_from_spectrum(sxz, a);
    if (has_tc) {
      double marginal = 0.0;
      for (const auto& s : dim_spectra) marginal += entropy_from_spectrum(s, a);
      p.total_correlation_bits = marginal - entropy_from_spectrum(joint_dims_spectrum, a);
    }
    out.push_back(p);
  }
  return out;
}

std::vector<InfoPlanePoint> averaged_info_plane(const Matrix& x, const Matrix& z,
                                                std::size_t batch_size,
                                                const KernelSpec& kernel,
                                                std::span<const double> alphas) {
  if (batch_size < 2) throw std::invalid_argument("averaged_info_plane: batch size must be >= 2");
  if (x.rows() != z.rows()) throw std::invalid_argument("averaged_info_plane: row count mismatch");
  const std::size_t batches = static_cast<std::size_t>(x.rows()) / batch_size;
  if (batches == 0) throw std::invalid_argument("averaged_info_plane: fewer rows than one batch");

  std::vector<std::vector<InfoPlanePoint>> per_batch(batches);
  parallel_for(batches, [&](std::size_t b) {
    const auto start = static_cast<Eigen::Index>(b * batch_size);
    const auto len = static_cast<Eigen::Index>(batch_size);
    per_batch[b] = info_plane_measure(Matrix(x.middleRows(start, len)),
                                      Matrix(z.middleRows(start, len)), kernel, alphas);
  });

  std::vector<InfoPlanePoint> mean(alphas.size());
  for (const auto& row : per_batch) {
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      mean[a].mutual_information_bits += row[a].mutual_information_bits;
      mean[a].total_correlation_bits += row[a].total_correlation_bits;
      mean[a].entropy_bits += row[a].entropy_bits;
    }
  }
  const double inv = 1.0 / static_cast<double>(batches);
  for (auto& p : mean) {
    p.mutual_information_bits *= inv;
    p.total_correlation_bits *= inv;
    p.entropy_bits *= inv;
  }
  return mean;
}

}  // namespace privae
