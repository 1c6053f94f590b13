#pragma once

// Matrix-based Renyi alpha-order entropy functionals. Every quantity is
// computed from the eigenspectrum of a unit-trace Gram matrix, so no density
// is ever estimated. Results are in bits.

#include "privae/gram.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace privae {

/// Eigenvalues at or below this are treated as exact zeros before powering.
inline constexpr double kEigenvalueFloor = 1e-12;

/// Default order for information-plane measurements.
inline constexpr double kDefaultAlpha = 1.01;

struct EntropyEstimate {
  double bits = 0.0;
  double alpha = kDefaultAlpha;
  std::size_t n = 0;
  bool shannon_limit = false;  // alpha == 1 exactly
};

/// Eigenvalues of a symmetric matrix, clamped to [0, inf) below kEigenvalueFloor.
Eigen::VectorXd spectrum(const NormalizedGram& a);
double entropy_from_spectrum(const Eigen::VectorXd& eigenvalues, double alpha);

/// (1 / (1 - alpha)) log2 sum_i lambda_i^alpha; alpha == 1 uses -sum lambda log2 lambda.
EntropyEstimate entropy(const NormalizedGram& a, double alpha);

/// S(A) + S(B) - S(A o B / tr(A o B))
double mutual_information(const NormalizedGram& a, const NormalizedGram& b, double alpha);

/// sum_j S(A_j) - S(joint(A_1, ..., A_d)), one Gram per latent coordinate.
double total_correlation(std::span<const NormalizedGram> grams, double alpha);

/// One Gram per column of `z`, each with its own resolved width. A constant
/// column under a data-driven rule maps to the constant Gram (zero entropy).
std::vector<NormalizedGram> per_dimension_grams(const Matrix& z, const KernelSpec& kernel);

struct InfoPlanePoint {
  double mutual_information_bits = 0.0;  // I(x; z)
  double total_correlation_bits = 0.0;   // T(z)
  double entropy_bits = 0.0;             // H(z)
};

/// I(x;z), T(z), H(z) on one minibatch (rows of x and z are paired).
InfoPlanePoint info_plane_measure(const Matrix& x, const Matrix& z, const KernelSpec& kernel,
                                  double alpha);
/// Same measurement for several orders sharing one set of eigendecompositions.
std::vector<InfoPlanePoint> info_plane_measure(const Matrix& x, const Matrix& z,
                                               const KernelSpec& kernel,
                                               std::span<const double> alphas);

/// Splits the rows into consecutive minibatches of `batch_size`, measures each,
/// and averages. Rows beyond the last full batch are ignored.
std::vector<InfoPlanePoint> averaged_info_plane(const Matrix& x, const Matrix& z,
                                                std::size_t batch_size,
                                                const KernelSpec& kernel,
                                                std::span<const double> alphas);

}  // namespace privae
