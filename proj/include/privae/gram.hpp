#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <string>

namespace privae {

/// Samples are rows.
using Matrix = Eigen::MatrixXd;

struct WidthRule {
  enum class Kind { median_multiple, silverman };
  Kind kind = Kind::median_multiple;
  double multiple = 1.0;  // c in sigma = c * median pairwise distance

  std::string name() const;
};

/// RBF kernel with either an explicit width or a data-driven rule.
struct KernelSpec {
  std::optional<double> sigma;
  WidthRule rule;

  static KernelSpec fixed(double sigma);
  static KernelSpec median(double multiple = 1.0);
  static KernelSpec silverman();
};

double median_pairwise_distance(const Matrix& data);
double silverman_width(const Matrix& data);
/// Throws if the resolved width is not strictly positive.
double resolve_width(const Matrix& data, const KernelSpec& kernel);

/// Symmetric, positive semidefinite, unit-trace matrix. Built by gram() or
/// hadamard_joint(); from_entries() validates symmetry and trace.
class NormalizedGram {
 public:
  static NormalizedGram from_entries(Eigen::MatrixXd entries);
  /// (1/n) I: every sample distinguishable.
  static NormalizedGram identity(std::size_t n);
  /// All entries 1/n: a constant variable.
  static NormalizedGram constant(std::size_t n);

  std::size_t n() const { return static_cast<std::size_t>(a_.rows()); }
  const Eigen::MatrixXd& entries() const { return a_; }

 private:
  explicit NormalizedGram(Eigen::MatrixXd a) : a_(std::move(a)) {}
  Eigen::MatrixXd a_;
};

/// A_ij = (1/N) K_ij / sqrt(K_ii K_jj) with K_ij = exp(-|x_i - x_j|^2 / (2 sigma^2)).
NormalizedGram gram(const Matrix& data, const KernelSpec& kernel);
NormalizedGram gram_with_width(const Matrix& data, double sigma);

/// (A_1 o ... o A_k) / tr(A_1 o ... o A_k)
NormalizedGram hadamard_joint(std::span<const NormalizedGram> grams);
NormalizedGram hadamard_joint(const NormalizedGram& a, const NormalizedGram& b);

}  // namespace privae
