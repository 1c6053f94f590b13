#pragma once

// Procedural stand-in for dSprites at 16x16: every combination of four
// independent ground-truth factors is rendered exactly once.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace privae {

struct Factor {
  std::string name;
  std::size_t cardinality = 0;
};

using Image = std::vector<double>;  // row-major image_size x image_size, values in {0, 1}

enum class Shape2D : std::size_t { square = 0, ellipse = 1, triangle = 2 };

class FactorGrid {
 public:
  static constexpr std::size_t kImageSize = 16;
  static constexpr std::size_t kPositionOrigin = 4;  // first pixel column/row of pos index 0

  /// shape x3, scale x4, pos_x x8, pos_y x8 = 768 images.
  FactorGrid();

  const std::vector<Factor>& factors() const { return factors_; }
  std::size_t image_size() const { return kImageSize; }
  std::size_t pixels() const { return kImageSize * kImageSize; }
  std::size_t size() const { return size_; }

  /// Deterministic raster for one factor tuple (shape, scale, pos_x, pos_y).
  Image render(const std::vector<std::size_t>& factor_indices) const;

  /// Factor tuple of the i-th image (last factor varies fastest).
  std::vector<std::size_t> factors_of(std::size_t index) const;
  std::size_t index_of(const std::vector<std::size_t>& factor_indices) const;

  /// All images as rows, rendered once and cached.
  const Eigen::MatrixXd& images() const;
  /// N x K matrix of factor indices.
  Eigen::MatrixXi factor_table() const;

 private:
  std::vector<Factor> factors_;
  std::size_t size_ = 0;
  mutable Eigen::MatrixXd images_;
};

/// Shuffled epochs over [0, n): every index appears once per epoch, and the
/// order is a function of the seed only. A trailing partial epoch is
/// completed from the next shuffle so every batch is full.
class EpochSampler {
 public:
  EpochSampler(std::size_t n, std::size_t batch_size, std::uint64_t seed);
  std::vector<std::size_t> next_batch();
  std::size_t epoch() const { return epoch_; }

 private:
  void reshuffle();
  std::size_t n_;
  std::size_t batch_size_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::size_t epoch_ = 0;
};

struct Batch {
  Eigen::MatrixXd images;
  Eigen::MatrixXi factors;
  std::vector<std::size_t> indices;
};

/// Stream of (images, factor indices) minibatches over a FactorGrid.
class BatchStream {
 public:
  BatchStream(const FactorGrid& grid, std::uint64_t seed, std::size_t batch_size);
  Batch next();

 private:
  const FactorGrid& grid_;
  EpochSampler sampler_;
};

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows);

/// Flat binary export: magic "PRFG", u32 version, u32 factor count, per factor
/// (u32 name length, name bytes, u32 cardinality), u32 image size, u32 image
/// count, then images bit-packed row-major, LSB first, each image padded to a
/// whole byte.
void export_factor_grid(const FactorGrid& grid, const std::filesystem::path& path);

struct LoadedFactorGrid {
  std::vector<Factor> factors;
  std::size_t image_size = 0;
  Eigen::MatrixXd images;
};
LoadedFactorGrid import_factor_grid(const std::filesystem::path& path);

}  // namespace privae
