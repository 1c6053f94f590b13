#include "privae/factor_dataset.hpp"
#include "privae/metrics.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

namespace fs = std::filesystem;
using privae::FactorGrid;

TEST(FactorGrid, EveryCombinationRendersOnce) {
  const FactorGrid grid;
  ASSERT_EQ(grid.size(), 768u);
  const auto& images = grid.images();
  ASSERT_EQ(images.rows(), 768);
  ASSERT_EQ(images.cols(), 256);
  std::set<std::vector<double>> unique;
  for (Eigen::Index i = 0; i < images.rows(); ++i) {
    std::vector<double> row(256);
    for (Eigen::Index p = 0; p < 256; ++p) row[p] = images(i, p);
    EXPECT_GE(images.row(i).sum(), 4.0) << i;
    EXPECT_TRUE(((images.row(i).array() == 0.0) || (images.row(i).array() == 1.0)).all());
    unique.insert(row);
  }
  EXPECT_EQ(unique.size(), 768u);
}

TEST(FactorGrid, IndexRoundTrip) {
  const FactorGrid grid;
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(grid.index_of(grid.factors_of(i)), i);
  EXPECT_EQ(grid.factors_of(1), (std::vector<std::size_t>{0, 0, 0, 1}));
  EXPECT_THROW(grid.factors_of(768), std::out_of_range);
  EXPECT_THROW(grid.render({0, 4, 0, 0}), std::out_of_range);
  EXPECT_THROW(grid.render({0, 0, 0}), std::invalid_argument);
}

TEST(FactorGrid, PositionShiftsTheRaster) {
  const FactorGrid grid;
  const std::size_t s = grid.image_size();
  for (std::size_t shape = 0; shape < 3; ++shape) {
    for (std::size_t scale = 0; scale < 4; ++scale) {
      for (std::size_t p = 0; p + 1 < 8; ++p) {
        const auto base = grid.render({shape, scale, p, 3});
        const auto right = grid.render({shape, scale, p + 1, 3});
        const auto down = grid.render({shape, scale, 3, p});
        const auto lower = grid.render({shape, scale, 3, p + 1});
        for (std::size_t r = 0; r < s; ++r) {
          for (std::size_t c = 1; c < s; ++c) EXPECT_EQ(right[r * s + c], base[r * s + c - 1]);
        }
        for (std::size_t r = 1; r < s; ++r) {
          for (std::size_t c = 0; c < s; ++c) EXPECT_EQ(lower[r * s + c], down[(r - 1) * s + c]);
        }
      }
    }
  }
}

TEST(FactorGrid, FactorsAreIndependent) {
  const FactorGrid grid;
  const Eigen::MatrixXi t = grid.factor_table();
  for (Eigen::Index a = 0; a < t.cols(); ++a) {
    for (Eigen::Index b = a + 1; b < t.cols(); ++b) {
      std::vector<int> ca(t.col(a).data(), t.col(a).data() + t.rows());
      std::vector<int> cb(t.col(b).data(), t.col(b).data() + t.rows());
      EXPECT_NEAR(privae::discrete_mutual_information(ca, cb), 0.0, 1e-12);
    }
  }
}

TEST(EpochSampler, EachEpochIsAPermutation) {
  privae::EpochSampler s(10, 4, 7);
  std::vector<std::size_t> seen;
  for (int b = 0; b < 5; ++b) {
    const auto batch = s.next_batch();
    ASSERT_EQ(batch.size(), 4u);
    seen.insert(seen.end(), batch.begin(), batch.end());
  }
  for (std::size_t e = 0; e < 2; ++e) {
    std::set<std::size_t> epoch(seen.begin() + static_cast<long>(10 * e), seen.begin() + static_cast<long>(10 * (e + 1)));
    EXPECT_EQ(epoch.size(), 10u);
  }
  EXPECT_EQ(s.epoch(), 1u);
}

TEST(EpochSampler, SeedDeterminesOrder) {
  privae::EpochSampler a(768, 64, 1), b(768, 64, 1), c(768, 64, 2);
  const auto ba = a.next_batch();
  EXPECT_EQ(ba, b.next_batch());
  EXPECT_NE(ba, c.next_batch());
  EXPECT_THROW(privae::EpochSampler(0, 1, 0), std::invalid_argument);
  EXPECT_THROW(privae::EpochSampler(3, 0, 0), std::invalid_argument);
}

TEST(BatchStream, ImagesMatchFactors) {
  const FactorGrid grid;
  privae::BatchStream stream(grid, 3, 16);
  const auto b = stream.next();
  ASSERT_EQ(b.images.rows(), 16);
  for (Eigen::Index i = 0; i < 16; ++i) {
    std::vector<std::size_t> idx;
    for (Eigen::Index k = 0; k < 4; ++k) idx.push_back(static_cast<std::size_t>(b.factors(i, k)));
    const auto img = grid.render(idx);
    for (std::size_t p = 0; p < img.size(); ++p) EXPECT_EQ(b.images(i, static_cast<Eigen::Index>(p)), img[p]);
    EXPECT_EQ(grid.index_of(idx), b.indices[static_cast<std::size_t>(i)]);
  }
}

TEST(FactorGridFile, ExportImportRoundTrip) {
  const FactorGrid grid;
  const auto dir = fs::temp_directory_path() / "privae_tests";
  fs::create_directories(dir);
  const auto path = dir / "grid.bin";
  privae::export_factor_grid(grid, path);
  // 72-byte header, then 32 bytes per image
  EXPECT_EQ(fs::file_size(path), 72u + 768u * 32u);
  const auto loaded = privae::import_factor_grid(path);
  EXPECT_EQ(loaded.image_size, 16u);
  ASSERT_EQ(loaded.factors.size(), 4u);
  EXPECT_EQ(loaded.factors[2].name, "pos_x");
  EXPECT_EQ(loaded.factors[1].cardinality, 4u);
  EXPECT_TRUE(loaded.images == grid.images());

  const auto bad = dir / "grid_bad.bin";
  std::ofstream(bad, std::ios::binary) << "XXXX";
  EXPECT_THROW(privae::import_factor_grid(bad), std::runtime_error);
  const auto cut = dir / "grid_cut.bin";
  fs::copy_file(path, cut, fs::copy_options::overwrite_existing);
  fs::resize_file(cut, 100);
  EXPECT_THROW(privae::import_factor_grid(cut), std::runtime_error);
}
