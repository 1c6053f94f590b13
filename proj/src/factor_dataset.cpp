#include "privae/factor_dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace privae {

namespace {

constexpr char kMagic[4] = {'P', 'R', 'F', 'G'};
constexpr std::uint32_t kVersion = 1;

bool inside(Shape2D shape, double dx, double dy, double r) {
  switch (shape) {
    case Shape2D::square:
      return std::abs(dx) <= r && std::abs(dy) <= r;
    case Shape2D::ellipse: {
      const double a = r + 0.5;
      const double b = 0.7 * a;
      return (dx * dx) / (a * a) + (dy * dy) / (b * b) <= 1.0;
    }
    case Shape2D::triangle:
      // Apex up, base of width 2r + 1 on the bottom row.
      return dy >= -r && dy <= r && std::abs(dx) <= (dy + r) / 2.0;
  }
  return false;
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw std::runtime_error(std::string("factor grid file truncated while reading ") + what);
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

FactorGrid::FactorGrid()
    : factors_{{"shape", 3}, {"scale", 4}, {"pos_x", 8}, {"pos_y", 8}} {
  size_ = 1;
  for (const auto& f : factors_) size_ *= f.cardinality;
}

Image FactorGrid::render(const std::vector<std::size_t>& idx) const {
  if (idx.size() != factors_.size()) {
    throw std::invalid_argument("render: expected " + std::to_string(factors_.size()) +
                                " factor indices, got " + std::to_string(idx.size()));
  }
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= factors_[k].cardinality) {
      throw std::out_of_range("render: factor '" + factors_[k].name + "' index " +
                              std::to_string(idx[k]) + " >= " +
                              std::to_string(factors_[k].cardinality));
    }
  }
  const auto shape = static_cast<Shape2D>(idx[0]);
  const double r = 1.0 + static_cast<double>(idx[1]);
  const double cx = static_cast<double>(kPositionOrigin + idx[2]);
  const double cy = static_cast<double>(kPositionOrigin + idx[3]);

  Image img(kImageSize * kImageSize, 0.0);
  for (std::size_t row = 0; row < kImageSize; ++row) {
    for (std::size_t col = 0; col < kImageSize; ++col) {
      const double dx = static_cast<double>(col) - cx;
      const double dy = static_cast<double>(row) - cy;
      if (inside(shape, dx, dy, r)) img[row * kImageSize + col] = 1.0;
    }
  }
  return img;
}

std::vector<std::size_t> FactorGrid::factors_of(std::size_t index) const {
  if (index >= size_) throw std::out_of_range("factors_of: index out of range");
  std::vector<std::size_t> idx(factors_.size());
  for (std::size_t k = factors_.size(); k-- > 0;) {
    idx[k] = index % factors_[k].cardinality;
    index /= factors_[k].cardinality;
  }
  return idx;
}

std::size_t FactorGrid::index_of(const std::vector<std::size_t>& idx) const {
  if (idx.size() != factors_.size()) throw std::invalid_argument("index_of: wrong tuple size");
  std::size_t index = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= factors_[k].cardinality) throw std::out_of_range("index_of: factor out of range");
    index = index * factors_[k].cardinality + idx[k];
  }
  return index;
}

const Eigen::MatrixXd& FactorGrid::images() const {
  if (images_.rows() == 0) {
    Eigen::MatrixXd all(static_cast<Eigen::Index>(size_), static_cast<Eigen::Index>(pixels()));
    for (std::size_t i = 0; i < size_; ++i) {
      const Image img = render(factors_of(i));
      for (std::size_t p = 0; p < img.size(); ++p) {
        all(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = img[p];
      }
    }
    images_ = std::move(all);
  }
  return images_;
}

Eigen::MatrixXi FactorGrid::factor_table() const {
  Eigen::MatrixXi table(static_cast<Eigen::Index>(size_), static_cast<Eigen::Index>(factors_.size()));
  for (std::size_t i = 0; i < size_; ++i) {
    const auto idx = factors_of(i);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = static_cast<int>(idx[k]);
    }
  }
  return table;
}

EpochSampler::EpochSampler(std::size_t n, std::size_t batch_size, std::uint64_t seed)
    : n_(n), batch_size_(batch_size), rng_(seed) {
  if (n == 0) throw std::invalid_argument("EpochSampler: empty dataset");
  if (batch_size == 0) throw std::invalid_argument("EpochSampler: batch size must be > 0");
  order_.resize(n);
  reshuffle();
}

void EpochSampler::reshuffle() {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::shuffle(order_.begin(), order_.end(), rng_);
  cursor_ = 0;
}

std::vector<std::size_t> EpochSampler::next_batch() {
  std::vector<std::size_t> batch;
  batch.reserve(batch_size_);
  while (batch.size() < batch_size_) {
    if (cursor_ == n_) {
      reshuffle();
      ++epoch_;
    }
    batch.push_back(order_[cursor_++]);
  }
  return batch;
}

BatchStream::BatchStream(const FactorGrid& grid, std::uint64_t seed, std::size_t batch_size)
    : grid_(grid), sampler_(grid.size(), batch_size, seed) {}

Batch BatchStream::next() {
  Batch b;
  b.indices = sampler_.next_batch();
  b.images = gather_rows(grid_.images(), b.indices);
  b.factors.resize(static_cast<Eigen::Index>(b.indices.size()),
                   static_cast<Eigen::Index>(grid_.factors().size()));
  for (std::size_t i = 0; i < b.indices.size(); ++i) {
    const auto idx = grid_.factors_of(b.indices[i]);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      b.factors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = static_cast<int>(idx[k]);
    }
  }
  return b;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

void export_factor_grid(const FactorGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(grid.factors().size()));
  for (const auto& f : grid.factors()) {
    write_u32(out, static_cast<std::uint32_t>(f.name.size()));
    out.write(f.name.data(), static_cast<std::streamsize>(f.name.size()));
    write_u32(out, static_cast<std::uint32_t>(f.cardinality));
  }
  write_u32(out, static_cast<std::uint32_t>(grid.image_size()));
  write_u32(out, static_cast<std::uint32_t>(grid.size()));

  const Eigen::MatrixXd& images = grid.images();
  const std::size_t bytes = (grid.pixels() + 7) / 8;
  std::vector<char> packed(bytes);
  for (Eigen::Index i = 0; i < images.rows(); ++i) {
    std::fill(packed.begin(), packed.end(), 0);
    for (Eigen::Index p = 0; p < images.cols(); ++p) {
      if (images(i, p) > 0.5) {
        packed[static_cast<std::size_t>(p) / 8] |= static_cast<char>(1u << (p % 8));
      }
    }
    out.write(packed.data(), static_cast<std::streamsize>(bytes));
  }
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

LoadedFactorGrid import_factor_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("'" + path.string() + "' is not a factor grid file");
  }
  const std::uint32_t version = read_u32(in, "version");
  if (version != kVersion) {
    throw std::runtime_error("unsupported factor grid version " + std::to_string(version));
  }
  LoadedFactorGrid grid;
  const std::uint32_t count = read_u32(in, "factor count");
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint32_t len = read_u32(in, "factor name length");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw std::runtime_error("factor grid file truncated in names");
    grid.factors.push_back({name, read_u32(in, "cardinality")});
  }
  grid.image_size = read_u32(in, "image size");
  const std::uint32_t n = read_u32(in, "image count");
  const std::size_t pixels = grid.image_size * grid.image_size;
  const std::size_t bytes = (pixels + 7) / 8;
  grid.images.resize(n, static_cast<Eigen::Index>(pixels));
  std::vector<unsigned char> packed(bytes);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(bytes))) {
      throw std::runtime_error("factor grid file truncated in image " + std::to_string(i));
    }
    for (std::size_t p = 0; p < pixels; ++p) {
      grid.images(i, static_cast<Eigen::Index>(p)) = (packed[p / 8] >> (p % 8)) & 1u ? 1.0 : 0.0;
    }
  }
  return grid;
}

}  // namespace privae
