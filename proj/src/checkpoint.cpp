#include "privae/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace privae {

namespace {

constexpr char kMagic[4] = {'P', 'R', 'I', 'V'};

template <class T>
void put(std::ostream& out, T v) {
  static_assert(std::is_unsigned_v<T>);
  unsigned char b[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
bool get(std::istream& in, T& v) {
  unsigned char b[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(T))) return false;
  v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(b[i]) << (8 * i);
  return true;
}

[[noreturn]] void truncated(const std::filesystem::path& path, const std::string& where) {
  throw std::runtime_error("checkpoint '" + path.string() + "' truncated in " + where);
}

}  // namespace

void save_checkpoint(std::span<const ad::Parameter> params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kCheckpointFormat);
  for (const auto& p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    const auto& shape = p.tensor.shape();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(shape.size()));
    for (std::size_t d : shape) put<std::uint64_t>(out, d);
    for (double v : p.tensor.values()) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::vector<ad::Parameter> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path.string() + "'");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("'" + path.string() + "' is not a checkpoint");
  }
  std::uint32_t format = 0;
  if (!get(in, format)) truncated(path, "header");
  if (format != kCheckpointFormat) {
    throw std::runtime_error("unsupported checkpoint format " + std::to_string(format));
  }

  std::vector<ad::Parameter> params;
  std::uint32_t name_len = 0;
  while (get(in, name_len)) {
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) truncated(path, "a parameter name");
    std::uint32_t rank = 0;
    if (!get(in, rank)) truncated(path, "'" + name + "'");
    ad::Shape shape(rank);
    for (auto& d : shape) {
      std::uint64_t v = 0;
      if (!get(in, v)) truncated(path, "'" + name + "'");
      d = static_cast<std::size_t>(v);
    }
    std::vector<double> values(ad::numel(shape));
    for (double& v : values) {
      std::uint64_t bits = 0;
      if (!get(in, bits)) truncated(path, "'" + name + "'");
      v = std::bit_cast<double>(bits);
    }
    params.push_back({name, ad::Tensor::variable(std::move(shape), std::move(values))});
  }
  return params;
}

}  // namespace privae
