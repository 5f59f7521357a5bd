#include "mrrecon/array_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace mrrecon {
namespace {

constexpr std::array<char, 8> kMagic = {'M', 'R', 'R', 'E', 'C', 'O', 'N', '1'};
constexpr std::uint32_t kComplexFloat64 = 0;

void put_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(bytes, 4);
}

void put_f64(std::ostream& out, double x) {
  const auto v = std::bit_cast<std::uint64_t>(x);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(bytes, 8);
}

std::uint32_t get_u32(std::istream& in, const std::filesystem::path& path) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4))
    throw std::runtime_error("truncated array header in " + path.string());
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return v;
}

double decode_f64(const unsigned char* bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace

void write_array(const std::filesystem::path& path, const ComplexArray& array) {
  std::size_t count = 1;
  for (auto d : array.dims) count *= d;
  if (array.dims.empty() || count != array.values.size())
    throw std::invalid_argument("write_array: dims do not match value count");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, static_cast<std::uint32_t>(array.dims.size()));
  for (auto d : array.dims) put_u32(out, d);
  put_u32(out, kComplexFloat64);
  for (const auto& z : array.values) {
    put_f64(out, z.real());
    put_f64(out, z.imag());
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

ComplexArray read_array(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw std::runtime_error(path.string() + " is not an MRRECON1 array file");

  ComplexArray array;
  const auto ndim = get_u32(in, path);
  if (ndim == 0 || ndim > 8) throw std::runtime_error("unsupported ndim in " + path.string());
  std::size_t count = 1;
  for (std::uint32_t i = 0; i < ndim; ++i) {
    array.dims.push_back(get_u32(in, path));
    count *= array.dims.back();
  }
  if (get_u32(in, path) != kComplexFloat64)
    throw std::runtime_error("unsupported dtype code in " + path.string());

  std::vector<unsigned char> payload(count * 16);
  if (!in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size())))
    throw std::runtime_error("truncated payload in " + path.string());
  array.values.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    array.values[i] = {decode_f64(&payload[16 * i]), decode_f64(&payload[16 * i + 8])};
  return array;
}

void write_image(const std::filesystem::path& path, const ComplexImage& image) {
  const auto n = static_cast<std::uint32_t>(image.size());
  write_array(path, {{n, n}, {image.values().begin(), image.values().end()}});
}

ComplexImage read_image(const std::filesystem::path& path) {
  auto array = read_array(path);
  if (array.dims.size() != 2 || array.dims[0] != array.dims[1])
    throw std::runtime_error(path.string() + " does not hold a square 2-D image");
  return ComplexImage(array.dims[0], std::move(array.values));
}

void write_samples(const std::filesystem::path& path, std::span<const cplx> samples) {
  write_array(path, {{static_cast<std::uint32_t>(samples.size())}, {samples.begin(), samples.end()}});
}

std::vector<cplx> read_samples(const std::filesystem::path& path) {
  auto array = read_array(path);
  if (array.dims.size() != 1) throw std::runtime_error(path.string() + " does not hold 1-D samples");
  return std::move(array.values);
}

void write_lag_array(const std::filesystem::path& path, const LagArray& array) {
  const auto side = static_cast<std::uint32_t>(array.side());
  write_array(path, {{side, side}, {array.values().begin(), array.values().end()}});
}

LagArray read_lag_array(const std::filesystem::path& path) {
  auto array = read_array(path);
  if (array.dims.size() != 2 || array.dims[0] != array.dims[1] || array.dims[0] % 2 == 0)
    throw std::runtime_error(path.string() + " does not hold a (2N-1)x(2N-1) lag array");
  return LagArray((array.dims[0] + 1) / 2, std::move(array.values));
}

}  // namespace mrrecon
