#pragma once

// Binary complex-array container shared by every module:
//
//   8 bytes   magic "MRRECON1"
//   u32       ndim
//   u32[ndim] dims
//   u32       dtype code (0 = interleaved complex float64)
//   payload   row-major (re, im) pairs
//
// All integers and floats are little-endian.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mrrecon/types.hpp"

namespace mrrecon {

struct ComplexArray {
  std::vector<std::uint32_t> dims;
  std::vector<cplx> values;
};

void write_array(const std::filesystem::path& path, const ComplexArray& array);
ComplexArray read_array(const std::filesystem::path& path);

void write_image(const std::filesystem::path& path, const ComplexImage& image);
ComplexImage read_image(const std::filesystem::path& path);

void write_samples(const std::filesystem::path& path, std::span<const cplx> samples);
std::vector<cplx> read_samples(const std::filesystem::path& path);

void write_lag_array(const std::filesystem::path& path, const LagArray& array);
LagArray read_lag_array(const std::filesystem::path& path);

}  // namespace mrrecon
