#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mrrecon/types.hpp"

namespace mrrecon {

struct Gray16 {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint16_t> pixels;  // row-major
};

// Binary 16-bit PGM (P5, maxval 65535, big-endian samples).
void write_pgm16(const std::filesystem::path& path, const Gray16& image);
Gray16 read_pgm16(const std::filesystem::path& path);

// Linear map [lo, hi] -> [0, 65535], clamped. A degenerate range maps to 65535.
Gray16 to_gray16(std::span<const double> values, std::size_t width, std::size_t height, double lo, double hi);

Gray16 magnitude_gray(const ComplexImage& image);
// Phase mapped from [-pi, pi] onto the full 16-bit range.
Gray16 phase_gray(const ComplexImage& image);

}  // namespace mrrecon
