#include "mrrecon/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mrrecon {

void write_pgm16(const std::filesystem::path& path, const Gray16& image) {
  if (image.pixels.size() != image.width * image.height) throw std::invalid_argument("write_pgm16: bad pixel count");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "P5\n" << image.width << ' ' << image.height << "\n65535\n";
  for (auto p : image.pixels) {
    const char bytes[2] = {static_cast<char>(p >> 8), static_cast<char>(p & 0xff)};
    out.write(bytes, 2);
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Gray16 read_pgm16(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string magic;
  Gray16 image;
  int maxval = 0;
  in >> magic >> image.width >> image.height >> maxval;
  if (magic != "P5" || maxval != 65535) throw std::runtime_error(path.string() + " is not a 16-bit P5 PGM");
  in.get();
  image.pixels.resize(image.width * image.height);
  for (auto& p : image.pixels) {
    unsigned char bytes[2];
    if (!in.read(reinterpret_cast<char*>(bytes), 2)) throw std::runtime_error("truncated PGM " + path.string());
    p = static_cast<std::uint16_t>((bytes[0] << 8) | bytes[1]);
  }
  return image;
}

Gray16 to_gray16(std::span<const double> values, std::size_t width, std::size_t height, double lo, double hi) {
  if (values.size() != width * height) throw std::invalid_argument("to_gray16: bad value count");
  Gray16 image{width, height, std::vector<std::uint16_t>(values.size(), 65535)};
  if (!(hi > lo)) return image;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double t = std::clamp((values[i] - lo) / (hi - lo), 0.0, 1.0);
    image.pixels[i] = static_cast<std::uint16_t>(std::lround(t * 65535.0));
  }
  return image;
}

Gray16 magnitude_gray(const ComplexImage& image) {
  std::vector<double> mag(image.pixel_count());
  std::transform(image.values().begin(), image.values().end(), mag.begin(), [](cplx z) { return std::abs(z); });
  const double peak = mag.empty() ? 0.0 : *std::max_element(mag.begin(), mag.end());
  return to_gray16(mag, image.size(), image.size(), 0.0, peak);
}

Gray16 phase_gray(const ComplexImage& image) {
  std::vector<double> phase(image.pixel_count());
  std::transform(image.values().begin(), image.values().end(), phase.begin(), [](cplx z) { return std::arg(z); });
  return to_gray16(phase, image.size(), image.size(), -std::numbers::pi, std::numbers::pi);
}

}  // namespace mrrecon
