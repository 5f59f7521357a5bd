#include "mrrecon/gridding.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mrrecon/fft.hpp"
#include "mrrecon/voronoi.hpp"

namespace mrrecon {

void GriddingConfig::validate() const {
  if (kernel_width < 1 || kernel_width % 2 == 0) throw std::invalid_argument("kernel width must be a positive odd integer");
  if (!std::isfinite(oversampling) || oversampling < 1.0) throw std::invalid_argument("oversampling must be >= 1");
  if (beta && (!std::isfinite(*beta) || *beta <= 0.0)) throw std::invalid_argument("beta must be positive and finite");
  if (density == DensityKind::radial_spiral && arms == 0) throw std::invalid_argument("radial-spiral density needs arms");
}

double GriddingConfig::effective_beta() const { return beta ? *beta : auto_beta(kernel_width, oversampling); }

DensityWeights voronoi_weights(const Trajectory& traj) {
  require_valid(traj);
  return clipped_voronoi_areas(traj.points());
}

DensityWeights radial_spiral_weights(const Trajectory& traj, std::size_t arms) {
  require_valid(traj);
  if (arms == 0 || traj.size() % arms != 0)
    throw std::invalid_argument("radial_spiral_weights: " + std::to_string(traj.size()) +
                                " samples do not split into " + std::to_string(arms) + " equal arms");
  const std::size_t per_arm = traj.size() / arms;
  if (per_arm < 2) throw std::invalid_argument("radial_spiral_weights: arms need at least two samples");

  DensityWeights w(traj.size());
  const double wedge = 2.0 * std::numbers::pi / static_cast<double>(arms);
  for (std::size_t a = 0; a < arms; ++a) {
    const KPoint* arm = &traj.points()[a * per_arm];
    for (std::size_t j = 0; j < per_arm; ++j) {
      double value;
      if (j == 0) {
        const double first = std::hypot(arm[1].kx - arm[0].kx, arm[1].ky - arm[0].ky);
        value = std::numbers::pi * 0.25 * first * first;
      } else {
        const std::size_t lo = j - 1;
        const std::size_t hi = std::min(j + 1, per_arm - 1);
        const double scale = (hi - lo == 2) ? 0.5 : 1.0;
        const double dkx = scale * (arm[hi].kx - arm[lo].kx);
        const double dky = scale * (arm[hi].ky - arm[lo].ky);
        value = wedge * std::abs(arm[j].kx * dkx + arm[j].ky * dky);
      }
      w[a * per_arm + j] = value;
    }
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("radial_spiral_weights: degenerate trajectory");
  for (auto& x : w) x /= total;
  return w;
}

DensityWeights uniform_weights(std::size_t count) {
  if (count == 0) throw std::invalid_argument("uniform_weights: no samples");
  return DensityWeights(count, 1.0 / static_cast<double>(count));
}

DensityWeights density_weights(const Trajectory& traj, const GriddingConfig& config) {
  switch (config.density) {
    case DensityKind::voronoi: return voronoi_weights(traj);
    case DensityKind::radial_spiral: return radial_spiral_weights(traj, config.arms);
    case DensityKind::uniform: return uniform_weights(traj.size());
    case DensityKind::user:
      if (config.user_weights.size() != traj.size())
        throw std::invalid_argument("user density weights do not match the trajectory length");
      return config.user_weights;
  }
  throw std::invalid_argument("unknown density kind");
}

double auto_beta(int width, double oversampling) {
  const double r = static_cast<double>(width) / oversampling;
  const double arg = r * r * (oversampling - 0.5) * (oversampling - 0.5) - 0.8;
  if (arg <= 0.0) throw std::invalid_argument("auto beta undefined for this width/oversampling");
  return std::numbers::pi * std::sqrt(arg);
}

double kaiser_bessel(double u, int width, double beta) {
  const double half = 0.5 * static_cast<double>(width);
  if (std::abs(u) > half) return 0.0;
  const double x = 2.0 * u / static_cast<double>(width);
  return std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - x * x))) / static_cast<double>(width);
}

ComplexImage grid_reconstruct(std::span<const cplx> samples, const Trajectory& traj, std::size_t n_grid,
                              const GriddingConfig& config) {
  config.validate();
  const auto weights = density_weights(traj, config);
  return grid_reconstruct(samples, traj, n_grid, config, weights);
}

ComplexImage grid_reconstruct(std::span<const cplx> samples, const Trajectory& traj, std::size_t n_grid,
                              const GriddingConfig& config, std::span<const double> weights) {
  config.validate();
  require_valid(traj);
  if (samples.size() != traj.size() || weights.size() != traj.size())
    throw std::invalid_argument("grid_reconstruct: samples, weights and trajectory lengths differ");

  const int width = config.kernel_width;
  const double beta = config.effective_beta();
  const auto grid = static_cast<std::size_t>(std::ceil(config.oversampling * static_cast<double>(n_grid)));
  const int g = static_cast<int>(grid);
  const int origin = static_cast<int>(n_grid / 2);
  const double reach = 0.5 * width;

  // Image pixel r is reconstructed at centred coordinate x = r - N/2, which
  // costs a phase exp(-i 2 pi k N/2) per sample. Grid offset j (frequency
  // j/G, |j| <= G/2) is stored at circular index j mod G.
  auto wrap = [g](int j) { return static_cast<std::size_t>(((j % g) + g) % g); };
  std::vector<cplx> buf(grid * grid);
  std::vector<double> wx(static_cast<std::size_t>(width) + 1), wy(wx.size());
  for (std::size_t l = 0; l < traj.size(); ++l) {
    const auto& k = traj[l];
    const double phase = -2.0 * std::numbers::pi * origin * (k.kx + k.ky);
    const cplx value = weights[l] * samples[l] * cplx(std::cos(phase), std::sin(phase));
    const double gx = k.kx * g;
    const double gy = k.ky * g;
    const int x0 = static_cast<int>(std::ceil(gx - reach));
    const int y0 = static_cast<int>(std::ceil(gy - reach));
    const int x1 = static_cast<int>(std::floor(gx + reach));
    const int y1 = static_cast<int>(std::floor(gy + reach));
    for (int j = x0; j <= x1; ++j) wx[static_cast<std::size_t>(j - x0)] = kaiser_bessel(j - gx, width, beta);
    for (int j = y0; j <= y1; ++j) wy[static_cast<std::size_t>(j - y0)] = kaiser_bessel(j - gy, width, beta);
    for (int jy = y0; jy <= y1; ++jy) {
      const cplx row_value = value * wy[static_cast<std::size_t>(jy - y0)];
      cplx* row = &buf[wrap(jy) * grid];
      for (int jx = x0; jx <= x1; ++jx) row[wrap(jx)] += row_value * wx[static_cast<std::size_t>(jx - x0)];
    }
  }

  fft::forward_2d(buf, grid);

  // Apodization: transform of the kernel sampled at integer grid offsets.
  const int kernel_half = width / 2;
  auto apodization = [&](int x) {
    double acc = kaiser_bessel(0.0, width, beta);
    for (int j = 1; j <= kernel_half; ++j)
      acc += 2.0 * kaiser_bessel(j, width, beta) * std::cos(2.0 * std::numbers::pi * j * x / g);
    return acc;
  };
  const double peak = apodization(0);
  std::vector<double> apod(n_grid);
  for (std::size_t r = 0; r < n_grid; ++r) {
    apod[r] = apodization(static_cast<int>(r) - origin);
    if (std::abs(apod[r]) < 1e-8 * peak)
      throw std::invalid_argument("grid_reconstruct: kernel apodization vanishes inside the field of view; "
                                  "increase oversampling or change beta");
  }

  const double scale = static_cast<double>(n_grid);
  ComplexImage out(n_grid);
  for (std::size_t row = 0; row < n_grid; ++row) {
    const auto ty = wrap(static_cast<int>(row) - origin);
    for (std::size_t col = 0; col < n_grid; ++col) {
      const auto tx = wrap(static_cast<int>(col) - origin);
      out(row, col) = scale * buf[ty * grid + tx] / (apod[row] * apod[col]);
    }
  }
  return out;
}

void write_weights_csv(const std::filesystem::path& path, std::span<const double> weights) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "weight\n" << std::setprecision(17);
  for (double w : weights) out << w << '\n';
}

DensityWeights read_weights_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  DensityWeights w;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (number == 1 && line == "weight") continue;
    if (line.empty()) continue;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (ec != std::errc() || ptr != line.data() + line.size() || !std::isfinite(value) || value < 0.0)
      throw std::runtime_error(path.string() + ": bad weight on line " + std::to_string(number));
    w.push_back(value);
  }
  if (w.empty()) throw std::runtime_error(path.string() + ": no weights");
  return w;
}

}  // namespace mrrecon
