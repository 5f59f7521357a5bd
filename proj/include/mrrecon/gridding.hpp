#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "mrrecon/trajectory.hpp"
#include "mrrecon/types.hpp"

namespace mrrecon {

enum class DensityKind { voronoi, radial_spiral, uniform, user };

struct GriddingConfig {
  int kernel_width = 7;          // odd, in oversampled grid cells
  double oversampling = 2.0;
  std::optional<double> beta;    // nullopt: auto
  DensityKind density = DensityKind::voronoi;
  std::size_t arms = 1;          // radial_spiral only
  std::vector<double> user_weights;

  void validate() const;
  double effective_beta() const;
};

using DensityWeights = std::vector<double>;

DensityWeights voronoi_weights(const Trajectory& traj);

// Analytic spiral compensation: each sample gets its share of the ring swept
// between interleaves, (2 pi / arms) |k . dk| with dk the central difference
// along its arm; the first sample of each arm gets a disk of radius half the
// first increment. Normalized to sum 1.
DensityWeights radial_spiral_weights(const Trajectory& traj, std::size_t arms);

DensityWeights uniform_weights(std::size_t count);

DensityWeights density_weights(const Trajectory& traj, const GriddingConfig& config);

// beta = pi sqrt((W/os)^2 (os - 0.5)^2 - 0.8)
double auto_beta(int width, double oversampling);

// Kaiser-Bessel window I0(beta sqrt(1 - (2u/W)^2)) / W for |u| <= W/2, else 0.
double kaiser_bessel(double u, int width, double beta);

// Density compensation, separable Kaiser-Bessel spreading onto a
// ceil(os N)^2 grid, FFT, deapodization, central N x N crop.
ComplexImage grid_reconstruct(std::span<const cplx> samples, const Trajectory& traj, std::size_t n_grid,
                              const GriddingConfig& config);
ComplexImage grid_reconstruct(std::span<const cplx> samples, const Trajectory& traj, std::size_t n_grid,
                              const GriddingConfig& config, std::span<const double> weights);

void write_weights_csv(const std::filesystem::path& path, std::span<const double> weights);
DensityWeights read_weights_csv(const std::filesystem::path& path);

}  // namespace mrrecon
