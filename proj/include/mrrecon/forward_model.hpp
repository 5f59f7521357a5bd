#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mrrecon/trajectory.hpp"
#include "mrrecon/types.hpp"

namespace mrrecon {

using KSpaceSamples = std::vector<cplx>;

// Exact non-uniform DFT of the discrete acquisition model:
//   s_l = (1/N) sum_{n,m} f(n,m) exp(i 2 pi (kx_l m + ky_l n)).
// Direct summation, O(L N^2). Each output element is accumulated in a fixed order.
KSpaceSamples nudft_forward(const ComplexImage& image, const Trajectory& traj);

// Adjoint of nudft_forward:
//   f(n,m) = (1/N) sum_l s_l exp(-i 2 pi (kx_l m + ky_l n)).
ComplexImage nudft_adjoint(std::span<const cplx> samples, const Trajectory& traj, std::size_t n_grid);

struct NoiseSpec {
  std::optional<double> snr_db;  // nullopt: noise-free
  std::uint64_t seed = 0;
};

// Adds circular complex white Gaussian noise with per-sample variance
// sigma^2 = mean(|s_l|^2) * 10^(-snr_db/10), split equally over re/im.
KSpaceSamples add_noise(std::span<const cplx> samples, const NoiseSpec& spec);

// Empirical SNR in dB: 10 log10(mean|clean|^2 / mean|noisy - clean|^2).
double measured_snr_db(std::span<const cplx> clean, std::span<const cplx> noisy);

}  // namespace mrrecon
