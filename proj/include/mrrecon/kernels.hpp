#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mrrecon/forward_model.hpp"
#include "mrrecon/trajectory.hpp"
#include "mrrecon/types.hpp"

namespace mrrecon {

// Trajectory kernel G (only depends on the sampling pattern) and data kernel
// D (adjoint of the data). Together they let the least-squares term and its
// gradient be evaluated with FFTs only.
struct PrecomputedKernels {
  LagArray g;
  ComplexImage d;
  std::size_t n_grid = 0;
  std::string trajectory_fingerprint;
};

// G(u,v) = (1/N^2) sum_l exp(i 2 pi (kx_l u + ky_l v)), u,v in [1-N, N-1].
// The v >= 0 half-plane is summed directly; the rest is filled by Hermitian symmetry.
LagArray compute_g(const Trajectory& traj, std::size_t n_grid);

// D = nudft_adjoint(samples).
ComplexImage compute_d(std::span<const cplx> samples, const Trajectory& traj, std::size_t n_grid);

PrecomputedKernels precompute_kernels(const Trajectory& traj, std::span<const cplx> samples, std::size_t n_grid);

// G cache: the binary array at `path` plus a sidecar `path.hash` holding
// "<fingerprint> <N>".
void save_g_cache(const std::filesystem::path& path, const LagArray& g, const std::string& fingerprint);

class CacheMismatch : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Loads G and checks it was built for this trajectory and grid; throws CacheMismatch otherwise.
LagArray load_g_checked(const std::filesystem::path& path, const Trajectory& traj, std::size_t n_grid);

// Cache hit when the sidecar hash matches; otherwise computes and rewrites the cache.
LagArray load_or_compute_g(const std::filesystem::path& path, const Trajectory& traj, std::size_t n_grid,
                           bool* cache_hit = nullptr);

// |G(u, 0)| and |G(0, v)| for lags 1-N..N-1.
std::vector<double> psf_row_profile(const LagArray& g);
std::vector<double> psf_column_profile(const LagArray& g);

// Writes <prefix>.pgm (|G| or log10(|G| + 1e-12), 16-bit) and the central
// row/column profiles <prefix>_row.csv, <prefix>_col.csv.
void export_psf(const LagArray& g, const std::filesystem::path& prefix, bool log_scale);

// Lag (in pixels, along the central row u >= 0) of the first aliasing ring of
// the PSF: the first local maximum of |G(u, 0)| standing at least
// `min_prominence_ratio` times above its higher surrounding saddle. The
// smooth 1/u skirt of a dense centre has no such maxima, and maxima below
// 1e-9 of |G(0, 0)| are ignored. nullopt when no ring falls inside the lag
// range.
std::optional<int> first_aliasing_ring(const LagArray& g, double min_prominence_ratio = 2.0);

}  // namespace mrrecon
