#include "mrrecon/forward_model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "phasors.hpp"

namespace mrrecon {

KSpaceSamples nudft_forward(const ComplexImage& image, const Trajectory& traj) {
  require_valid(traj);
  if (!image.all_finite()) throw std::invalid_argument("nudft_forward: image has non-finite entries");

  const std::size_t n = image.size();
  const double scale = 1.0 / static_cast<double>(n);
  std::vector<cplx> ex(n), ey(n);
  KSpaceSamples out(traj.size());
  for (std::size_t l = 0; l < traj.size(); ++l) {
    detail::fill_phasors(traj[l].kx, ex);
    detail::fill_phasors(traj[l].ky, ey);
    cplx acc = 0.0;
    for (std::size_t row = 0; row < n; ++row) {
      cplx row_sum = 0.0;
      for (std::size_t col = 0; col < n; ++col) row_sum += image(row, col) * ex[col];
      acc += ey[row] * row_sum;
    }
    out[l] = scale * acc;
  }
  return out;
}

ComplexImage nudft_adjoint(std::span<const cplx> samples, const Trajectory& traj, std::size_t n_grid) {
  require_valid(traj);
  if (samples.size() != traj.size())
    throw std::invalid_argument("nudft_adjoint: " + std::to_string(samples.size()) + " samples for a " +
                                std::to_string(traj.size()) + "-point trajectory");
  for (const auto& z : samples)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw std::invalid_argument("nudft_adjoint: non-finite sample");

  const double scale = 1.0 / static_cast<double>(n_grid);
  ComplexImage out(n_grid);
  std::vector<cplx> ex(n_grid), ey(n_grid);
  for (std::size_t l = 0; l < traj.size(); ++l) {
    detail::fill_phasors(traj[l].kx, ex);
    detail::fill_phasors(traj[l].ky, ey);
    for (std::size_t row = 0; row < n_grid; ++row) {
      const cplx b = samples[l] * std::conj(ey[row]);
      for (std::size_t col = 0; col < n_grid; ++col) out(row, col) += b * std::conj(ex[col]);
    }
  }
  out *= scale;
  return out;
}

KSpaceSamples add_noise(std::span<const cplx> samples, const NoiseSpec& spec) {
  if (samples.empty()) throw std::invalid_argument("add_noise: no samples");
  KSpaceSamples out(samples.begin(), samples.end());
  if (!spec.snr_db) return out;
  if (!std::isfinite(*spec.snr_db)) throw std::invalid_argument("add_noise: SNR must be finite");

  double power = 0.0;
  for (const auto& z : samples) power += std::norm(z);
  power /= static_cast<double>(samples.size());
  if (power <= 0.0) throw std::invalid_argument("add_noise: signal power is zero, SNR undefined");

  const double variance = power * std::pow(10.0, -*spec.snr_db / 10.0);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(variance / 2.0));
  for (auto& z : out) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    z += cplx(re, im);
  }
  return out;
}

double measured_snr_db(std::span<const cplx> clean, std::span<const cplx> noisy) {
  if (clean.size() != noisy.size() || clean.empty()) throw std::invalid_argument("measured_snr_db: length mismatch");
  double signal = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    signal += std::norm(clean[i]);
    noise += std::norm(noisy[i] - clean[i]);
  }
  return 10.0 * std::log10(signal / noise);
}

}  // namespace mrrecon
