#include "mrrecon/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "mrrecon/array_io.hpp"
#include "mrrecon/pgm.hpp"
#include "phasors.hpp"

namespace mrrecon {

LagArray compute_g(const Trajectory& traj, std::size_t n_grid) {
  require_valid(traj);
  if (n_grid == 0) throw std::invalid_argument("compute_g: N must be positive");

  const int c = static_cast<int>(n_grid) - 1;
  const std::size_t side = 2 * n_grid - 1;
  // Rows v = 0..N-1 of the upper half-plane, all lags u.
  std::vector<cplx> half(n_grid * side);
  std::vector<cplx> ex_pos(n_grid), ey(n_grid), ex(side);

  for (const auto& k : traj) {
    detail::fill_phasors(k.kx, ex_pos);
    detail::fill_phasors(k.ky, ey);
    for (int u = 0; u <= c; ++u) {
      ex[static_cast<std::size_t>(c + u)] = ex_pos[static_cast<std::size_t>(u)];
      ex[static_cast<std::size_t>(c - u)] = std::conj(ex_pos[static_cast<std::size_t>(u)]);
    }
    // Row v = 0: u >= 0 only; the negative lags follow from symmetry.
    for (std::size_t u = static_cast<std::size_t>(c); u < side; ++u) half[u] += ex[u];
    for (std::size_t v = 1; v < n_grid; ++v) {
      const cplx a = ey[v];
      cplx* row = &half[v * side];
      for (std::size_t u = 0; u < side; ++u) row[u] += a * ex[u];
    }
  }

  const double norm = static_cast<double>(n_grid) * static_cast<double>(n_grid);
  LagArray g(n_grid);
  for (int v = 0; v <= c; ++v) {
    for (int u = (v == 0 ? 0 : -c); u <= c; ++u) {
      const cplx value = half[static_cast<std::size_t>(v) * side + static_cast<std::size_t>(u + c)] / norm;
      g.at(v, u) = value;
      g.at(-v, -u) = std::conj(value);
    }
  }
  // Zero lag is a sum of L unit phasors; keep it exactly real.
  g.at(0, 0) = cplx(g.at(0, 0).real(), 0.0);
  return g;
}

ComplexImage compute_d(std::span<const cplx> samples, const Trajectory& traj, std::size_t n_grid) {
  return nudft_adjoint(samples, traj, n_grid);
}

PrecomputedKernels precompute_kernels(const Trajectory& traj, std::span<const cplx> samples, std::size_t n_grid) {
  return {compute_g(traj, n_grid), compute_d(samples, traj, n_grid), n_grid, fingerprint(traj)};
}

namespace {

std::filesystem::path sidecar(const std::filesystem::path& path) {
  auto p = path;
  p += ".hash";
  return p;
}

}  // namespace

void save_g_cache(const std::filesystem::path& path, const LagArray& g, const std::string& fingerprint) {
  write_lag_array(path, g);
  std::ofstream out(sidecar(path), std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + sidecar(path).string());
  out << fingerprint << ' ' << g.grid_size() << '\n';
}

LagArray load_g_checked(const std::filesystem::path& path, const Trajectory& traj, std::size_t n_grid) {
  std::ifstream in(sidecar(path));
  if (!in) throw CacheMismatch("missing hash sidecar for " + path.string());
  std::string stored;
  std::size_t stored_n = 0;
  in >> stored >> stored_n;
  const auto expected = fingerprint(traj);
  if (stored != expected || stored_n != n_grid)
    throw CacheMismatch("cached G " + path.string() + " was built for trajectory " + stored + " at N=" +
                        std::to_string(stored_n) + ", expected " + expected + " at N=" + std::to_string(n_grid));
  auto g = read_lag_array(path);
  if (g.grid_size() != n_grid) throw CacheMismatch("cached G has the wrong size");
  return g;
}

LagArray load_or_compute_g(const std::filesystem::path& path, const Trajectory& traj, std::size_t n_grid,
                           bool* cache_hit) {
  if (std::filesystem::exists(path) && std::filesystem::exists(sidecar(path))) {
    try {
      auto g = load_g_checked(path, traj, n_grid);
      if (cache_hit) *cache_hit = true;
      return g;
    } catch (const CacheMismatch&) {
    }
  }
  if (cache_hit) *cache_hit = false;
  auto g = compute_g(traj, n_grid);
  save_g_cache(path, g, fingerprint(traj));
  return g;
}

std::vector<double> psf_row_profile(const LagArray& g) {
  std::vector<double> out;
  for (int u = -g.max_lag(); u <= g.max_lag(); ++u) out.push_back(std::abs(g.at(0, u)));
  return out;
}

std::vector<double> psf_column_profile(const LagArray& g) {
  std::vector<double> out;
  for (int v = -g.max_lag(); v <= g.max_lag(); ++v) out.push_back(std::abs(g.at(v, 0)));
  return out;
}

namespace {

void write_profile(const std::filesystem::path& path, const std::vector<double>& profile, int max_lag) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "lag,magnitude,log10_magnitude\n" << std::setprecision(17);
  for (std::size_t i = 0; i < profile.size(); ++i)
    out << static_cast<int>(i) - max_lag << ',' << profile[i] << ',' << std::log10(profile[i] + 1e-12) << '\n';
}

}  // namespace

void export_psf(const LagArray& g, const std::filesystem::path& prefix, bool log_scale) {
  std::vector<double> values(g.values().size());
  std::transform(g.values().begin(), g.values().end(), values.begin(), [log_scale](cplx z) {
    const double m = std::abs(z);
    return log_scale ? std::log10(m + 1e-12) : m;
  });
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = log_scale ? *lo_it : 0.0;
  const auto gray = to_gray16(values, g.side(), g.side(), lo, *hi_it);

  auto with_suffix = [&prefix](const char* suffix) {
    auto p = prefix;
    p += suffix;
    return p;
  };
  write_pgm16(with_suffix(".pgm"), gray);
  write_profile(with_suffix("_row.csv"), psf_row_profile(g), g.max_lag());
  write_profile(with_suffix("_col.csv"), psf_column_profile(g), g.max_lag());
}

std::optional<int> first_aliasing_ring(const LagArray& g, double min_prominence_ratio) {
  const int c = g.max_lag();
  std::vector<double> p;
  for (int u = 0; u <= c; ++u) p.push_back(std::abs(g.at(0, u)));
  const std::size_t last = p.size() - 1;
  // Bumps at round-off level in an otherwise empty profile are not rings.
  const double floor = 1e-9 * p[0];

  for (std::size_t u = 1; u < last; ++u) {
    if (!(p[u] > p[u - 1] && p[u] >= p[u + 1]) || p[u] <= floor) continue;
    // Saddle on each side: the lowest point before the profile climbs above p[u].
    double left = p[u];
    for (std::size_t j = u; j-- > 0 && p[j] <= p[u];) left = std::min(left, p[j]);
    double right = p[u];
    for (std::size_t j = u + 1; j <= last && p[j] <= p[u]; ++j) right = std::min(right, p[j]);
    const double saddle = std::max(left, right);
    if (p[u] >= min_prominence_ratio * saddle) return static_cast<int>(u);
  }
  return std::nullopt;
}

}  // namespace mrrecon
