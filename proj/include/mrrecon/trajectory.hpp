#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrrecon {

// Normalized spatial frequency; valid samples lie in [-0.5, 0.5] on both axes.
struct KPoint {
  double kx = 0.0;
  double ky = 0.0;
  friend bool operator==(const KPoint&, const KPoint&) = default;
};

class Trajectory {
public:
  Trajectory() = default;
  explicit Trajectory(std::vector<KPoint> points) : points_(std::move(points)) {}

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const KPoint& operator[](std::size_t i) const { return points_[i]; }
  std::span<const KPoint> points() const { return points_; }

  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

private:
  std::vector<KPoint> points_;
};

struct ValidationResult {
  bool ok = true;
  std::size_t first_bad_index = 0;
  std::string reason;
  explicit operator bool() const { return ok; }
};

ValidationResult validate(const Trajectory& traj);

// Throws std::invalid_argument carrying the validation diagnosis.
void require_valid(const Trajectory& traj);

// Interleaved Archimedean spiral: arm a, sample j, tau = j/(S-1),
// r = 0.5 tau, theta = 2 pi turns tau + 2 pi a / arms.
Trajectory generate_spiral(std::size_t arms, std::size_t samples_per_arm, double turns);

// Turns that make adjacent interleaves Nyquist-spaced on an N x N grid.
double nyquist_turns(std::size_t n_grid, std::size_t arms);

// Keeps every `stride`-th arm starting at arm 0, e.g. stride 2 discards one
// spiral over two.
Trajectory decimate_arms(const Trajectory& traj, std::size_t arms, std::size_t stride);

// Complete Cartesian sampling of an N x N grid: k in {(j - N/2)/N}.
Trajectory cartesian_trajectory(std::size_t n_grid);

class CsvFormatError : public std::runtime_error {
public:
  CsvFormatError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

// CSV with header "kx,ky", one pair per line, 17 significant digits.
void save_trajectory(const Trajectory& traj, const std::filesystem::path& path);
Trajectory load_trajectory(const std::filesystem::path& path);

// 64-bit FNV-1a over the coordinate bit patterns, as 16 hex digits.
std::string fingerprint(const Trajectory& traj);

}  // namespace mrrecon
