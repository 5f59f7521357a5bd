#include "mrrecon/trajectory.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace mrrecon {

ValidationResult validate(const Trajectory& traj) {
  if (traj.empty()) return {false, 0, "trajectory is empty"};
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& k = traj[i];
    if (!std::isfinite(k.kx) || !std::isfinite(k.ky)) return {false, i, "non-finite coordinate"};
    if (std::abs(k.kx) > 0.5 || std::abs(k.ky) > 0.5) return {false, i, "coordinate outside [-0.5, 0.5]"};
  }
  return {};
}

void require_valid(const Trajectory& traj) {
  if (auto r = validate(traj); !r)
    throw std::invalid_argument("invalid trajectory at index " + std::to_string(r.first_bad_index) + ": " +
                                r.reason);
}

Trajectory generate_spiral(std::size_t arms, std::size_t samples_per_arm, double turns) {
  if (arms < 1) throw std::invalid_argument("generate_spiral: need at least one arm");
  if (samples_per_arm < 2) throw std::invalid_argument("generate_spiral: need at least two samples per arm");
  if (!std::isfinite(turns) || turns <= 0.0) throw std::invalid_argument("generate_spiral: turns must be positive");

  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<KPoint> points;
  points.reserve(arms * samples_per_arm);
  for (std::size_t a = 0; a < arms; ++a) {
    const double offset = two_pi * static_cast<double>(a) / static_cast<double>(arms);
    for (std::size_t j = 0; j < samples_per_arm; ++j) {
      const double tau = static_cast<double>(j) / static_cast<double>(samples_per_arm - 1);
      const double r = 0.5 * tau;
      const double theta = two_pi * turns * tau + offset;
      points.push_back({r * std::cos(theta), r * std::sin(theta)});
    }
  }
  return Trajectory(std::move(points));
}

double nyquist_turns(std::size_t n_grid, std::size_t arms) {
  if (n_grid == 0 || arms == 0) throw std::invalid_argument("nyquist_turns: N and arms must be positive");
  return static_cast<double>(n_grid) / (2.0 * static_cast<double>(arms));
}

Trajectory decimate_arms(const Trajectory& traj, std::size_t arms, std::size_t stride) {
  if (arms == 0 || stride == 0 || traj.size() % arms != 0)
    throw std::invalid_argument("decimate_arms: trajectory is not made of equal-length arms");
  const std::size_t per_arm = traj.size() / arms;
  std::vector<KPoint> points;
  for (std::size_t a = 0; a < arms; a += stride)
    for (std::size_t j = 0; j < per_arm; ++j) points.push_back(traj[a * per_arm + j]);
  return Trajectory(std::move(points));
}

Trajectory cartesian_trajectory(std::size_t n_grid) {
  if (n_grid == 0) throw std::invalid_argument("cartesian_trajectory: N must be positive");
  const auto n = static_cast<double>(n_grid);
  const auto half = static_cast<double>(n_grid / 2);
  std::vector<KPoint> points;
  points.reserve(n_grid * n_grid);
  for (std::size_t row = 0; row < n_grid; ++row)
    for (std::size_t col = 0; col < n_grid; ++col)
      points.push_back({(static_cast<double>(col) - half) / n, (static_cast<double>(row) - half) / n});
  return Trajectory(std::move(points));
}

void save_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "kx,ky\n" << std::setprecision(17);
  for (const auto& k : traj) out << k.kx << ',' << k.ky << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

namespace {

double parse_field(std::string_view field, std::size_t line) {
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
    throw CsvFormatError("malformed number '" + std::string(field) + "'", line);
  return value;
}

}  // namespace

Trajectory load_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  std::vector<KPoint> points;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (line == 1) {
      if (text != "kx,ky") throw CsvFormatError("expected header 'kx,ky'", line);
      continue;
    }
    if (text.empty()) continue;
    const auto comma = text.find(',');
    if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos)
      throw CsvFormatError("expected exactly two columns", line);
    std::string_view view(text);
    points.push_back({parse_field(view.substr(0, comma), line), parse_field(view.substr(comma + 1), line)});
  }
  if (points.empty()) throw std::runtime_error(path.string() + ": trajectory holds no samples");
  return Trajectory(std::move(points));
}

std::string fingerprint(const Trajectory& traj) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  auto mix = [&hash](std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      hash ^= (word >> (8 * i)) & 0xffu;
      hash *= 0x100000001b3ull;
    }
  };
  mix(traj.size());
  for (const auto& k : traj) {
    mix(std::bit_cast<std::uint64_t>(k.kx));
    mix(std::bit_cast<std::uint64_t>(k.ky));
  }
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << hash;
  return hex.str();
}

}  // namespace mrrecon
