#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <boost/property_tree/ptree_fwd.hpp>

#include "mrrecon/types.hpp"

namespace mrrecon {

enum class FlowProfile { parabolic, blunt };

// Positions are (x = column, y = row) in pixel units.
struct Vessel {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 1.0;
  double magnitude = 0.0;
  FlowProfile profile = FlowProfile::blunt;
  double peak_phase = 0.0;  // radians
};

struct PhantomSpec {
  std::size_t n_grid = 128;
  double square_cx = 64.0;
  double square_cy = 64.0;
  double square_side = 64.0;
  double square_magnitude = 100.0;
  std::vector<Vessel> vessels;

  // Centred square of side N/2 at magnitude 100, a parabolic vessel (radius
  // max(N/10, 3), magnitude 200, peak phase 2 rad) at (0.3N, 0.3N) and a blunt
  // vessel (same radius, magnitude 200, phase 1 rad) at (0.72N, 0.72N).
  static PhantomSpec standard(std::size_t n_grid = 128);

  void validate() const;
};

struct Roi {
  std::string name;
  std::size_t n_grid = 0;
  std::vector<bool> mask;  // row-major N x N

  std::size_t count() const;
  bool contains(std::size_t row, std::size_t col) const { return mask[row * n_grid + col]; }
};

struct Phantom {
  ComplexImage image;
  Roi roi1;  // the central square
  Roi roi2;  // blunt vessel disk eroded by 2 pixels
};

// Vessels override the square; phase is zero outside vessels. Parabolic
// vessels carry phase peak (1 - (r/R)^2), blunt vessels a constant phase.
// The blunt vessel used for ROI2 is the first blunt vessel in the list.
Phantom make_phantom(const PhantomSpec& spec);

struct QuadError {
  double absolute = 0.0;
  std::optional<double> normalized;  // undefined when the reference vanishes on the ROI
};

QuadError quad_error(const ComplexImage& recon, const ComplexImage& reference, const Roi& roi);

// Population variance of |f| over the ROI.
double roi_variance(const ComplexImage& recon, const Roi& roi);

// Centred 2-D FFT magnitude (stored in the real part).
ComplexImage kspace_of_image(const ComplexImage& image);

// || |K_a| - |K_b| || / || |K_b| ||.
double kspace_distance(const ComplexImage& image, const ComplexImage& reference);

// INI section [phantom]:
//   n_grid, square_cx, square_cy, square_side, square_magnitude,
//   vessel1, vessel2, ... = cx, cy, radius, magnitude, parabolic|blunt, peak_phase
// Missing keys fall back to PhantomSpec::standard(n_grid).
PhantomSpec phantom_spec_from_tree(const boost::property_tree::ptree& section);
PhantomSpec load_phantom_spec(const std::filesystem::path& path);
void save_phantom_spec(const PhantomSpec& spec, const std::filesystem::path& path);

}  // namespace mrrecon
