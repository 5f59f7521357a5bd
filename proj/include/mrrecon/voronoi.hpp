#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "mrrecon/trajectory.hpp"

namespace mrrecon {

class DegenerateVoronoi : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Area of the Voronoi cell of each point, cells clipped to the square
// [-0.5, 0.5]^2. Exact duplicates split their shared cell equally.
// Throws DegenerateVoronoi when fewer than 3 distinct points remain or all
// distinct points are collinear.
std::vector<double> clipped_voronoi_areas(std::span<const KPoint> points);

}  // namespace mrrecon
