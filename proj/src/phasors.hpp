#pragma once

#include <cmath>
#include <numbers>
#include <span>

#include "mrrecon/types.hpp"

namespace mrrecon::detail {

// out[j] = exp(i 2 pi k j), j = 0..out.size()-1.
inline void fill_phasors(double k, std::span<cplx> out) {
  const double w = 2.0 * std::numbers::pi * k;
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double phase = w * static_cast<double>(j);
    out[j] = {std::cos(phase), std::sin(phase)};
  }
}

}  // namespace mrrecon::detail
