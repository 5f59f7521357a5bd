#pragma once

#include <cstddef>
#include <span>

#include "mrrecon/types.hpp"

namespace mrrecon::fft {

// In-place unnormalized 2-D transforms of a square rows x rows row-major buffer,
// backed by FFTW. Forward uses exp(-i...), backward exp(+i...).
// Plans are cached per size and planner access is serialized, so these are
// safe to call from several threads.
void forward_2d(std::span<cplx> data, std::size_t rows);
void backward_2d(std::span<cplx> data, std::size_t rows);

}  // namespace mrrecon::fft
