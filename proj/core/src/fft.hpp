#pragma once

#include <span>

#include "dk/grid.hpp"

namespace dk::detail {

// Unnormalized complex DFTs over the whole grid.  Sign -1 is the forward
// transform.  Input and output must not alias.
void fft(const GridSpec& grid, int sign, std::span<const Complex> in, std::span<Complex> out);

}  // namespace dk::detail
