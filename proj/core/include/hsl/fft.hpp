#pragma once

#include <vector>

#include "hsl/types.hpp"

namespace hsl {

enum class FftSign { kForward = -1, kBackward = +1 };

/// In-place, unnormalized 3-D DFT of an n^3 row-major array:
/// out[k] = sum_j in[j] exp(sign * 2 pi i k.j / n). Plans are cached per
/// (n, sign) and shared between threads.
void fft3d(std::vector<cplx>& data, int n, FftSign sign);

}  // namespace hsl
