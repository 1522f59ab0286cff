#pragma once

#include "qcdmrg/tensor.hpp"

#include <array>
#include <cstddef>
#include <span>

namespace qcdmrg {

using Mat2 = std::array<cplx, 4>;  // row-major 2x2
using Mat4 = std::array<cplx, 16>; // row-major 4x4, basis |b0 b1>, b0 most significant

// The kernels below view `data` as [outer][2^nbits][inner] and act on the
// middle index. Bit position 0 is the most significant of the nbits.

void apply_one_qubit(std::span<cplx> data, std::size_t outer, int nbits, std::size_t inner,
                     int pos, const Mat2 &m);

void apply_two_qubit(std::span<cplx> data, std::size_t outer, int nbits, std::size_t inner,
                     int pos0, int pos1, const Mat4 &m);

} // namespace qcdmrg
