#include "qcdmrg/gate_kernels.hpp"

#include "qcdmrg/error.hpp"

namespace qcdmrg {

namespace {

void check_layout(std::span<cplx> data, std::size_t outer, int nbits, std::size_t inner) {
    if (nbits < 0 || nbits > 62)
        throw Error("kernels", "bit count out of range");
    if (data.size() != outer * (std::size_t{1} << nbits) * inner)
        throw Error("kernels", "data size does not match [outer][2^nbits][inner] layout");
}

} // namespace

void apply_one_qubit(std::span<cplx> data, std::size_t outer, int nbits, std::size_t inner,
                     int pos, const Mat2 &m) {
    check_layout(data, outer, nbits, inner);
    if (pos < 0 || pos >= nbits)
        throw Error("kernels", "qubit position out of range");
    const std::size_t dim = std::size_t{1} << nbits;
    const std::size_t bit = std::size_t{1} << (nbits - 1 - pos);
    const std::size_t stride = bit * inner;
    const std::size_t block = dim * inner;
    for (std::size_t o = 0; o < outer; ++o) {
        cplx *base = data.data() + o * block;
        for (std::size_t hi = 0; hi < block; hi += 2 * stride) {
            for (std::size_t lo = 0; lo < stride; ++lo) {
                cplx &a0 = base[hi + lo];
                cplx &a1 = base[hi + lo + stride];
                const cplx v0 = a0, v1 = a1;
                a0 = m[0] * v0 + m[1] * v1;
                a1 = m[2] * v0 + m[3] * v1;
            }
        }
    }
}

void apply_two_qubit(std::span<cplx> data, std::size_t outer, int nbits, std::size_t inner,
                     int pos0, int pos1, const Mat4 &m) {
    check_layout(data, outer, nbits, inner);
    if (pos0 < 0 || pos0 >= nbits || pos1 < 0 || pos1 >= nbits || pos0 == pos1)
        throw Error("kernels", "invalid qubit positions");
    const std::size_t dim = std::size_t{1} << nbits;
    const std::size_t b0 = std::size_t{1} << (nbits - 1 - pos0);
    const std::size_t b1 = std::size_t{1} << (nbits - 1 - pos1);
    const std::size_t s0 = b0 * inner, s1 = b1 * inner;
    const std::size_t block = dim * inner;
    for (std::size_t o = 0; o < outer; ++o) {
        cplx *base = data.data() + o * block;
        for (std::size_t s = 0; s < dim; ++s) {
            if ((s & b0) || (s & b1))
                continue;
            cplx *p = base + s * inner;
            for (std::size_t j = 0; j < inner; ++j) {
                cplx &a00 = p[j];
                cplx &a01 = p[j + s1];
                cplx &a10 = p[j + s0];
                cplx &a11 = p[j + s0 + s1];
                const cplx v0 = a00, v1 = a01, v2 = a10, v3 = a11;
                a00 = m[0] * v0 + m[1] * v1 + m[2] * v2 + m[3] * v3;
                a01 = m[4] * v0 + m[5] * v1 + m[6] * v2 + m[7] * v3;
                a10 = m[8] * v0 + m[9] * v1 + m[10] * v2 + m[11] * v3;
                a11 = m[12] * v0 + m[13] * v1 + m[14] * v2 + m[15] * v3;
            }
        }
    }
}

} // namespace qcdmrg
