#include "qcdmrg/circuit.hpp"
#include "qcdmrg/gate_kernels.hpp"
#include "qcdmrg/tensor.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace qcdmrg;

namespace {

DenseTensor random_tensor(Shape dims, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    DenseTensor t(std::move(dims));
    for (auto &v : t.data())
        v = {n(rng), n(rng)};
    return t;
}

double max_diff(const DenseTensor &a, const DenseTensor &b) {
    EXPECT_EQ(a.dims(), b.dims());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

} // namespace

TEST(Tensor, ContractIdentityWithVector) {
    DenseTensor v({2}, {1.0, 0.0});
    const auto r = contract(DenseTensor::identity(2), v, {{1, 0}});
    EXPECT_EQ(r.dims(), Shape{2});
    EXPECT_NEAR(std::abs(r[0] - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(r[1]), 0.0, 1e-15);
}

TEST(Tensor, ContractHadamardOnZero) {
    DenseTensor v({2}, {1.0, 0.0});
    const auto r = contract(gate_matrix(GateKind::Hadamard), v, {{1, 0}});
    EXPECT_NEAR(r[0].real(), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(r[1].real(), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Tensor, ContractMatchesLoopReference) {
    const auto a = random_tensor({2, 3, 4}, 1);
    const auto b = random_tensor({4, 5}, 2);
    const auto r = contract(a, b, {{2, 0}});
    ASSERT_EQ(r.dims(), (Shape{2, 3, 5}));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t l = 0; l < 5; ++l) {
                cplx s = 0.0;
                for (std::size_t k = 0; k < 4; ++k)
                    s += a.at({i, j, k}) * b.at({k, l});
                EXPECT_NEAR(std::abs(r.at({i, j, l}) - s), 0.0, 1e-12);
            }
}

TEST(Tensor, ContractMultiplePairsAndOuterProduct) {
    const auto a = random_tensor({3, 2, 4}, 3);
    const auto b = random_tensor({4, 3}, 4);
    const auto r = contract(a, b, {{0, 1}, {2, 0}});
    ASSERT_EQ(r.dims(), Shape{2});
    for (std::size_t j = 0; j < 2; ++j) {
        cplx s = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t k = 0; k < 4; ++k)
                s += a.at({i, j, k}) * b.at({k, i});
        EXPECT_NEAR(std::abs(r[j] - s), 0.0, 1e-12);
    }
    const auto outer = contract(random_tensor({2}, 5), random_tensor({3}, 6), {});
    EXPECT_EQ(outer.dims(), (Shape{2, 3}));
}

TEST(Tensor, ContractRejectsMismatchedAxes) {
    EXPECT_ANY_THROW(contract(random_tensor({2, 3}, 1), random_tensor({4}, 2), {{1, 0}}));
}

TEST(Tensor, PermuteReordersAxes) {
    const auto t = random_tensor({2, 3, 4}, 7);
    const auto p = permute(t, {2, 0, 1});
    ASSERT_EQ(p.dims(), (Shape{4, 2, 3}));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 4; ++k)
                EXPECT_EQ(p.at({k, i, j}), t.at({i, j, k}));
}

// Four nonzero values; two of them coincide at sin(theta).
TEST(Tensor, SvdOfFsimHasFourSingularValues) {
    const auto u = gate_matrix(GateKind::FSim, {1.0, std::numbers::pi / 2});
    // [o0 o1 i0 i1] -> [o0 i0 | o1 i1]
    const auto t = permute(reshape(u, {2, 2, 2, 2}), {0, 2, 1, 3});
    const auto svd = split_svd(t, {0, 1}, std::nullopt, 1e-12);
    ASSERT_EQ(svd.s.size(), 4u);
    EXPECT_NEAR(svd.s[1], std::sin(1.0), 1e-12);
    EXPECT_NEAR(svd.s[2], std::sin(1.0), 1e-12);
    EXPECT_GT(svd.s[0] - svd.s[1], 0.1);
    EXPECT_GT(svd.s[2] - svd.s[3], 0.1);
}

TEST(Tensor, SvdOfControlledZHasRankTwo) {
    const auto t = permute(reshape(gate_matrix(GateKind::CZ), {2, 2, 2, 2}), {0, 2, 1, 3});
    EXPECT_EQ(split_svd(t, {0, 1}, std::nullopt, 1e-12).s.size(), 2u);
}

TEST(Tensor, SvdOfOuterProductHasRankOne) {
    const auto t = contract(random_tensor({5}, 8), random_tensor({6}, 9), {});
    const auto svd = split_svd(t, {0});
    std::size_t above = 0;
    for (double s : svd.s)
        above += s > 1e-12;
    EXPECT_EQ(above, 1u);
}

TEST(Tensor, SvdReconstructsAndTruncates) {
    const auto t = random_tensor({3, 4, 5}, 10);
    const auto svd = split_svd(t, {0, 2});
    DenseTensor us = svd.u;
    const std::size_t k = svd.s.size();
    for (std::size_t i = 0; i < us.size(); ++i)
        us[i] *= svd.s[i % k];
    const auto back = permute(contract(us, svd.v, {{2, 0}}), {0, 2, 1});
    EXPECT_LT(max_diff(back, t), 1e-12);

    const auto cut = split_svd(t, {0, 2}, 2);
    EXPECT_EQ(cut.s.size(), 2u);
    double dropped = 0.0;
    for (std::size_t i = 2; i < svd.s.size(); ++i)
        dropped += svd.s[i] * svd.s[i];
    EXPECT_NEAR(cut.discarded_weight, dropped, 1e-10);
}

TEST(Tensor, QrOfUnitaryHasUnitModulusDeterminant) {
    const auto qr = split_qr(gate_matrix(GateKind::SqrtW), {0});
    const auto &r = qr.r;
    const cplx det = r.at({0, 0}) * r.at({1, 1}) - r.at({0, 1}) * r.at({1, 0});
    EXPECT_NEAR(std::abs(det), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(r.at({1, 0})), 0.0, 1e-12);
}

TEST(Tensor, QrHasOrthonormalColumns) {
    const auto qr = split_qr(random_tensor({4, 3}, 11), {0});
    const auto qq = contract(conj(qr.q), qr.q, {{0, 0}});
    EXPECT_LT(max_diff(qq, DenseTensor::identity(3)), 1e-12);
}

TEST(Tensor, QrRoundTrip) {
    const auto t = random_tensor({2, 2, 2, 2}, 12);
    const auto qr = split_qr(t, {0, 1});
    EXPECT_LT(max_diff(contract(qr.q, qr.r, {{2, 0}}), t), 1e-12);
}

TEST(Tensor, ReshapeIsRowMajor) {
    DenseTensor m({2, 2}, {1.0, 2.0, 3.0, 4.0});
    const auto v = reshape(m, {4});
    for (std::size_t i = 0; i < 4; ++i)
        EXPECT_EQ(v[i], cplx(static_cast<double>(i + 1)));
    EXPECT_LT(max_diff(reshape(reshape(v, {2, 2}), {4}), v), 1e-300);

    const auto t = random_tensor({2, 3}, 13);
    const auto r = reshape(t, {3, 2});
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            const std::size_t flat = i * 3 + j;
            EXPECT_EQ(r.at({flat / 2, flat % 2}), t.at({i, j}));
        }
    EXPECT_ANY_THROW(reshape(t, {4, 2}));
}

TEST(Tensor, Norm2) {
    EXPECT_EQ(norm2(DenseTensor({3, 3})), 0.0);
    EXPECT_EQ(norm2(DenseTensor({2}, {1.0, 0.0})), 1.0);
    const auto t = random_tensor({3, 4}, 14);
    double s = 0.0;
    for (const auto &v : t.values())
        s += std::norm(v);
    EXPECT_NEAR(norm2(t), s, 1e-12);
}

TEST(Kernels, CnotOnNonAdjacentBits) {
    // CNOT on bits (2, 0) of a 3-bit register, control = bit 2
    DenseTensor psi({8});
    psi[0b001] = 1.0; // bit 2 (least significant) set
    apply_two_qubit(psi.data(), 1, 3, 1, 2, 0, Gate(GateKind::CNOT, {0, 1}).mat4());
    EXPECT_NEAR(std::abs(psi[0b101] - 1.0), 0.0, 1e-15);
}
