#include "qcdmrg/error.hpp"
#include "qcdmrg/fidelity.hpp"
#include "qcdmrg/mps.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace qcdmrg;

namespace {

double max_diff(const StateVector &a, const StateVector &b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        d = std::max(d, std::abs(a.amplitude(i) - b.amplitude(i)));
    return d;
}

Bitstring random_bits(std::size_t n, std::mt19937_64 &rng) {
    Bitstring x(n);
    for (auto &b : x)
        b = static_cast<std::uint8_t>(rng() & 1);
    return x;
}

} // namespace

TEST(Mps, ProductStateAmplitudes) {
    const auto topo = build_topology(3, 4);
    const auto g = standard_grouping(topo, "V1");
    const auto zero = GroupedMPS::product_state(g, Bitstring(10, 0));
    EXPECT_NEAR(norm2(zero), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(amplitude(zero, Bitstring(10, 0)) - 1.0), 0.0, 1e-15);

    std::mt19937_64 rng(3);
    const auto x = random_bits(10, rng);
    const auto px = GroupedMPS::product_state(g, x);
    for (int trial = 0; trial < 20; ++trial) {
        const auto y = trial == 0 ? x : random_bits(10, rng);
        EXPECT_EQ(amplitude(px, y), cplx(x == y ? 1.0 : 0.0));
        EXPECT_EQ(overlap(px, GroupedMPS::product_state(g, y)), cplx(x == y ? 1.0 : 0.0));
    }
    const auto sv = to_statevector(px);
    EXPECT_EQ(sv.amplitude(bitstring_to_index(x)), cplx(1.0));
    EXPECT_NEAR(sv.norm2(), 1.0, 1e-15);
}

TEST(Mps, BellPairAmplitude) {
    const Grouping g("pair", {{0}, {1}});
    Circuit bell(2);
    bell.add_layer(Layer{{Gate(GateKind::Hadamard, {0}), Gate(GateKind::CNOT, {0, 1})}});
    auto mps = GroupedMPS::product_state(g, {0, 0});
    for (const auto &gate : bell.flattened())
        mps.apply_truncated(gate, 4);
    EXPECT_NEAR(std::abs(amplitude(mps, {0, 0}) - 1.0 / std::sqrt(2.0)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(amplitude(mps, {0, 1})), 0.0, 1e-14);
}

TEST(Mps, RandomMpsMatchesDenseOracle) {
    const auto g = contiguous_grouping({2, 3, 1, 2});
    const auto mps = GroupedMPS::random(g, 4, 17);
    EXPECT_NEAR(norm2(mps), 1.0, 1e-12);
    const auto sv = to_statevector(mps);
    for (std::uint64_t i = 0; i < sv.dim(); i += 7)
        EXPECT_NEAR(std::abs(amplitude(mps, index_to_bitstring(i, 8)) - sv.amplitude(i)), 0.0,
                    1e-12);
}

TEST(Mps, CanonicalizePreservesState) {
    const auto g = contiguous_grouping({2, 2, 2, 2});
    const auto mps = GroupedMPS::random(g, 3, 5);
    for (std::size_t c = 0; c < 4; ++c) {
        const auto can = canonicalize(mps, c);
        EXPECT_EQ(can.ortho_center(), c);
        EXPECT_NEAR(std::abs(overlap(mps, can) / norm2(mps) - 1.0), 0.0, 1e-10);
        // center tensor carries the full norm
        EXPECT_NEAR(norm2(can.tensor(c)), norm2(mps), 1e-10);
    }
    const auto p = GroupedMPS::product_state(g, Bitstring(8, 1));
    const auto pc = canonicalize(p, 2);
    for (std::size_t t = 0; t < 4; ++t)
        EXPECT_NEAR(std::abs(inner(pc.tensor(t), p.tensor(t))), 1.0, 1e-14);
}

TEST(Mps, OverlapOfSelfIsRealNorm) {
    const auto mps = GroupedMPS::random(contiguous_grouping({3, 3}), 4, 2);
    const auto o = overlap(mps, mps);
    EXPECT_NEAR(o.imag(), 0.0, 1e-14);
    EXPECT_NEAR(o.real(), norm2(mps), 1e-14);
}

TEST(Mps, InternalLayersAreExact) {
    const auto topo = build_topology(3, 4);
    const auto g = standard_grouping(topo, "V1");
    const auto c = sequence_I(topo, 4, 2); // couplers A, B, C, D
    auto mps = GroupedMPS::product_state(g, Bitstring(10, 0));
    auto sv = evolve(Circuit(10));

    Layer ones;
    for (const auto &gate : c.layers()[0].gates)
        if (gate.arity() == 1)
            ones.gates.push_back(gate);
    ASSERT_TRUE(is_internal(g, ones));
    const auto bonds = mps.bond_dims();
    mps = apply_internal_gates(mps, ones);
    EXPECT_EQ(mps.bond_dims(), bonds);
    for (const auto &gate : ones.gates)
        sv.apply(gate);
    EXPECT_LT(max_diff(to_statevector(mps), sv), 1e-13);

    // coupler B is internal to V1 (layer index 1 of sequence I)
    const auto &b_layer = c.layers()[1];
    ASSERT_TRUE(is_internal(g, b_layer));
    EXPECT_FALSE(is_internal(g, c.layers()[0]));
    mps = apply_internal_gates(mps, b_layer);
    for (const auto &gate : b_layer.gates)
        sv.apply(gate);
    EXPECT_LT(max_diff(to_statevector(mps), sv), 1e-13);
    EXPECT_THROW(apply_internal_gates(mps, c.layers()[0]), Error);
}

TEST(Mps, TruncatedApplyExactAtFullRank) {
    const auto topo = build_topology(2, 4, true);
    const auto g = standard_grouping(topo, "V1");
    const auto c = sequence_I(topo, 6, 4);
    auto mps = GroupedMPS::product_state(g, Bitstring(8, 0));
    double discarded = 0.0;
    for (const auto &gate : c.flattened())
        discarded += mps.apply_truncated(gate, 256);
    EXPECT_LT(discarded, 1e-20);
    EXPECT_LT(max_diff(to_statevector(mps), evolve(c)), 1e-10);
}

TEST(Mps, BondCapacity) {
    const auto g = contiguous_grouping({2, 3, 4});
    EXPECT_EQ(bond_capacity(g, 0, 100), 4u);  // 2^2 on the left
    EXPECT_EQ(bond_capacity(g, 1, 100), 16u); // 2^4 on the right
    EXPECT_EQ(bond_capacity(g, 1, 8), 8u);
}

TEST(Mps, CheckpointRoundTrip) {
    const auto g = contiguous_grouping({2, 3, 2});
    const auto mps = GroupedMPS::random(g, 4, 9);
    const auto path = (std::filesystem::temp_directory_path() / "qcdmrg_ckpt.mps").string();
    save_checkpoint(path, mps);
    const auto back = load_checkpoint(path);
    EXPECT_EQ(back.grouping(), g);
    EXPECT_EQ(back.bond_dims(), mps.bond_dims());
    EXPECT_EQ(back.ortho_center(), mps.ortho_center());
    for (std::size_t t = 0; t < mps.size(); ++t)
        EXPECT_EQ(back.tensor(t).values(), mps.tensor(t).values());
    {
        std::ofstream corrupt(path, std::ios::binary);
        corrupt << "not a checkpoint";
    }
    EXPECT_THROW(load_checkpoint(path), Error);
    std::filesystem::remove(path);
}

TEST(Mps, RejectsInconsistentBonds) {
    const auto g = contiguous_grouping({1, 1});
    std::vector<DenseTensor> t{DenseTensor({1, 2, 2}), DenseTensor({3, 2, 1})};
    EXPECT_THROW(GroupedMPS(g, t), Error);
}
