#include "qcdmrg/error.hpp"
#include "qcdmrg/fidelity.hpp"
#include "qcdmrg/sim_modes.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace qcdmrg;

TEST(OpenMode, DepthZero) {
    const auto topo = build_topology(3, 4);
    const auto res = run_open(Circuit(10), standard_grouping(topo, "V1"), CompressionConfig{});
    EXPECT_EQ(res.F_tilde, 1.0);
    EXPECT_EQ(res.eps_tilde, 0.0);
    EXPECT_TRUE(res.steps.empty());
}

TEST(OpenMode, FullRankReproducesDenseState) {
    const auto topo = build_topology(2, 8, true);
    const auto c = sequence_I(topo, 6, 2);
    const auto g = standard_grouping(topo, "V1");
    CompressionConfig cfg;
    cfg.chi = 1;
    for (std::size_t b = 0; b + 1 < g.size(); ++b)
        cfg.chi = std::max(cfg.chi, bond_capacity(g, b, 1u << 16));
    const auto res = run_open(c, g, cfg);
    EXPECT_NEAR(res.F_tilde, 1.0, 1e-8);
    EXPECT_NEAR(fidelity(evolve(c), to_statevector(res.mps)), 1.0, 1e-8);
    EXPECT_EQ(res.n_2g, c.two_qubit_count());
}

TEST(OpenMode, ChunksNeverSplitLayers) {
    const auto topo = build_topology(3, 4);
    const auto c = sequence_I(topo, 7, 1);
    CompressionConfig cfg;
    cfg.chi = 4;
    cfg.K = 3;
    const auto res = run_open(c, standard_grouping(topo, "V1"), cfg);
    std::size_t next = 0;
    for (const auto &s : res.steps) {
        EXPECT_EQ(s.layer_begin, next);
        EXPECT_LE(s.layer_end - s.layer_begin, 3u);
        next = s.layer_end;
    }
    EXPECT_EQ(next, 7u);
    EXPECT_EQ(res.steps.back().layer_end - res.steps.back().layer_begin, 1u);
}

TEST(OpenMode, FtildeIsProductOfPartialFidelities) {
    const auto topo = build_topology(3, 4);
    const auto c = sequence_I(topo, 10, 3);
    CompressionConfig cfg;
    cfg.chi = 2;
    cfg.n_s = 2;
    const auto res = run_open(c, standard_grouping(topo, "V1"), cfg);
    double prod = 1.0;
    for (double f : res.f_deltas())
        prod *= f;
    EXPECT_NEAR(res.F_tilde, prod, 1e-15);
    EXPECT_GT(res.F_tilde, 0.0);
    EXPECT_LT(res.F_tilde, 1.0);
    EXPECT_NEAR(res.eps_tilde, error_rate(res.F_tilde, res.n_2g), 1e-15);
}

TEST(OpenMode, EstimateTracksOracleAtModestChi) {
    const auto topo = build_topology(2, 6, true); // 12 qubits
    const auto c = sequence_I(topo, 12, 4);
    CompressionConfig cfg;
    cfg.chi = 8;
    cfg.n_s = 2;
    const auto res = run_open(c, standard_grouping(topo, "V1"), cfg);
    const double F = fidelity(evolve(c), to_statevector(res.mps));
    EXPECT_LT(std::abs(res.F_tilde - F) / F, 0.05);
}

TEST(OpenMode, KOneAndKTwoAgreeAtEvenDepthOnV1) {
    const auto topo = build_topology(3, 4);
    const auto g = standard_grouping(topo, "V1");
    const auto c = sequence_I(topo, 8, 5);
    CompressionConfig k1, k2;
    k1.chi = k2.chi = 4;
    k1.n_s = k2.n_s = 3;
    k2.K = 2;
    const auto r1 = run_open(c, g, k1);
    const auto r2 = run_open(c, g, k2);
    EXPECT_NEAR(r1.F_tilde, r2.F_tilde, 1e-6 * r1.F_tilde);
}

TEST(OpenMode, ObserverSeesEveryStep) {
    const auto topo = build_topology(3, 4);
    const auto c = sequence_I(topo, 5, 1);
    std::size_t calls = 0;
    run_open(c, standard_grouping(topo, "V1"), CompressionConfig{},
             [&](const StepRecord &, const GroupedMPS &) { ++calls; });
    EXPECT_EQ(calls, 5u);
}

TEST(ClosedMode, FullMiddleIsExact) {
    const auto topo = build_topology(2, 6, true);
    const auto c = sequence_II(topo, 6, 9);
    const auto g = standard_grouping(topo, "V1");
    const auto exact = evolve(c);
    ClosedConfig cc;
    cc.D1 = 0;
    cc.D2 = 6;
    cc.D3 = 0;
    for (std::uint64_t idx : {0ull, 77ull, 4095ull}) {
        const auto x = index_to_bitstring(idx, 12);
        const auto r = run_closed(c, x, g, cc);
        EXPECT_NEAR(std::abs(r.amplitude - exact.amplitude(idx)), 0.0, 1e-10);
        EXPECT_EQ(r.F_tilde, 1.0);
    }
}

TEST(ClosedMode, IdentityCircuitAmplitude) {
    const auto topo = build_topology(3, 4);
    Circuit c(10);
    for (int d = 0; d < 3; ++d)
        c.add_layer(Layer{});
    ClosedConfig cc;
    cc.D1 = 1;
    cc.D2 = 1;
    cc.D3 = 1;
    const auto r = run_closed(c, Bitstring(10, 0), standard_grouping(topo, "V1"), cc);
    EXPECT_NEAR(std::abs(r.amplitude - 1.0), 0.0, 1e-12);
}

TEST(ClosedMode, BatchMatchesSingleAndIsOrderIndependent) {
    const auto topo = build_topology(3, 4);
    const auto g = standard_grouping(topo, "V1");
    const auto c = sequence_I(topo, 10, 2);
    CompressionConfig comp;
    comp.chi = 4;
    comp.n_s = 2;
    const auto cc = ClosedConfig::with_defaults(c.depth(), comp, 2);
    const auto cache = run_forward(c, g, cc);
    std::vector<Bitstring> xs{index_to_bitstring(3, 10), index_to_bitstring(600, 10),
                              index_to_bitstring(1000, 10)};
    const auto batch = run_closed_batch(cache, c, xs, cc);
    auto rev = xs;
    std::reverse(rev.begin(), rev.end());
    const auto batch_rev = run_closed_batch(cache, c, rev, cc);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto single = run_closed(c, xs[i], g, cc);
        EXPECT_EQ(batch[i].amplitude, single.amplitude);
        EXPECT_EQ(batch[i].amplitude, batch_rev[xs.size() - 1 - i].amplitude);
        EXPECT_NEAR(batch[i].F_tilde, batch[i].F_forward * batch[i].F_backward, 1e-15);
    }
}

TEST(ClosedMode, ExhaustiveBatchTotalWeight) {
    const auto topo = build_topology(3, 4);
    const auto g = standard_grouping(topo, "V1");
    const auto c = sequence_I(topo, 8, 7);
    CompressionConfig comp;
    comp.chi = 4;
    comp.n_s = 2;
    const auto cc = ClosedConfig::with_defaults(c.depth(), comp, 2);
    const auto cache = run_forward(c, g, cc);
    std::vector<Bitstring> all;
    for (std::uint64_t i = 0; i < 1024; ++i)
        all.push_back(index_to_bitstring(i, 10));
    double total = 0.0;
    for (const auto &r : run_closed_batch(cache, c, all, cc))
        total += std::norm(r.amplitude);
    EXPECT_LE(total, 1.0 + 1e-6);
    EXPECT_GT(total, 0.1);
}

TEST(ClosedMode, DefaultsAndValidation) {
    CompressionConfig comp;
    comp.K = 2;
    const auto cc = ClosedConfig::with_defaults(11, comp);
    EXPECT_EQ(cc.D2, 2u);
    EXPECT_EQ(cc.D1 + cc.D2 + cc.D3, 11u);
    EXPECT_GE(cc.D1, cc.D3);
    EXPECT_NO_THROW(cc.validate(11));
    EXPECT_THROW(cc.validate(12), Error);
}

TEST(ClosedMode, MiddleOverflowIsReported) {
    const auto topo = build_topology(3, 4);
    const auto c = sequence_I(topo, 6, 1);
    CompressionConfig comp;
    comp.chi = 4;
    auto cc = ClosedConfig::with_defaults(c.depth(), comp, 2);
    cc.max_middle_elements = 8;
    EXPECT_THROW(run_closed(c, Bitstring(10, 0), standard_grouping(topo, "V1"), cc), Error);
}

TEST(ClosedMode, ApproximateErrorRateUsesApproximatedGates) {
    const auto topo = build_topology(3, 4);
    const auto c = sequence_I(topo, 10, 4);
    CompressionConfig comp;
    comp.chi = 2;
    const auto cc = ClosedConfig::with_defaults(c.depth(), comp, 2);
    const auto r = run_closed(c, Bitstring(10, 0), standard_grouping(topo, "V1"), cc);
    std::size_t approx = 0;
    for (std::size_t d = 0; d < c.depth(); ++d)
        if (d < cc.D1 || d >= cc.D1 + cc.D2)
            approx += c.layers()[d].two_qubit_count();
    EXPECT_EQ(r.n_2g_approx, approx);
    EXPECT_EQ(r.n_2g, c.two_qubit_count());
    EXPECT_NEAR(r.eps_tilde_approx, error_rate(r.F_tilde, approx), 1e-15);
    EXPECT_NEAR(r.eps_tilde, error_rate(r.F_tilde, r.n_2g), 1e-15);
}

TEST(Sandwich, MatchesDenseOverlap) {
    const auto topo = build_topology(3, 4);
    const auto g = standard_grouping(topo, "V1");
    const auto c = sequence_I(topo, 3, 3);
    const auto bra = GroupedMPS::random(g, 4, 1);
    const auto ket = GroupedMPS::random(g, 4, 2);
    const auto u_ket = evolve(c, to_statevector(ket));
    const auto b = to_statevector(bra);
    cplx expect = 0.0;
    for (std::size_t i = 0; i < b.dim(); ++i)
        expect += std::conj(b.amplitude(i)) * u_ket.amplitude(i);
    EXPECT_NEAR(std::abs(sandwich(bra, c.layers(), ket) - expect), 0.0, 1e-10);
    EXPECT_GT(sandwich_cost(bra, c.layers(), ket), 0.0);
}
