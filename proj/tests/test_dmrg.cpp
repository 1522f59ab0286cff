#include "qcdmrg/dmrg.hpp"
#include "qcdmrg/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace qcdmrg;

namespace {

// |<a|b>|^2 for dense states
double dense_fidelity(const StateVector &a, const StateVector &b) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        s += std::conj(a.amplitude(i)) * b.amplitude(i);
    return std::norm(s);
}

} // namespace

TEST(Dmrg, FullRankIsExact) {
    const auto topo = build_topology(2, 4); // 6 qubits
    const auto circ = sequence_I(topo, 6, 3);
    const auto grouping = standard_grouping(topo, "V1");
    auto mps = GroupedMPS::product_state(grouping, Bitstring(topo.n_qubits(), 0));
    CompressionConfig cfg;
    cfg.chi = 64;
    for (const auto &l : circ.layers()) {
        auto res = compress_step(mps, {l}, cfg);
        EXPECT_NEAR(res.f_delta, 1.0, 1e-10);
        mps = res.mps;
    }
    const auto exact = evolve(circ);
    EXPECT_NEAR(dense_fidelity(exact, to_statevector(mps)), 1.0, 1e-10);
}

TEST(Dmrg, PartialFidelityMatchesDenseOverlap) {
    const auto topo = build_topology(3, 4); // 10 qubits
    const auto circ = sequence_I(topo, 8, 11);
    const auto grouping = standard_grouping(topo, "V1");
    auto mps = GroupedMPS::product_state(grouping, Bitstring(topo.n_qubits(), 0));
    CompressionConfig cfg;
    cfg.chi = 4;
    cfg.n_s = 2;
    for (const auto &l : circ.layers()) {
        const auto before = to_statevector(mps);
        auto res = compress_step(mps, {l}, cfg);
        EXPECT_TRUE(res.trace.non_decreasing());
        const auto target = evolve(Circuit(topo.n_qubits(), {l}), before);
        EXPECT_NEAR(dense_fidelity(to_statevector(res.mps), target), res.f_delta, 1e-8);
        mps = res.mps;
    }
}

TEST(Dmrg, AllInternalLayerIsExact) {
    const auto topo = build_topology(3, 4);
    const auto g = standard_grouping(topo, "V1");
    const auto c = sequence_I(topo, 2, 5); // layer 1 uses coupler B, internal to V1
    const auto src = GroupedMPS::random(g, 4, 1);
    CompressionConfig cfg;
    cfg.chi = 4;
    const auto res = compress_step(src, {c.layers()[1]}, cfg);
    EXPECT_NEAR(res.f_delta, 1.0, 1e-12);
    const auto direct = apply_internal_gates(src, c.layers()[1]);
    EXPECT_NEAR(std::norm(overlap(direct, res.mps)), 1.0, 1e-10);
    const auto init = init_guess(src, {c.layers()[1]}, cfg);
    EXPECT_NEAR(std::norm(overlap(direct, init)), 1.0, 1e-10);
}

TEST(Dmrg, LowDepthIsExactOnV1) {
    const auto topo = build_topology(2, 8, true);
    const auto g = standard_grouping(topo, "V1");
    const auto c = sequence_II(topo, 2, 4);
    auto mps = GroupedMPS::product_state(g, Bitstring(16, 0));
    CompressionConfig cfg;
    cfg.chi = 4;
    for (const auto &l : c.layers()) {
        auto res = compress_step(mps, {l}, cfg);
        EXPECT_NEAR(res.f_delta, 1.0, 1e-10);
        mps = res.mps;
    }
}

TEST(Dmrg, EnvironmentOfIdentityOverlap) {
    const auto g = contiguous_grouping({2, 2, 2});
    const auto src = GroupedMPS::random(g, 4, 8);
    for (std::size_t tau = 0; tau < 3; ++tau) {
        const auto target = canonicalize(src, tau);
        const auto F = build_environment(target, src, {Layer{}}, tau);
        EXPECT_NEAR(norm2(F), 1.0, 1e-10);
        // contracting F with the target tensor gives the overlap
        EXPECT_NEAR(std::abs(inner(target.tensor(tau), F) - overlap(target, src)), 0.0, 1e-10);
    }
}

TEST(Dmrg, EnvironmentWithCrossingGatesMatchesSandwich) {
    const auto topo = build_topology(3, 4);
    const auto g = standard_grouping(topo, "V1");
    const auto c = sequence_I(topo, 2, 2);
    const auto src = GroupedMPS::random(g, 4, 3);
    const auto target = canonicalize(GroupedMPS::random(g, 3, 4), 1);
    const auto F = build_environment(target, src, c.layers(), 1);
    // <target| U |src> by dense algebra
    const auto u_src = evolve(c, to_statevector(src));
    const auto t = to_statevector(target);
    cplx expect = 0.0;
    for (std::size_t i = 0; i < t.dim(); ++i)
        expect += std::conj(t.amplitude(i)) * u_src.amplitude(i);
    EXPECT_NEAR(std::abs(inner(target.tensor(1), F) - expect), 0.0, 1e-10);
}

TEST(Dmrg, UpdateTensorScaling) {
    DenseTensor F({2, 4, 3});
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n;
    for (auto &v : F.data())
        v = {n(rng), n(rng)};
    const auto u = update_tensor(F);
    EXPECT_NEAR(u.f, norm2(F), 1e-12);
    EXPECT_NEAR(norm2(u.m), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(inner(u.m, F)), std::sqrt(u.f), 1e-12);

    const auto scaled = update_tensor(cplx(3.0, 0.0) * F);
    EXPECT_NEAR(scaled.f, 9.0 * u.f, 1e-10);
    for (std::size_t i = 0; i < F.size(); ++i)
        EXPECT_NEAR(std::abs(scaled.m[i] - u.m[i]), 0.0, 1e-12);

    const auto unit = update_tensor(u.m);
    EXPECT_NEAR(unit.f, 1.0, 1e-12);
    EXPECT_THROW(update_tensor(DenseTensor({2, 2, 2})), Error);
}

TEST(Dmrg, SweepsNeverLoseToTruncatedInit) {
    const auto topo = build_topology(2, 8, true);
    const auto g = standard_grouping(topo, "V1");
    const auto c = sequence_I(topo, 10, 6);
    auto mps = GroupedMPS::product_state(g, Bitstring(16, 0));
    CompressionConfig cfg;
    cfg.chi = 4;
    cfg.n_s = 3;
    for (const auto &l : c.layers()) {
        auto res = compress_step(mps, {l}, cfg);
        EXPECT_TRUE(res.trace.non_decreasing());
        EXPECT_GE(res.trace.final_f(), res.trace.initial_f() * (1 - 1e-12));
        EXPECT_EQ(res.trace.entries.front().sweep, 0u);
        mps = res.mps;
    }
}

TEST(Dmrg, RandomInitReachesSameOptimumOnEasyStep) {
    const auto topo = build_topology(2, 4, true);
    const auto g = standard_grouping(topo, "V1");
    const auto c = sequence_I(topo, 1, 1);
    const auto src = GroupedMPS::product_state(g, Bitstring(8, 0));
    CompressionConfig cfg;
    cfg.chi = 16;
    cfg.n_s = 4;
    cfg.init = InitStrategy::RandomMPS;
    cfg.init_seed = 3;
    EXPECT_NEAR(compress_step(src, c.layers(), cfg).f_delta, 1.0, 1e-8);
}

TEST(Dmrg, ConfigValidation) {
    CompressionConfig cfg;
    cfg.chi = 0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg.chi = 4;
    cfg.K = 0;
    EXPECT_THROW(cfg.validate(), Error);
}

TEST(Dmrg, TraceCsvFormat) {
    SweepTrace t;
    t.entries = {{0, 0, 0.5}, {1, 0, 0.75}};
    std::ostringstream out;
    write_trace_header(out);
    write_trace_rows(out, 3, t);
    EXPECT_EQ(out.str(), "step,sweep,tau,f,epsilon\n3,0,0,0.5,0.5\n3,1,0,0.75,0.25\n");
}
