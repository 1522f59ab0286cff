#include "qcdmrg/error.hpp"
#include "qcdmrg/fidelity.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

using namespace qcdmrg;

TEST(Fidelity, OverlapOfBasisStates) {
    const auto a = StateVector::basis(3, 5);
    EXPECT_EQ(fidelity(a, a), 1.0);
    EXPECT_EQ(fidelity(a, StateVector::basis(3, 4)), 0.0);
    const auto pt = porter_thomas_state(8, 2);
    EXPECT_NEAR(fidelity(pt, pt), 1.0, 1e-12);
}

TEST(Fidelity, ErrorRate) {
    EXPECT_EQ(error_rate(0.5, 0), 0.0);
    EXPECT_NEAR(error_rate(1.0, 100), 0.0, 1e-15);
    // 0.002 = (1 - eps)^430
    EXPECT_NEAR(error_rate(0.002, 430), 0.01435, 1e-4);
    EXPECT_NEAR(std::pow(1.0 - error_rate(0.3, 17), 17), 0.3, 1e-12);
    EXPECT_FALSE(error_rate_xeb(-0.1, 10).has_value());
    EXPECT_FALSE(error_rate_xeb(0.0, 10).has_value());
    EXPECT_NEAR(*error_rate_xeb(0.5, 1), 0.5, 1e-15);
}

TEST(Fidelity, XebOfUniformIsZeroAndSelfIsPositive) {
    const std::size_t n = 8, dim = 256;
    std::vector<double> uniform(dim, 1.0 / dim);
    const auto P = porter_thomas_state(n, 4).probabilities();
    EXPECT_NEAR(xeb_exact(P, uniform), 0.0, 1e-12);
    // Porter-Thomas second moment gives about 1
    EXPECT_NEAR(xeb_exact(P, P), 1.0, 0.3);
    std::vector<std::uint64_t> samples{0, 1, 2, 3};
    EXPECT_NEAR(xeb_estimate(uniform, samples), 0.0, 1e-12);
    const auto fn = [&](const Bitstring &x) { return P[bitstring_to_index(x)]; };
    std::vector<Bitstring> bs;
    for (auto s : samples)
        bs.push_back(index_to_bitstring(s, n));
    EXPECT_NEAR(xeb_estimate(fn, bs), xeb_estimate(P, samples), 1e-12);
}

TEST(Fidelity, HaarMomentsMatchRandomStates) {
    const std::size_t n = 10;
    const auto ref = haar_reference_moments(n);
    EXPECT_NEAR(ref.mean_F, 1.0 / 1024, 1e-15);
    EXPECT_EQ(ref.mean_FB, 0.0);
    double sf = 0.0, sb = 0.0, sb2 = 0.0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const auto a = porter_thomas_state(n, 1000 + 2 * t);
        const auto b = porter_thomas_state(n, 1001 + 2 * t);
        const double fb = xeb_exact(a.probabilities(), b.probabilities());
        sf += fidelity(a, b);
        sb += fb;
        sb2 += fb * fb;
    }
    sf /= trials;
    sb /= trials;
    const double var = sb2 / trials - sb * sb;
    EXPECT_NEAR(sf, ref.mean_F, 0.25 * ref.mean_F);
    EXPECT_NEAR(sb, 0.0, 5.0 * std::sqrt(ref.var_FB / trials));
    EXPECT_NEAR(var, ref.var_FB, 0.3 * ref.var_FB);
}

TEST(Fidelity, QuadrantScalingFunction) {
    EXPECT_NEAR(area_inverse(0.0), 0.0, 1e-12);
    EXPECT_NEAR(area_inverse(std::numbers::pi), std::numbers::pi, 1e-12);
    EXPECT_NEAR(quadrant_scaling_g(0.0), 2.0, 1e-9);
    EXPECT_NEAR(quadrant_scaling_g(1.0), 0.0, 1e-9);
    // normalized: integral of g^2 over [0, 1] is 1
    const int m = 20000;
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
        const double g = quadrant_scaling_g((i + 0.5) / m);
        s += g * g / m;
    }
    EXPECT_NEAR(s, 1.0, 1e-3);
}

TEST(Fidelity, SchmidtSpectrumOfRandomStateCollapses) {
    const std::size_t n = 16;
    const auto s = porter_thomas_state(n, 9);
    std::vector<unsigned> left;
    for (unsigned q = 0; q < n / 2; ++q)
        left.push_back(q);
    EXPECT_LT(schmidt_collapse_rms(schmidt_spectrum(s, left), n), 0.05);
    EXPECT_THROW(schmidt_collapse_rms({}, n), Error);
}

TEST(Fidelity, ChaoticOptimum) {
    EXPECT_NEAR(chaotic_optimum_fidelity(20, 16), 0.0625, 1e-15);
    EXPECT_EQ(chaotic_optimum_fidelity(4, 16), 1.0);
    const double eps = chaotic_optimum_error(20, 10, 16);
    EXPECT_NEAR(eps, (std::log(2.0) - std::log(64.0) / 40.0) / 10.0, 1e-15);
}

TEST(Fidelity, SqrtFRelation) {
    const auto d = check_sqrtF_relation(1.0, 1.0);
    EXPECT_EQ(d.deviation, 0.0);
    EXPECT_EQ(d.ratio, 1.0);
    const auto h = check_sqrtF_relation(0.25, 0.4);
    EXPECT_NEAR(h.sqrt_F, 0.5, 1e-15);
    EXPECT_NEAR(h.ratio, 0.8, 1e-15);
    EXPECT_NEAR(h.deviation, 0.2, 1e-15);
    EXPECT_TRUE(std::isnan(check_sqrtF_relation(0.0, 0.1).ratio));
}

TEST(Fidelity, RecordFillsRates) {
    const auto r = make_record(0.5, 10, 0.4, 0.6);
    EXPECT_NEAR(r.eps_tilde, error_rate(0.5, 10), 1e-15);
    EXPECT_NEAR(*r.eps, error_rate(0.4, 10), 1e-15);
    EXPECT_NEAR(*r.eps_B, error_rate(0.6, 10), 1e-15);
    const auto bare = make_record(0.9, 3);
    EXPECT_FALSE(bare.F.has_value());
    EXPECT_FALSE(bare.eps.has_value());
    EXPECT_FALSE(bare.eps_B.has_value());
}

TEST(Fidelity, MetricsCsvLeavesMissingCellsEmpty) {
    std::ostringstream out;
    write_metrics_header(out);
    MetricsRow row;
    row.circuit_id = "c0";
    row.mode = "open";
    row.chi = 4;
    row.K = 1;
    row.n_s = 2;
    row.grouping = "V1";
    row.D = 6;
    row.record = make_record(0.5, 10);
    write_metrics_row(out, row);
    std::istringstream in(out.str());
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    EXPECT_EQ(header, kMetricsHeader);
    EXPECT_EQ(line.rfind("c0,open,4,1,2,V1,6,10,,0.5,,,", 0), 0u) << line;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','),
              std::count(header.begin(), header.end(), ','));
}
