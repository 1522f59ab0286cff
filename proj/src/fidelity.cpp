#include "qcdmrg/fidelity.hpp"

#include "qcdmrg/error.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <ostream>

namespace qcdmrg {

namespace {

[[noreturn]] void fail(const std::string &what) { throw Error("fidelity-analysis", what); }

void check_normalized(std::span<const double> p, const char *name) {
    double s = 0.0;
    for (auto v : p)
        s += v;
    if (std::abs(s - 1.0) > 1e-8)
        fail(std::string(name) + " does not sum to 1");
}

std::size_t log2_exact(std::size_t n) {
    if (n == 0 || (n & (n - 1)) != 0)
        fail("table size is not a power of two");
    return static_cast<std::size_t>(std::countr_zero(n));
}

} // namespace

double fidelity(const StateVector &a, const StateVector &b) {
    if (a.n_qubits() != b.n_qubits())
        fail("fidelity of states with different qubit counts");
    cplx s = 0.0;
    const auto x = a.amplitudes(), y = b.amplitudes();
    for (std::size_t i = 0; i < x.size(); ++i)
        s += std::conj(x[i]) * y[i];
    return std::norm(s);
}

double error_rate(double F, std::size_t n_2g) {
    if (!(F > 0.0))
        fail("error rate needs F > 0");
    if (n_2g == 0)
        return 0.0;
    return 1.0 - std::pow(F, 1.0 / static_cast<double>(n_2g));
}

std::optional<double> error_rate_xeb(double F_B, std::size_t n_2g) {
    if (!(F_B > 0.0))
        return std::nullopt;
    return error_rate(F_B, n_2g);
}

double xeb_exact(std::span<const double> P, std::span<const double> Q) {
    if (P.size() != Q.size())
        fail("probability tables differ in size");
    check_normalized(P, "P");
    check_normalized(Q, "Q");
    log2_exact(P.size());
    double s = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i)
        s += P[i] * Q[i];
    return static_cast<double>(P.size()) * s - 1.0;
}

double xeb_estimate(std::span<const double> P, std::span<const std::uint64_t> samples) {
    if (samples.empty())
        fail("cross-entropy estimate needs at least one sample");
    log2_exact(P.size());
    double s = 0.0;
    for (auto x : samples)
        s += P[x];
    return static_cast<double>(P.size()) * s / static_cast<double>(samples.size()) - 1.0;
}

double xeb_estimate(const std::function<double(const Bitstring &)> &P,
                    const std::vector<Bitstring> &samples) {
    if (samples.empty())
        fail("cross-entropy estimate needs at least one sample");
    double s = 0.0;
    for (const auto &x : samples)
        s += P(x);
    const double dim = std::ldexp(1.0, static_cast<int>(samples.front().size()));
    return dim * s / static_cast<double>(samples.size()) - 1.0;
}

double chaotic_optimum_error(double N, double D, double chi) {
    if (!(N > 0 && D > 0 && chi > 0))
        fail("chaotic optimum needs positive N, D, chi");
    return (std::log(2.0) - std::log(4.0 * chi) / (2.0 * N)) / D;
}

double chaotic_optimum_fidelity(double N, double chi) {
    return std::min(1.0, 4.0 * chi / std::pow(2.0, N / 2.0));
}

double area_inverse(double y) {
    if (!(y >= 0.0 && y <= std::numbers::pi))
        fail("A^{-1} is defined on [0, pi]");
    double lo = 0.0, hi = std::numbers::pi;
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        if (mid - std::sin(mid) < y)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double quadrant_scaling_g(double x) {
    if (!(x >= 0.0 && x <= 1.0))
        fail("g(x) is defined on [0, 1]");
    return 2.0 * std::cos(0.5 * area_inverse(std::numbers::pi * x));
}

double schmidt_collapse_rms(const std::vector<double> &spectrum, std::size_t n_qubits) {
    if (spectrum.empty())
        fail("empty spectrum");
    const double M = static_cast<double>(spectrum.size());
    const double scale = std::pow(2.0, static_cast<double>(n_qubits) / 4.0);
    double s2 = 0.0;
    for (std::size_t mu = 0; mu < spectrum.size(); ++mu) {
        const double diff = scale * spectrum[mu] - quadrant_scaling_g((static_cast<double>(mu) + 0.5) / M);
        s2 += diff * diff;
    }
    return std::sqrt(s2 / M);
}

HaarMoments haar_reference_moments(std::size_t n_qubits) {
    if (n_qubits == 0)
        fail("N must be >= 1");
    const double n = std::ldexp(1.0, static_cast<int>(n_qubits));
    return {1.0 / n, 0.0, (n - 1.0) / ((n + 1.0) * (n + 1.0))};
}

SqrtFDiagnostic check_sqrtF_relation(double F, double F_B) {
    const double r = std::sqrt(std::max(F, 0.0));
    if (r == 0.0)
        return {0.0, std::nan(""), std::nan("")};
    return {r, F_B / r, std::abs(F_B - r) / r};
}

FidelityRecord make_record(double F_tilde, std::size_t n_2g, std::optional<double> F,
                           std::optional<double> F_B) {
    FidelityRecord r;
    r.F = F;
    r.F_tilde = F_tilde;
    r.F_B = F_B;
    r.n_2g = n_2g;
    r.eps_tilde = error_rate(F_tilde, n_2g);
    if (F && *F > 0.0)
        r.eps = error_rate(*F, n_2g);
    if (F_B)
        r.eps_B = error_rate_xeb(*F_B, n_2g);
    return r;
}

void write_metrics_header(std::ostream &out) { out << kMetricsHeader << '\n'; }

void write_metrics_row(std::ostream &out, const MetricsRow &row) {
    auto opt = [&](const std::optional<double> &v) {
        if (v)
            out << *v;
    };
    const auto old = out.precision(17);
    const auto &r = row.record;
    out << row.circuit_id << ',' << row.mode << ',' << row.chi << ',' << row.K << ',' << row.n_s
        << ',' << row.grouping << ',' << row.D << ',' << r.n_2g << ',';
    opt(r.F);
    out << ',' << r.F_tilde << ',';
    opt(r.F_B);
    out << ',';
    opt(r.eps);
    out << ',' << r.eps_tilde << '\n';
    out.precision(old);
}

} // namespace qcdmrg
