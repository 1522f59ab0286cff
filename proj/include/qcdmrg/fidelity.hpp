#pragma once

#include "qcdmrg/exact_sim.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qcdmrg {

/// |<a|b>|^2
double fidelity(const StateVector &a, const StateVector &b);

/// 1 - F^{1/N_2g}; zero when there are no two-qubit gates.
double error_rate(double F, std::size_t n_2g);
/// Same rate for the cross-entropy fidelity; undefined when F_B <= 0.
std::optional<double> error_rate_xeb(double F_B, std::size_t n_2g);

/// 2^N sum_x P(x) Q(x) - 1 for full probability tables.
double xeb_exact(std::span<const double> P, std::span<const double> Q);
/// (2^N / N_s) sum_alpha P(x_alpha) - 1.
double xeb_estimate(std::span<const double> P, std::span<const std::uint64_t> samples);
double xeb_estimate(const std::function<double(const Bitstring &)> &P,
                    const std::vector<Bitstring> &samples);

/// (1/D) (log 2 - log(4 chi) / (2N)).
double chaotic_optimum_error(double N, double D, double chi);
/// 4 chi / 2^{N/2}, capped at 1.
double chaotic_optimum_fidelity(double N, double chi);

/// Inverse of A(theta) = theta - sin(theta) on [0, pi], by bisection.
double area_inverse(double y);
/// g(x) = 2 cos(A^{-1}(pi x) / 2) on [0, 1].
double quadrant_scaling_g(double x);
/// RMS distance between the rescaled spectrum 2^{N/4} S_mu and g evaluated
/// at (mu + 1/2) / 2^{N/2}.
double schmidt_collapse_rms(const std::vector<double> &spectrum, std::size_t n_qubits);

struct HaarMoments {
    double mean_F;
    double mean_FB;
    double var_FB;
};
HaarMoments haar_reference_moments(std::size_t n_qubits);

struct SqrtFDiagnostic {
    double sqrt_F;
    double ratio;     // F_B / sqrt(F)
    double deviation; // |F_B - sqrt(F)| / sqrt(F)
};
SqrtFDiagnostic check_sqrtF_relation(double F, double F_B);

struct FidelityRecord {
    std::optional<double> F;
    double F_tilde = 1.0;
    std::optional<double> F_B;
    std::optional<double> eps;
    double eps_tilde = 0.0;
    std::optional<double> eps_B;
    std::size_t n_2g = 0;
};
FidelityRecord make_record(double F_tilde, std::size_t n_2g, std::optional<double> F = std::nullopt,
                           std::optional<double> F_B = std::nullopt);

/// One line of the run CSV; optional cells are left empty.
struct MetricsRow {
    std::string circuit_id;
    std::string mode;
    std::size_t chi = 0, K = 0, n_s = 0;
    std::string grouping;
    std::size_t D = 0;
    FidelityRecord record;
};
inline constexpr const char *kMetricsHeader =
    "circuit_id,mode,chi,K,n_s,grouping,D,N_2g,F,F_tilde,F_B,eps,eps_tilde";
void write_metrics_header(std::ostream &out);
void write_metrics_row(std::ostream &out, const MetricsRow &row);

} // namespace qcdmrg
