#pragma once

#include "qcdmrg/mps.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace qcdmrg {

enum class InitStrategy { TruncatedApply, RandomMPS };

struct CompressionConfig {
    std::size_t chi = 16;
    std::size_t K = 1;
    std::size_t n_s = 1;
    std::optional<double> convergence_tol;
    InitStrategy init = InitStrategy::TruncatedApply;
    std::uint64_t init_seed = 0;

    void validate() const;
};

struct SweepEntry {
    std::size_t sweep; // 0 holds the fidelity of the initial guess
    std::size_t tau;
    double f;
};

struct SweepTrace {
    std::vector<SweepEntry> entries;

    bool non_decreasing(double rel_tol = 1e-10) const;
    double initial_f() const;
    double final_f() const;
};

/// CSV with header "step,sweep,tau,f,epsilon"; epsilon = 1 - f.
void write_trace_header(std::ostream &out);
void write_trace_rows(std::ostream &out, std::size_t step, const SweepTrace &trace);

struct CompressionResult {
    GroupedMPS mps;
    double f_delta;
    SweepTrace trace;
};

/// The network <target| U |source> for a fixed source and gate list, with
/// the column-by-column ("vertical") contraction. Environments have layout
/// [wires..., target bond, source bond]; each wire is the operator-Schmidt
/// index of a gate whose two halves sit in different groups, and wires are
/// kept sorted by gate order.
class CompressionNetwork {
  public:
    struct Env {
        DenseTensor t;
        std::vector<std::size_t> wires;
    };

    CompressionNetwork(const GroupedMPS &source, const std::vector<Layer> &layers);

    std::size_t size() const noexcept { return source_.size(); }
    Env boundary() const;

    /// Column tau contracted with the left environment; result layout
    /// [wires crossing tau|tau+1..., target bond left, s, source bond right].
    Env column_from_left(std::size_t tau, const Env &left) const;
    /// Column tau contracted with the right environment; result layout
    /// [wires crossing tau-1|tau..., target bond right, s, source bond left].
    Env column_from_right(std::size_t tau, const Env &right) const;

    static DenseTensor env_from_left(const Env &column, const Env &right); // F[b, s, b']
    static DenseTensor env_from_right(const Env &left, const Env &column); // F[b, s, b']
    static Env next_left(const Env &column, const DenseTensor &target);
    static Env next_right(const Env &column, const DenseTensor &target);

  private:
    struct GateInfo {
        const Gate *gate;
        bool internal;
        std::size_t tau_l, tau_r; // groups of the two halves (tau_l < tau_r)
        Qubit q_l, q_r;
        std::vector<Mat2> op_l, op_r;
    };
    enum class Direction { LeftToRight, RightToLeft };
    Env process(std::size_t tau, Env t, Direction dir) const;

    GroupedMPS source_;
    std::vector<Gate> gates_;
    std::vector<GateInfo> info_;
};

/// F^(tau): the overlap network with target tensor tau removed. `target`
/// must have its orthogonality center at tau.
DenseTensor build_environment(const GroupedMPS &target, const GroupedMPS &source,
                              const std::vector<Layer> &layers, std::size_t tau);

struct TensorUpdate {
    DenseTensor m; ///< F / sqrt(f)
    double f;      ///< norm2(F)
};
TensorUpdate update_tensor(const DenseTensor &F);

GroupedMPS init_guess(const GroupedMPS &source, const std::vector<Layer> &layers,
                      const CompressionConfig &config);

/// Best chi-bounded approximation of U(layers)|source> by single-site sweeps
/// (tau = 0..m-1 then m-2..0, n_s times). f_delta is the last f.
CompressionResult compress_step(const GroupedMPS &source, const std::vector<Layer> &layers,
                                const CompressionConfig &config);
CompressionResult compress_step(const GroupedMPS &source, const std::vector<Layer> &layers,
                                const CompressionConfig &config, GroupedMPS initial);

} // namespace qcdmrg
