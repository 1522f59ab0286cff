#pragma once

#include "qcdmrg/dmrg.hpp"

#include <functional>
#include <vector>

namespace qcdmrg {

struct StepRecord {
    std::size_t step;
    std::size_t layer_begin, layer_end; // layers [begin, end) absorbed
    double f;
    bool exact; // all gates internal to groups, absorbed without compression
    SweepTrace trace;
};

struct OpenRunResult {
    GroupedMPS mps;
    std::vector<StepRecord> steps;
    double F_tilde = 1.0;
    double eps_tilde = 0.0;
    std::size_t n_2g = 0;

    std::vector<double> f_deltas() const;
};

/// Called after every step with the running state, e.g. for depth sweeps.
using OpenObserver = std::function<void(const StepRecord &, const GroupedMPS &)>;

/// Open simulation from |0...0>, K layers per compression step; chunks never
/// split a layer and the last chunk may be short.
OpenRunResult run_open(const Circuit &circuit, const Grouping &grouping,
                       const CompressionConfig &config, const OpenObserver &observer = {});
OpenRunResult run_open(const Circuit &circuit, GroupedMPS initial, const CompressionConfig &config,
                       const OpenObserver &observer = {});

struct ClosedConfig {
    std::size_t D1 = 0, D2 = 0, D3 = 0;
    CompressionConfig forward;
    CompressionConfig backward;
    /// Largest column tensor (complex entries) allowed in the exact middle
    /// contraction.
    std::size_t max_middle_elements = std::size_t{1} << 27;

    /// D2 = K when D2 is zero, then D1 = ceil((D - D2) / 2), D3 = rest.
    static ClosedConfig with_defaults(std::size_t depth, const CompressionConfig &cfg,
                                      std::size_t D2 = 0);
    void validate(std::size_t depth) const;
};

struct ForwardCache {
    GroupedMPS mps;
    double F_tilde;
    std::size_t n_2g;
};

struct ClosedRunResult {
    Bitstring x;
    cplx amplitude;
    double F_tilde;     // forward times backward estimate
    double F_forward;   // forward estimate alone
    double F_backward;  // backward estimate alone
    double eps_tilde;   // per two-qubit gate of the whole circuit
    double eps_tilde_approx; // per two-qubit gate of the D1 + D3 layers
    std::size_t n_2g;
    std::size_t n_2g_approx;
    GroupedMPS backward_mps;
};

ForwardCache run_forward(const Circuit &circuit, const Grouping &grouping, const ClosedConfig &cfg);

ClosedRunResult run_closed(const Circuit &circuit, const Bitstring &x, const Grouping &grouping,
                           const ClosedConfig &cfg);
std::vector<ClosedRunResult> run_closed_batch(const ForwardCache &forward, const Circuit &circuit,
                                              const std::vector<Bitstring> &xs,
                                              const ClosedConfig &cfg);

/// <bra| U(layers) |ket> by the column contraction used for environments.
cplx sandwich(const GroupedMPS &bra, const std::vector<Layer> &layers, const GroupedMPS &ket);
/// Upper bound on the largest intermediate of `sandwich`, in complex entries.
double sandwich_cost(const GroupedMPS &bra, const std::vector<Layer> &layers, const GroupedMPS &ket);

} // namespace qcdmrg
