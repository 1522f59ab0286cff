#include "qcdmrg/sim_modes.hpp"

#include "qcdmrg/error.hpp"

#include <cmath>

namespace qcdmrg {

namespace {

[[noreturn]] void fail(const std::string &what) { throw Error("sim-modes", what); }

double rate(double F, std::size_t n_2g) {
    if (n_2g == 0)
        return 0.0;
    return 1.0 - std::pow(F, 1.0 / static_cast<double>(n_2g));
}

} // namespace

std::vector<double> OpenRunResult::f_deltas() const {
    std::vector<double> f;
    for (const auto &s : steps)
        f.push_back(s.f);
    return f;
}

OpenRunResult run_open(const Circuit &circuit, const Grouping &grouping,
                       const CompressionConfig &config, const OpenObserver &observer) {
    if (grouping.n_qubits() != circuit.n_qubits())
        fail("grouping covers " + std::to_string(grouping.n_qubits()) + " qubits, circuit has " +
             std::to_string(circuit.n_qubits()));
    return run_open(circuit, GroupedMPS::product_state(grouping, Bitstring(circuit.n_qubits(), 0)),
                    config, observer);
}

OpenRunResult run_open(const Circuit &circuit, GroupedMPS initial, const CompressionConfig &config,
                       const OpenObserver &observer) {
    config.validate();
    if (initial.n_qubits() != circuit.n_qubits())
        fail("initial state and circuit qubit counts differ");
    OpenRunResult res{std::move(initial), {}, 1.0, 0.0, circuit.two_qubit_count()};
    const auto &layers = circuit.layers();
    std::size_t step = 0;
    for (std::size_t begin = 0; begin < layers.size(); begin += config.K, ++step) {
        const std::size_t end = std::min(layers.size(), begin + config.K);
        const std::vector<Layer> chunk(layers.begin() + static_cast<std::ptrdiff_t>(begin),
                                       layers.begin() + static_cast<std::ptrdiff_t>(end));
        bool internal = true;
        for (const auto &l : chunk)
            internal &= is_internal(res.mps.grouping(), l);
        StepRecord rec{step, begin, end, 1.0, internal, {}};
        if (internal) {
            for (const auto &l : chunk)
                res.mps = apply_internal_gates(std::move(res.mps), l);
        } else {
            auto c = compress_step(res.mps, chunk, config);
            res.mps = std::move(c.mps);
            rec.f = c.f_delta;
            rec.trace = std::move(c.trace);
        }
        res.F_tilde *= rec.f;
        if (observer)
            observer(rec, res.mps);
        res.steps.push_back(std::move(rec));
    }
    res.eps_tilde = rate(res.F_tilde, res.n_2g);
    return res;
}

ClosedConfig ClosedConfig::with_defaults(std::size_t depth, const CompressionConfig &cfg,
                                         std::size_t D2) {
    ClosedConfig c;
    c.forward = c.backward = cfg;
    c.D2 = std::min(depth, D2 == 0 ? cfg.K : D2);
    c.D1 = (depth - c.D2 + 1) / 2;
    c.D3 = depth - c.D2 - c.D1;
    return c;
}

void ClosedConfig::validate(std::size_t depth) const {
    if (D1 + D2 + D3 != depth)
        fail("D1 + D2 + D3 = " + std::to_string(D1 + D2 + D3) + " but the circuit depth is " +
             std::to_string(depth) + " (the partition must cover the circuit exactly)");
    forward.validate();
    backward.validate();
}

namespace {

std::vector<Layer> layer_range(const Circuit &c, std::size_t begin, std::size_t end) {
    return c.slice(begin, end).layers();
}

} // namespace

double sandwich_cost(const GroupedMPS &bra, const std::vector<Layer> &layers, const GroupedMPS &ket) {
    const Grouping &g = ket.grouping();
    const std::size_t m = g.size();
    // product of operator-Schmidt ranks crossing each bond
    std::vector<double> wires(m + 1, 1.0);
    for (const auto &l : layers)
        for (const auto &gate : l.gates) {
            if (is_internal(g, gate))
                continue;
            const auto a = g.group_of(gate.targets()[0]), b = g.group_of(gate.targets()[1]);
            const double rank = static_cast<double>(operator_schmidt(gate).size());
            for (std::size_t bond = std::min(a, b); bond < std::max(a, b); ++bond)
                wires[bond + 1] *= rank;
        }
    double worst = 0.0;
    for (std::size_t tau = 0; tau < m; ++tau) {
        const double chi_b = static_cast<double>(std::max(bra.tensor(tau).dim(0), bra.tensor(tau).dim(2)));
        const double chi_k = static_cast<double>(std::max(ket.tensor(tau).dim(0), ket.tensor(tau).dim(2)));
        const double d = static_cast<double>(ket.tensor(tau).dim(1));
        worst = std::max(worst, chi_b * chi_k * d * wires[tau] * wires[tau + 1]);
    }
    return worst;
}

cplx sandwich(const GroupedMPS &bra, const std::vector<Layer> &layers, const GroupedMPS &ket) {
    if (!(bra.grouping() == ket.grouping()))
        fail("sandwich needs identical groupings");
    const CompressionNetwork net(ket, layers);
    auto env = net.boundary();
    for (std::size_t tau = 0; tau < net.size(); ++tau)
        env = CompressionNetwork::next_left(net.column_from_left(tau, env), bra.tensor(tau));
    return env.t[0];
}

ForwardCache run_forward(const Circuit &circuit, const Grouping &grouping, const ClosedConfig &cfg) {
    cfg.validate(circuit.depth());
    const Circuit part = circuit.slice(0, cfg.D1);
    auto res = run_open(part, grouping, cfg.forward);
    return {std::move(res.mps), res.F_tilde, part.two_qubit_count()};
}

std::vector<ClosedRunResult> run_closed_batch(const ForwardCache &forward, const Circuit &circuit,
                                              const std::vector<Bitstring> &xs,
                                              const ClosedConfig &cfg) {
    cfg.validate(circuit.depth());
    const std::size_t D = circuit.depth();
    const Circuit back = circuit.slice(D - cfg.D3, D).adjoint();
    const auto middle = layer_range(circuit, cfg.D1, cfg.D1 + cfg.D2);
    const std::size_t n_2g = circuit.two_qubit_count();
    const std::size_t n_2g_approx = forward.n_2g + back.two_qubit_count();
    const Grouping &grouping = forward.mps.grouping();

    std::vector<ClosedRunResult> out;
    out.reserve(xs.size());
    for (const auto &x : xs) {
        if (x.size() != circuit.n_qubits())
            fail("bitstring length does not match qubit count");
        auto bwd = run_open(back, GroupedMPS::product_state(grouping, x), cfg.backward);
        const double cost = sandwich_cost(bwd.mps, middle, forward.mps);
        if (cost > static_cast<double>(cfg.max_middle_elements))
            fail("middle section of D2 = " + std::to_string(cfg.D2) +
                 " layers needs ~" + std::to_string(static_cast<long long>(cost)) +
                 " entries, above the limit of " + std::to_string(cfg.max_middle_elements));
        const cplx amp = sandwich(bwd.mps, middle, forward.mps);
        const double F = forward.F_tilde * bwd.F_tilde;
        out.push_back({x, amp, F, forward.F_tilde, bwd.F_tilde, rate(F, n_2g),
                       rate(F, n_2g_approx), n_2g, n_2g_approx, std::move(bwd.mps)});
    }
    return out;
}

ClosedRunResult run_closed(const Circuit &circuit, const Bitstring &x, const Grouping &grouping,
                           const ClosedConfig &cfg) {
    return run_closed_batch(run_forward(circuit, grouping, cfg), circuit, {x}, cfg).front();
}

} // namespace qcdmrg
