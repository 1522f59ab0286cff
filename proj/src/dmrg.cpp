#include "qcdmrg/dmrg.hpp"

#include "qcdmrg/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace qcdmrg {

namespace {

[[noreturn]] void fail(const std::string &what) { throw Error("dmrg-compress", what); }

std::vector<std::size_t> iota(std::size_t n, std::size_t from = 0) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), from);
    return v;
}

} // namespace

void CompressionConfig::validate() const {
    if (chi < 1)
        fail("chi must be >= 1");
    if (K < 1)
        fail("K must be >= 1");
    if (n_s < 1)
        fail("n_s must be >= 1");
    if (convergence_tol && !(*convergence_tol >= 0.0))
        fail("convergence tolerance must be non-negative");
}

bool SweepTrace::non_decreasing(double rel_tol) const {
    for (std::size_t i = 1; i < entries.size(); ++i)
        if (entries[i].f < entries[i - 1].f * (1.0 - rel_tol) - 1e-14)
            return false;
    return true;
}

double SweepTrace::initial_f() const { return entries.empty() ? 0.0 : entries.front().f; }
double SweepTrace::final_f() const { return entries.empty() ? 0.0 : entries.back().f; }

void write_trace_header(std::ostream &out) { out << "step,sweep,tau,f,epsilon\n"; }

void write_trace_rows(std::ostream &out, std::size_t step, const SweepTrace &trace) {
    const auto old = out.precision(17);
    for (const auto &e : trace.entries)
        out << step << ',' << e.sweep << ',' << e.tau << ',' << e.f << ',' << 1.0 - e.f << '\n';
    out.precision(old);
}

CompressionNetwork::CompressionNetwork(const GroupedMPS &source, const std::vector<Layer> &layers)
    : source_(source) {
    for (const auto &l : layers)
        gates_.insert(gates_.end(), l.gates.begin(), l.gates.end());
    const Grouping &g = source_.grouping();
    for (const auto &gate : gates_) {
        for (auto q : gate.targets())
            if (q >= source_.n_qubits())
                fail("gate target out of range");
        GateInfo info{&gate, is_internal(g, gate), 0, 0, 0, 0, {}, {}};
        if (info.internal) {
            info.tau_l = info.tau_r = g.group_of(gate.targets()[0]);
        } else {
            const auto &t = gate.targets();
            const bool first_left = g.group_of(t[0]) < g.group_of(t[1]);
            info.q_l = first_left ? t[0] : t[1];
            info.q_r = first_left ? t[1] : t[0];
            info.tau_l = g.group_of(info.q_l);
            info.tau_r = g.group_of(info.q_r);
            for (const auto &p : operator_schmidt(gate)) {
                info.op_l.push_back(first_left ? p.first : p.second);
                info.op_r.push_back(first_left ? p.second : p.first);
            }
        }
        info_.push_back(std::move(info));
    }
}

CompressionNetwork::Env CompressionNetwork::boundary() const {
    return {DenseTensor(Shape{1, 1}, {cplx{1.0, 0.0}}), {}};
}

CompressionNetwork::Env CompressionNetwork::process(std::size_t tau, Env t, Direction dir) const {
    const Grouping &g = source_.grouping();
    const int nbits = static_cast<int>(g.group_size(tau));
    const std::size_t d = std::size_t{1} << nbits;

    auto extents = [&]() {
        const std::size_t n = t.wires.size();
        const std::size_t inner = t.t.dim(n + 2);
        return std::pair{t.t.size() / (d * inner), inner};
    };
    auto apply_gate = [&](const Gate &gate) {
        const auto [outer, inner] = extents();
        const int p0 = static_cast<int>(g.position_of(gate.targets()[0]));
        if (gate.arity() == 1)
            apply_one_qubit(t.t.data(), outer, nbits, inner, p0, gate.mat2());
        else
            apply_two_qubit(t.t.data(), outer, nbits, inner, p0,
                            static_cast<int>(g.position_of(gate.targets()[1])), gate.mat4());
    };
    // New wire in front: T'[k, ...] = op_k T.
    auto create = [&](std::size_t id, const std::vector<Mat2> &ops, Qubit q) {
        const std::size_t K = ops.size(), slice = t.t.size();
        Shape dims{K};
        dims.insert(dims.end(), t.t.dims().begin(), t.t.dims().end());
        DenseTensor out(dims);
        const auto [outer, inner] = extents();
        for (std::size_t k = 0; k < K; ++k) {
            std::span<cplx> part = out.data().subspan(k * slice, slice);
            std::copy(t.t.data().begin(), t.t.data().end(), part.begin());
            apply_one_qubit(part, outer, nbits, inner, static_cast<int>(g.position_of(q)), ops[k]);
        }
        t.t = std::move(out);
        t.wires.insert(t.wires.begin(), id);
    };
    // Close a wire: T' = sum_k op_k T[k, ...].
    auto consume = [&](std::size_t id, const std::vector<Mat2> &ops, Qubit q) {
        const auto it = std::find(t.wires.begin(), t.wires.end(), id);
        if (it == t.wires.end())
            fail("environment is missing a gate wire");
        const std::size_t p = static_cast<std::size_t>(it - t.wires.begin());
        if (p != 0) {
            std::vector<std::size_t> perm{p};
            for (std::size_t a = 0; a < t.t.rank(); ++a)
                if (a != p)
                    perm.push_back(a);
            t.t = permute(t.t, perm);
        }
        t.wires.erase(t.wires.begin() + static_cast<std::ptrdiff_t>(p));
        const std::size_t K = ops.size(), slice = t.t.size() / K;
        Shape dims(t.t.dims().begin() + 1, t.t.dims().end());
        DenseTensor out(dims);
        const std::size_t inner = dims.back();
        const std::size_t outer = slice / (d * inner);
        std::vector<cplx> buf(slice);
        for (std::size_t k = 0; k < K; ++k) {
            std::copy_n(t.t.data().data() + k * slice, slice, buf.begin());
            apply_one_qubit(buf, outer, nbits, inner, static_cast<int>(g.position_of(q)), ops[k]);
            for (std::size_t i = 0; i < slice; ++i)
                out[i] += buf[i];
        }
        t.t = std::move(out);
    };

    // Wire creation commutes with later operations on other qubits of this
    // group, so it is deferred to keep the open-wire count low.
    struct Pending {
        std::size_t id;
        const std::vector<Mat2> *ops;
        Qubit q;
    };
    std::vector<Pending> pending;
    auto flush_if = [&](const std::vector<Qubit> &qs) {
        bool hit = false;
        for (const auto &p : pending)
            for (auto q : qs)
                hit |= p.q == q;
        if (!hit)
            return;
        for (const auto &p : pending)
            create(p.id, *p.ops, p.q);
        pending.clear();
    };

    const bool ltr = dir == Direction::LeftToRight;
    for (std::size_t id = 0; id < info_.size(); ++id) {
        const GateInfo &gi = info_[id];
        if (tau < gi.tau_l || tau > gi.tau_r)
            continue;
        if (gi.internal) {
            flush_if(gi.gate->targets());
            apply_gate(*gi.gate);
            continue;
        }
        const bool at_l = tau == gi.tau_l, at_r = tau == gi.tau_r;
        if (!at_l && !at_r)
            continue; // wire passes through this group
        const bool consuming = ltr ? at_r : at_l;
        const Qubit q = at_l ? gi.q_l : gi.q_r;
        const auto &ops = at_l ? gi.op_l : gi.op_r;
        if (consuming) {
            flush_if({q});
            consume(id, ops, q);
        } else {
            flush_if({q});
            pending.push_back({id, &ops, q});
        }
    }
    for (const auto &p : pending)
        create(p.id, *p.ops, p.q);

    // Canonical wire order.
    const std::size_t n = t.wires.size();
    std::vector<std::size_t> order = iota(n);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return t.wires[a] < t.wires[b]; });
    if (!std::is_sorted(t.wires.begin(), t.wires.end())) {
        std::vector<std::size_t> perm = order;
        for (std::size_t a = n; a < t.t.rank(); ++a)
            perm.push_back(a);
        t.t = permute(t.t, perm);
        std::vector<std::size_t> w;
        for (auto i : order)
            w.push_back(t.wires[i]);
        t.wires = std::move(w);
    }
    return t;
}

CompressionNetwork::Env CompressionNetwork::column_from_left(std::size_t tau, const Env &left) const {
    const std::size_t n = left.wires.size();
    Env t{contract(left.t, source_.tensor(tau), {{n + 1, 0}}), left.wires};
    return process(tau, std::move(t), Direction::LeftToRight);
}

CompressionNetwork::Env CompressionNetwork::column_from_right(std::size_t tau, const Env &right) const {
    const std::size_t n = right.wires.size();
    std::vector<std::size_t> perm = iota(n + 1);
    perm.push_back(n + 2);
    perm.push_back(n + 1);
    Env t{permute(contract(right.t, source_.tensor(tau), {{n + 1, 2}}), perm), right.wires};
    return process(tau, std::move(t), Direction::RightToLeft);
}

DenseTensor CompressionNetwork::env_from_left(const Env &column, const Env &right) {
    if (column.wires != right.wires)
        fail("wire mismatch between column and right environment");
    const std::size_t n = column.wires.size();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        pairs.emplace_back(i, i);
    pairs.emplace_back(n + 2, n + 1);
    return contract(column.t, right.t, pairs);
}

DenseTensor CompressionNetwork::env_from_right(const Env &left, const Env &column) {
    if (column.wires != left.wires)
        fail("wire mismatch between left environment and column");
    const std::size_t n = column.wires.size();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        pairs.emplace_back(i, i);
    pairs.emplace_back(n + 1, n + 2);
    return permute(contract(left.t, column.t, pairs), {0, 2, 1});
}

CompressionNetwork::Env CompressionNetwork::next_left(const Env &column, const DenseTensor &target) {
    const std::size_t n = column.wires.size();
    std::vector<std::size_t> perm = iota(n);
    perm.push_back(n + 1);
    perm.push_back(n);
    return {permute(contract(column.t, conj(target), {{n, 0}, {n + 1, 1}}), perm), column.wires};
}

CompressionNetwork::Env CompressionNetwork::next_right(const Env &column, const DenseTensor &target) {
    const std::size_t n = column.wires.size();
    std::vector<std::size_t> perm = iota(n);
    perm.push_back(n + 1);
    perm.push_back(n);
    return {permute(contract(column.t, conj(target), {{n, 2}, {n + 1, 1}}), perm), column.wires};
}

DenseTensor build_environment(const GroupedMPS &target, const GroupedMPS &source,
                              const std::vector<Layer> &layers, std::size_t tau) {
    if (!(target.grouping() == source.grouping()))
        fail("target and source groupings differ");
    if (target.ortho_center() != tau)
        fail("target must be canonical at tau");
    const CompressionNetwork net(source, layers);
    auto left = net.boundary();
    for (std::size_t i = 0; i < tau; ++i)
        left = CompressionNetwork::next_left(net.column_from_left(i, left), target.tensor(i));
    auto right = net.boundary();
    for (std::size_t i = net.size() - 1; i > tau; --i)
        right = CompressionNetwork::next_right(net.column_from_right(i, right), target.tensor(i));
    return CompressionNetwork::env_from_left(net.column_from_left(tau, left), right);
}

TensorUpdate update_tensor(const DenseTensor &F) {
    const double f = norm2(F);
    if (!(f > 0.0) || !std::isfinite(f))
        fail("environment tensor vanishes; target is orthogonal to the evolved state");
    return {cplx{1.0 / std::sqrt(f), 0.0} * F, f};
}

GroupedMPS init_guess(const GroupedMPS &source, const std::vector<Layer> &layers,
                      const CompressionConfig &config) {
    config.validate();
    if (config.init == InitStrategy::RandomMPS)
        return GroupedMPS::random(source.grouping(), config.chi, config.init_seed);
    GroupedMPS mps = source;
    for (const auto &l : layers)
        for (const auto &g : l.gates)
            mps.apply_truncated(g, config.chi);
    mps.move_center(0);
    mps.normalize();
    return mps;
}

CompressionResult compress_step(const GroupedMPS &source, const std::vector<Layer> &layers,
                                const CompressionConfig &config) {
    return compress_step(source, layers, config, init_guess(source, layers, config));
}

CompressionResult compress_step(const GroupedMPS &source, const std::vector<Layer> &layers,
                                const CompressionConfig &config, GroupedMPS target) {
    config.validate();
    if (!(target.grouping() == source.grouping()))
        fail("initial guess and source groupings differ");
    const CompressionNetwork net(source, layers);
    const std::size_t m = net.size();
    target.move_center(0);
    target.normalize();

    SweepTrace trace;
    auto record = [&](std::size_t sweep, std::size_t tau, double f) {
        if (!trace.entries.empty()) {
            const double prev = trace.entries.back().f;
            if (f < prev * (1.0 - 1e-10) - 1e-14)
                fail("sweep fidelity decreased from " + std::to_string(prev) + " to " +
                     std::to_string(f));
        }
        trace.entries.push_back({sweep, tau, f});
    };

    std::vector<CompressionNetwork::Env> left(m), right(m);
    left[0] = right[m - 1] = net.boundary();
    for (std::size_t i = m - 1; i > 0; --i)
        right[i - 1] = CompressionNetwork::next_right(net.column_from_right(i, right[i]), target.tensor(i));

    double last_sweep_f = -1.0;
    for (std::size_t sweep = 1; sweep <= config.n_s; ++sweep) {
        for (std::size_t tau = 0; tau < m; ++tau) {
            const auto column = net.column_from_left(tau, left[tau]);
            const DenseTensor F = CompressionNetwork::env_from_left(column, right[tau]);
            if (trace.entries.empty())
                record(0, 0, std::norm(inner(target.tensor(0), F)));
            auto up = update_tensor(F);
            record(sweep, tau, up.f);
            if (tau + 1 < m) {
                auto qr = split_qr(up.m, {0, 1});
                DenseTensor next = contract(qr.r, target.tensor(tau + 1), {{1, 0}});
                target.set_pair(tau, std::move(qr.q), std::move(next), tau + 1);
                left[tau + 1] = CompressionNetwork::next_left(column, target.tensor(tau));
            } else {
                target.set_tensor(tau, std::move(up.m), true);
            }
        }
        auto column = m > 1 ? net.column_from_right(m - 1, right[m - 1]) : CompressionNetwork::Env{};
        for (std::size_t tau = m - 1; tau-- > 0;) {
            // move the center from tau + 1 to tau
            auto qr = split_qr(permute(target.tensor(tau + 1), {1, 2, 0}), {0, 1});
            DenseTensor prev = contract(target.tensor(tau), qr.r, {{2, 1}});
            target.set_pair(tau, std::move(prev), permute(qr.q, {2, 0, 1}), tau);
            right[tau] = CompressionNetwork::next_right(column, target.tensor(tau + 1));
            column = net.column_from_right(tau, right[tau]);
            auto up = update_tensor(CompressionNetwork::env_from_right(left[tau], column));
            record(sweep, tau, up.f);
            target.set_tensor(tau, std::move(up.m), true);
        }
        const double f = trace.final_f();
        if (config.convergence_tol && last_sweep_f > 0.0 &&
            std::abs(f - last_sweep_f) <= *config.convergence_tol * f)
            break;
        last_sweep_f = f;
    }
    target.set_ortho_center(0);
    target.normalize();
    const double f_delta = trace.final_f();
    return {std::move(target), f_delta, std::move(trace)};
}

} // namespace qcdmrg
