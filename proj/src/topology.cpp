#include "qcdmrg/topology.hpp"

#include "qcdmrg/error.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numbers>
#include <random>

namespace qcdmrg {

namespace {

[[noreturn]] void fail(const std::string &what) { throw Error("circuit", what); }

} // namespace

char coupler_letter(Coupler c) { return static_cast<char>('A' + static_cast<int>(c)); }

Coupler coupler_from_letter(char c) {
    if (c < 'A' || c > 'D')
        fail(std::string("unknown coupler '") + c + "'");
    return static_cast<Coupler>(c - 'A');
}

GridTopology::GridTopology(std::size_t n_b, std::size_t n_c, bool uniform_columns)
    : n_b_(n_b), n_c_(n_c), uniform_(uniform_columns) {
    if (n_b < 2 || n_c < 2 || n_c % 2 != 0)
        fail("topology needs n_b >= 2 and an even n_c >= 2");

    for (std::size_t c = 0; c < n_c_; ++c) {
        column_start_.push_back(column_of_.size());
        for (std::size_t r = 0; r < column_height(c); ++r) {
            column_of_.push_back(c);
            row_of_.push_back(r);
        }
    }
    neighbors_.resize(n_qubits());
    for (std::size_t c = 0; c + 1 < n_c_; ++c) {
        for (std::size_t r = 0; r < column_height(c); ++r) {
            const Qubit q = qubit_at(c, r);
            const std::size_t y = y_of(q);
            for (std::size_t r2 = 0; r2 < column_height(c + 1); ++r2) {
                const Qubit p = qubit_at(c + 1, r2);
                const std::size_t y2 = y_of(p);
                if (y2 + 1 == y || y + 1 == y2) {
                    const Edge e{q, p};
                    edges_.push_back(e);
                    couplers_[static_cast<std::size_t>(coupler_of(e))].push_back(e);
                    neighbors_[q].push_back(p);
                    neighbors_[p].push_back(q);
                }
            }
        }
    }
    for (auto &n : neighbors_)
        std::sort(n.begin(), n.end());
}

std::size_t GridTopology::column_height(std::size_t c) const {
    if (c >= n_c_)
        fail("column out of range");
    return (uniform_ || c % 2 == 0) ? n_b_ : n_b_ - 1;
}

Qubit GridTopology::qubit_at(std::size_t column, std::size_t row) const {
    if (row >= column_height(column))
        fail("row out of range");
    return static_cast<Qubit>(column_start_[column] + row);
}

std::size_t GridTopology::y_of(Qubit q) const {
    return 2 * row_of(q) + (column_of(q) % 2);
}

Coupler GridTopology::coupler_of(const Edge &e) const {
    const std::size_t c = column_of(e.left);
    const bool up = y_of(e.right) == y_of(e.left) + 1;
    if (c % 2 == 0)
        return up ? Coupler::A : Coupler::C;
    return up ? Coupler::B : Coupler::D;
}

bool GridTopology::adjacent(Qubit a, Qubit b) const {
    const auto &n = neighbors_.at(a);
    return std::binary_search(n.begin(), n.end(), b);
}

std::vector<Qubit> GridTopology::shortest_path(Qubit a, Qubit b) const {
    const std::size_t n = n_qubits();
    if (a >= n || b >= n)
        fail("path endpoint out of range");
    std::vector<std::int64_t> prev(n, -1);
    std::deque<Qubit> queue{a};
    prev[a] = a;
    while (!queue.empty()) {
        const Qubit q = queue.front();
        queue.pop_front();
        if (q == b)
            break;
        for (auto p : neighbors_[q]) {
            if (prev[p] < 0) {
                prev[p] = q;
                queue.push_back(p);
            }
        }
    }
    if (prev[b] < 0)
        fail("qubits are not connected");
    std::vector<Qubit> path{b};
    while (path.back() != a)
        path.push_back(static_cast<Qubit>(prev[path.back()]));
    std::reverse(path.begin(), path.end());
    return path;
}

GridTopology build_topology(std::size_t n_b, std::size_t n_c, bool uniform_columns) {
    return GridTopology(n_b, n_c, uniform_columns);
}

Grouping::Grouping(std::string name, std::vector<std::vector<Qubit>> groups)
    : name_(std::move(name)), groups_(std::move(groups)) {
    std::size_t n = 0;
    for (const auto &g : groups_) {
        if (g.empty())
            fail("grouping '" + name_ + "' has an empty group");
        n += g.size();
    }
    group_of_.assign(n, n);
    position_of_.assign(n, 0);
    for (std::size_t tau = 0; tau < groups_.size(); ++tau) {
        for (std::size_t i = 0; i < groups_[tau].size(); ++i) {
            const Qubit q = groups_[tau][i];
            if (q >= n)
                fail("grouping '" + name_ + "' does not cover qubits 0..N-1");
            if (group_of_[q] != n)
                fail("qubit " + std::to_string(q) + " appears twice in grouping '" + name_ + "'");
            group_of_[q] = tau;
            position_of_[q] = i;
        }
    }
}

std::vector<std::size_t> Grouping::sizes() const {
    std::vector<std::size_t> s;
    for (const auto &g : groups_)
        s.push_back(g.size());
    return s;
}

Grouping single_qubit_grouping(std::size_t n_qubits) {
    std::vector<std::vector<Qubit>> groups;
    for (std::size_t q = 0; q < n_qubits; ++q)
        groups.push_back({static_cast<Qubit>(q)});
    return Grouping("single", std::move(groups));
}

Grouping contiguous_grouping(const std::vector<std::size_t> &sizes, std::string name) {
    std::vector<std::vector<Qubit>> groups;
    Qubit next = 0;
    for (auto s : sizes) {
        std::vector<Qubit> g;
        for (std::size_t i = 0; i < s; ++i)
            g.push_back(next++);
        groups.push_back(std::move(g));
    }
    return Grouping(std::move(name), std::move(groups));
}

namespace {

Grouping from_columns(const GridTopology &topo, const std::vector<std::size_t> &col_counts,
                      std::string name) {
    std::vector<std::vector<Qubit>> groups;
    std::size_t c = 0;
    for (auto count : col_counts) {
        std::vector<Qubit> g;
        for (std::size_t k = 0; k < count; ++k, ++c)
            for (std::size_t r = 0; r < topo.column_height(c); ++r)
                g.push_back(topo.qubit_at(c, r));
        groups.push_back(std::move(g));
    }
    return Grouping(std::move(name), std::move(groups));
}

std::optional<std::vector<std::size_t>> vertical_layout(std::size_t n_c, int parity,
                                                        std::size_t n_groups) {
    if (n_groups < 2 || 2 * (n_groups - 2) >= n_c)
        return std::nullopt;
    const std::size_t rest = n_c - 2 * (n_groups - 2);
    // First group ends on a column of the boundary parity: its width a has
    // a - 1 == parity (mod 2).
    std::optional<std::size_t> first;
    for (std::size_t a = 1; a < rest; ++a) {
        if ((a - 1) % 2 != static_cast<std::size_t>(parity))
            continue;
        if (a <= (rest + 1) / 2)
            first = a;
    }
    if (!first)
        return std::nullopt;
    std::vector<std::size_t> cols{*first};
    for (std::size_t i = 0; i + 2 < n_groups; ++i)
        cols.push_back(2);
    cols.push_back(rest - *first);
    return cols;
}

Grouping keyed_grouping(const GridTopology &topo, const std::string &name,
                        const std::vector<std::int64_t> &key, std::size_t max_groups) {
    std::map<std::int64_t, std::vector<Qubit>> lines;
    for (Qubit q = 0; q < topo.n_qubits(); ++q)
        lines[key[q]].push_back(q);
    const std::size_t m = std::min(max_groups, lines.size());
    const double target = static_cast<double>(topo.n_qubits()) / static_cast<double>(m);
    std::vector<std::vector<Qubit>> groups(1);
    std::size_t placed = 0;
    std::size_t lines_left = lines.size();
    for (auto &[k, qs] : lines) {
        const std::size_t groups_after = m - groups.size();
        const bool full = static_cast<double>(placed) >= target * static_cast<double>(groups.size());
        if (!groups.back().empty() && groups_after > 0 && (full || lines_left <= groups_after))
            groups.emplace_back();
        groups.back().insert(groups.back().end(), qs.begin(), qs.end());
        placed += qs.size();
        --lines_left;
    }
    for (auto &g : groups)
        std::sort(g.begin(), g.end());
    return Grouping(name, std::move(groups));
}

} // namespace

Grouping vertical_grouping(const GridTopology &topo, int boundary_parity, std::size_t n_groups) {
    auto cols = vertical_layout(topo.n_c(), boundary_parity, n_groups);
    if (!cols)
        fail("no vertical grouping with " + std::to_string(n_groups) + " groups fits " +
             std::to_string(topo.n_c()) + " columns");
    return from_columns(topo, *cols, boundary_parity == 0 ? "V1" : "V2");
}

Grouping standard_grouping(const GridTopology &topo, const std::string &name) {
    const std::size_t n = topo.n_qubits();
    if (name == "V1" || name == "V2") {
        const int parity = name == "V1" ? 0 : 1;
        std::size_t m = topo.n_c() >= 12 ? 3 + (topo.n_c() - 12) / 2 : 3;
        for (; m >= 2; --m)
            if (auto cols = vertical_layout(topo.n_c(), parity, m))
                return from_columns(topo, *cols, name);
        fail("grouping " + name + " is incompatible with " + std::to_string(topo.n_c()) +
             " columns");
    }
    std::vector<std::int64_t> key(n);
    for (Qubit q = 0; q < n; ++q) {
        const auto y = static_cast<std::int64_t>(topo.y_of(q));
        const auto c = static_cast<std::int64_t>(topo.column_of(q));
        if (name == "H1")
            key[q] = y / 2;
        else if (name == "H2")
            key[q] = (y + 1) / 2;
        else if (name == "D1")
            key[q] = y - c;
        else if (name == "D2")
            key[q] = y + c;
        else
            fail("unknown grouping '" + name + "'; valid names: V1, V2, H1, H2, D1, D2");
    }
    if (name[0] == 'H')
        return keyed_grouping(topo, name, key, n);
    return keyed_grouping(topo, name, key, 4);
}

std::vector<Coupler> coupler_pattern(int sequence, std::size_t depth) {
    using enum Coupler;
    static const std::vector<Coupler> seq1{A, B, C, D, C, D, A, B};
    static const std::vector<Coupler> seq2{C, D, B, A, B, A, C, D};
    const auto &base = sequence == 1 ? seq1 : sequence == 2 ? seq2 : throw Error("circuit", "sequence must be 1 or 2");
    std::vector<Coupler> out;
    for (std::size_t d = 0; d < depth; ++d)
        out.push_back(base[d % base.size()]);
    return out;
}

Circuit supremacy_sequence(const GridTopology &topo, std::size_t depth, std::uint64_t seed,
                           const std::vector<Coupler> &pattern) {
    if (depth == 0)
        fail("depth must be >= 1");
    if (pattern.size() < depth)
        fail("coupler pattern shorter than depth");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, 2);
    static constexpr GateKind kOneQubit[3] = {GateKind::SqrtX, GateKind::SqrtY, GateKind::SqrtW};
    const std::vector<double> fsim_params{1.0, std::numbers::pi / 2.0};

    Circuit circuit(topo.n_qubits());
    for (std::size_t d = 0; d < depth; ++d) {
        Layer layer;
        for (Qubit q = 0; q < topo.n_qubits(); ++q)
            layer.gates.emplace_back(kOneQubit[pick(rng)], std::vector<Qubit>{q});
        for (const auto &e : topo.couplers(pattern[d]))
            layer.gates.emplace_back(GateKind::FSim, std::vector<Qubit>{e.left, e.right},
                                     fsim_params);
        circuit.add_layer(std::move(layer));
    }
    return circuit;
}

Circuit sequence_I(const GridTopology &topo, std::size_t depth, std::uint64_t seed) {
    return supremacy_sequence(topo, depth, seed, coupler_pattern(1, depth));
}

Circuit sequence_II(const GridTopology &topo, std::size_t depth, std::uint64_t seed) {
    return supremacy_sequence(topo, depth, seed, coupler_pattern(2, depth));
}

std::vector<std::pair<Qubit, Qubit>> erdos_renyi_edges(std::size_t n, double p, std::uint64_t seed) {
    if (!(p > 0.0 && p < 1.0))
        fail("edge probability must lie in (0, 1)");
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(p);
    std::vector<std::pair<Qubit, Qubit>> edges;
    for (Qubit i = 0; i < n; ++i)
        for (Qubit j = i + 1; j < n; ++j)
            if (coin(rng))
                edges.emplace_back(i, j);
    return edges;
}

namespace {

// ASAP packing of an ordered gate list into layers of qubit-disjoint gates.
std::vector<Layer> pack_layers(const std::vector<Gate> &gates, std::size_t n_qubits) {
    std::vector<std::size_t> frontier(n_qubits, 0);
    std::vector<Layer> layers;
    for (const auto &g : gates) {
        std::size_t slot = 0;
        for (auto q : g.targets())
            slot = std::max(slot, frontier[q]);
        if (slot >= layers.size())
            layers.resize(slot + 1);
        layers[slot].gates.push_back(g);
        for (auto q : g.targets())
            frontier[q] = slot + 1;
    }
    return layers;
}

} // namespace

Circuit sequence_III(const QaoaConfig &cfg) {
    if (cfg.p_layers < 1)
        fail("QAOA needs p_layers >= 1");
    if (cfg.betas.size() != cfg.p_layers || cfg.gammas.size() != cfg.p_layers)
        fail("QAOA needs one beta and one gamma per layer");
    const auto graph = erdos_renyi_edges(cfg.n_qubits, cfg.edge_prob, cfg.seed);

    std::size_t n_physical = cfg.n_qubits;
    if (cfg.compile_to) {
        n_physical = cfg.compile_to->n_qubits();
        if (cfg.n_qubits > n_physical)
            fail("graph has more vertices than the target topology has qubits");
    }
    // logical -> physical and its inverse
    std::vector<Qubit> phys(cfg.n_qubits), logical(n_physical);
    for (Qubit q = 0; q < n_physical; ++q) {
        if (q < cfg.n_qubits)
            phys[q] = q;
        logical[q] = q;
    }

    Circuit circuit(n_physical);
    Layer hadamards;
    for (Qubit q = 0; q < cfg.n_qubits; ++q)
        hadamards.gates.emplace_back(GateKind::Hadamard, std::vector<Qubit>{q});
    circuit.add_layer(std::move(hadamards));

    for (std::size_t k = 0; k < cfg.p_layers; ++k) {
        std::vector<Gate> gates;
        for (auto [u, v] : graph) {
            if (cfg.compile_to) {
                const auto &topo = *cfg.compile_to;
                if (!topo.adjacent(phys[u], phys[v])) {
                    const auto path = topo.shortest_path(phys[u], phys[v]);
                    for (std::size_t i = 0; i + 2 < path.size(); ++i) {
                        const Qubit a = path[i], b = path[i + 1];
                        gates.emplace_back(GateKind::Swap, std::vector<Qubit>{a, b});
                        std::swap(logical[a], logical[b]);
                        if (logical[a] < cfg.n_qubits)
                            phys[logical[a]] = a;
                        if (logical[b] < cfg.n_qubits)
                            phys[logical[b]] = b;
                    }
                }
                if (!topo.adjacent(phys[u], phys[v]))
                    fail("routing failed to make qubits adjacent");
            }
            gates.emplace_back(GateKind::ZZPhase, std::vector<Qubit>{phys[u], phys[v]},
                               std::vector<double>{cfg.gammas[k]});
        }
        for (auto &l : pack_layers(gates, n_physical))
            circuit.add_layer(std::move(l));
        Layer mixer;
        for (Qubit q = 0; q < cfg.n_qubits; ++q)
            mixer.gates.emplace_back(GateKind::RotationX, std::vector<Qubit>{phys[q]},
                                     std::vector<double>{cfg.betas[k]});
        circuit.add_layer(std::move(mixer));
    }
    return circuit;
}

} // namespace qcdmrg
