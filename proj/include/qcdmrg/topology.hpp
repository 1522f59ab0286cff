#pragma once

#include "qcdmrg/circuit.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qcdmrg {

enum class Coupler { A = 0, B = 1, C = 2, D = 3 };

char coupler_letter(Coupler c);
Coupler coupler_from_letter(char c);

/// Nearest-neighbor pair; `left` lives in column c, `right` in column c + 1.
struct Edge {
    Qubit left;
    Qubit right;
    bool operator==(const Edge &) const = default;
};

/// Sycamore-like planar lattice. Columns are numbered left to right and
/// alternately hold n_b and n_b - 1 qubits (or n_b everywhere when built
/// with uniform columns). Qubit ids run column-major, bottom to top.
///
/// Each qubit has a half-integer row coordinate y: row r of an even column
/// sits at y = 2r and row r of an odd column at y = 2r + 1. Neighbors sit
/// in adjacent columns at y +- 1, so every edge is a diagonal.
///
/// Coupler classes (frozen convention):
///   A: left column even, edge goes up   (y_right = y_left + 1)
///   B: left column odd,  edge goes up
///   C: left column even, edge goes down (y_right = y_left - 1)
///   D: left column odd,  edge goes down
/// With this rule B, D never cross an even|odd column boundary and A, D
/// always join rows {2k, 2k+1}, which gives the trivial-layer structure of
/// the vertical and horizontal groupings.
class GridTopology {
  public:
    GridTopology(std::size_t n_b, std::size_t n_c, bool uniform_columns = false);

    std::size_t n_b() const noexcept { return n_b_; }
    std::size_t n_c() const noexcept { return n_c_; }
    bool uniform_columns() const noexcept { return uniform_; }
    std::size_t n_qubits() const noexcept { return column_of_.size(); }

    std::size_t column_height(std::size_t c) const;
    Qubit qubit_at(std::size_t column, std::size_t row) const;
    std::size_t column_of(Qubit q) const { return column_of_.at(q); }
    std::size_t row_of(Qubit q) const { return row_of_.at(q); }
    std::size_t y_of(Qubit q) const;

    const std::vector<Edge> &edges() const noexcept { return edges_; }
    const std::vector<Edge> &couplers(Coupler c) const {
        return couplers_.at(static_cast<std::size_t>(c));
    }
    Coupler coupler_of(const Edge &e) const;
    bool adjacent(Qubit a, Qubit b) const;
    const std::vector<Qubit> &neighbors(Qubit q) const { return neighbors_.at(q); }

    /// Shortest path a -> b (inclusive) through the coupling graph.
    std::vector<Qubit> shortest_path(Qubit a, Qubit b) const;

  private:
    std::size_t n_b_, n_c_;
    bool uniform_;
    std::vector<std::size_t> column_start_;
    std::vector<std::size_t> column_of_, row_of_;
    std::vector<Edge> edges_;
    std::array<std::vector<Edge>, 4> couplers_;
    std::vector<std::vector<Qubit>> neighbors_;
};

GridTopology build_topology(std::size_t n_b, std::size_t n_c, bool uniform_columns = false);

/// Ordered partition of qubits into MPS groups. Within a group the physical
/// index is row-major over the listed qubit order (first qubit most
/// significant).
class Grouping {
  public:
    Grouping(std::string name, std::vector<std::vector<Qubit>> groups);

    const std::string &name() const noexcept { return name_; }
    std::size_t size() const noexcept { return groups_.size(); }
    std::size_t n_qubits() const noexcept { return group_of_.size(); }
    const std::vector<Qubit> &group(std::size_t tau) const { return groups_.at(tau); }
    const std::vector<std::vector<Qubit>> &groups() const noexcept { return groups_; }
    std::size_t group_size(std::size_t tau) const { return groups_.at(tau).size(); }
    std::vector<std::size_t> sizes() const;

    std::size_t group_of(Qubit q) const { return group_of_.at(q); }
    /// Bit position of q inside its group's physical index.
    std::size_t position_of(Qubit q) const { return position_of_.at(q); }

    bool operator==(const Grouping &o) const { return groups_ == o.groups_; }

  private:
    std::string name_;
    std::vector<std::vector<Qubit>> groups_;
    std::vector<std::size_t> group_of_, position_of_;
};

/// One group per qubit, in id order.
Grouping single_qubit_grouping(std::size_t n_qubits);
/// Consecutive qubit ids in blocks of the given sizes.
Grouping contiguous_grouping(const std::vector<std::size_t> &sizes, std::string name = "custom");

/// Column grouping whose boundaries sit after columns of the given parity
/// (0 = V1 style, 1 = V2 style): outer groups share the remaining columns,
/// middle groups hold two columns each.
Grouping vertical_grouping(const GridTopology &topo, int boundary_parity, std::size_t n_groups);

/// name in {V1, V2, H1, H2, D1, D2}.
Grouping standard_grouping(const GridTopology &topo, const std::string &name);

/// Pattern "ABCD-CDAB" (sequence I) or "CDBA-BACD" (sequence II), repeated.
std::vector<Coupler> coupler_pattern(int sequence, std::size_t depth);

Circuit supremacy_sequence(const GridTopology &topo, std::size_t depth, std::uint64_t seed,
                           const std::vector<Coupler> &pattern);
Circuit sequence_I(const GridTopology &topo, std::size_t depth, std::uint64_t seed);
Circuit sequence_II(const GridTopology &topo, std::size_t depth, std::uint64_t seed);

struct QaoaConfig {
    std::size_t n_qubits = 0;
    double edge_prob = 0.0;
    std::vector<double> betas;
    std::vector<double> gammas;
    std::size_t p_layers = 1;
    std::uint64_t seed = 0;
    std::optional<GridTopology> compile_to;
};

/// G(n, p) edge list (i < j), lexicographic, from a seeded stream.
std::vector<std::pair<Qubit, Qubit>> erdos_renyi_edges(std::size_t n, double p, std::uint64_t seed);

/// QAOA-MaxCut circuit: Hadamard layer, then p rounds of exp(-i gamma ZZ)
/// over graph edges (packed into layers of disjoint gates) and
/// exp(-i beta X) on every qubit. With `compile_to`, SWAPs are inserted by
/// greedy shortest-path routing so every two-qubit gate is nearest-neighbor.
Circuit sequence_III(const QaoaConfig &cfg);

} // namespace qcdmrg
