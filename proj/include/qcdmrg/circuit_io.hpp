#pragma once

#include "qcdmrg/circuit.hpp"
#include "qcdmrg/topology.hpp"

#include <optional>
#include <string>

namespace qcdmrg {

inline constexpr int kCircuitFormatVersion = 1;

/// Circuit document:
///   {"version": 1, "n_qubits": N,
///    "topology": {"n_b": .., "n_c": .., "uniform_columns": false},   (optional)
///    "layers": [[{"kind": "fsim", "params": [1.0, 1.5708], "targets": [0, 3],
///                 "dagger": false}, ...], ...]}
/// "params" and "dagger" may be omitted when empty/false.
struct CircuitDocument {
    Circuit circuit;
    std::optional<GridTopology> topology;
};

std::string circuit_to_json(const Circuit &circuit, const GridTopology *topology = nullptr);
CircuitDocument circuit_from_json(const std::string &text);

void save_circuit(const std::string &path, const Circuit &circuit,
                  const GridTopology *topology = nullptr);
CircuitDocument load_circuit(const std::string &path);

} // namespace qcdmrg
