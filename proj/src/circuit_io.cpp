#include "qcdmrg/circuit_io.hpp"

#include "qcdmrg/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace qcdmrg {

using nlohmann::json;

std::string circuit_to_json(const Circuit &circuit, const GridTopology *topology) {
    json doc;
    doc["version"] = kCircuitFormatVersion;
    doc["n_qubits"] = circuit.n_qubits();
    if (topology)
        doc["topology"] = {{"n_b", topology->n_b()},
                           {"n_c", topology->n_c()},
                           {"uniform_columns", topology->uniform_columns()}};
    json layers = json::array();
    for (const auto &layer : circuit.layers()) {
        json gates = json::array();
        for (const auto &g : layer.gates) {
            json jg{{"kind", gate_name(g.kind())}, {"targets", g.targets()}};
            if (!g.params().empty())
                jg["params"] = g.params();
            if (g.is_adjoint())
                jg["dagger"] = true;
            gates.push_back(std::move(jg));
        }
        layers.push_back(std::move(gates));
    }
    doc["layers"] = std::move(layers);
    return doc.dump(1);
}

CircuitDocument circuit_from_json(const std::string &text) {
    try {
        const json doc = json::parse(text);
        const int version = doc.at("version").get<int>();
        if (version != kCircuitFormatVersion)
            throw Error("circuit", "unsupported circuit format version " + std::to_string(version));
        std::optional<GridTopology> topo;
        if (doc.contains("topology")) {
            const auto &t = doc["topology"];
            topo.emplace(t.at("n_b").get<std::size_t>(), t.at("n_c").get<std::size_t>(),
                         t.value("uniform_columns", false));
        }
        Circuit circuit(doc.at("n_qubits").get<std::size_t>());
        for (const auto &jl : doc.at("layers")) {
            Layer layer;
            for (const auto &jg : jl) {
                Gate g(gate_kind_from_name(jg.at("kind").get<std::string>()),
                       jg.at("targets").get<std::vector<Qubit>>(),
                       jg.value("params", std::vector<double>{}));
                if (jg.value("dagger", false))
                    g = g.adjoint();
                layer.gates.push_back(std::move(g));
            }
            circuit.add_layer(std::move(layer));
        }
        if (topo && topo->n_qubits() != circuit.n_qubits())
            throw Error("circuit", "n_qubits does not match the declared topology");
        return {std::move(circuit), std::move(topo)};
    } catch (const json::exception &e) {
        throw Error("circuit", std::string("malformed circuit document: ") + e.what());
    }
}

void save_circuit(const std::string &path, const Circuit &circuit, const GridTopology *topology) {
    std::ofstream out(path);
    if (!out)
        throw Error("circuit", "cannot write " + path);
    out << circuit_to_json(circuit, topology) << '\n';
}

CircuitDocument load_circuit(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw Error("circuit", "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return circuit_from_json(ss.str());
}

} // namespace qcdmrg
