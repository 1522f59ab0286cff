#pragma once

#include "qcdmrg/gate_kernels.hpp"
#include "qcdmrg/tensor.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qcdmrg {

using Qubit = std::uint32_t;

enum class GateKind {
    SqrtX,
    SqrtY,
    SqrtW,
    Hadamard,
    PhaseShift, // diag(1, e^{i angle})
    RotationX,  // exp(-i beta X)
    FSim,       // fsim(theta, phi)
    CZ,
    CNOT,
    Swap,
    ZZPhase, // exp(-i gamma Z Z)
};

std::string_view gate_name(GateKind kind);
GateKind gate_kind_from_name(std::string_view name);
int gate_arity(GateKind kind);
std::size_t gate_param_count(GateKind kind);

/// Unitary of the named gate: 2x2 or 4x4 DenseTensor (rows = output).
DenseTensor gate_matrix(GateKind kind, const std::vector<double> &params = {});

class Gate {
  public:
    Gate(GateKind kind, std::vector<Qubit> targets, std::vector<double> params = {});

    GateKind kind() const noexcept { return kind_; }
    const std::vector<Qubit> &targets() const noexcept { return targets_; }
    const std::vector<double> &params() const noexcept { return params_; }
    bool is_adjoint() const noexcept { return adjoint_; }
    int arity() const noexcept { return static_cast<int>(targets_.size()); }

    const DenseTensor &matrix() const noexcept { return matrix_; }
    Mat2 mat2() const;
    Mat4 mat4() const;

    Gate adjoint() const;
    /// Same gate acting on relabelled qubits.
    Gate retargeted(std::vector<Qubit> targets) const;

  private:
    GateKind kind_;
    std::vector<Qubit> targets_;
    std::vector<double> params_;
    bool adjoint_ = false;
    DenseTensor matrix_;
};

/// One circuit layer ("cycle"): gates applied in list order. Sequences I/II
/// use a one-qubit sublayer followed by a two-qubit sublayer.
struct Layer {
    std::vector<Gate> gates;

    std::size_t two_qubit_count() const;
    Layer adjoint() const;
};

class Circuit {
  public:
    explicit Circuit(std::size_t n_qubits, std::vector<Layer> layers = {});

    std::size_t n_qubits() const noexcept { return n_qubits_; }
    std::size_t depth() const noexcept { return layers_.size(); }
    std::size_t two_qubit_count() const;
    std::size_t gate_count() const;
    const std::vector<Layer> &layers() const noexcept { return layers_; }

    void add_layer(Layer layer);

    /// Layers [begin, end).
    Circuit slice(std::size_t begin, std::size_t end) const;
    /// Circuit made of the first `n_gates` gates in application order.
    Circuit gate_prefix(std::size_t n_gates) const;
    /// U^dagger: layers reversed and each gate replaced by its adjoint.
    Circuit adjoint() const;

    /// All gates in application order.
    std::vector<Gate> flattened() const;

  private:
    std::size_t n_qubits_;
    std::vector<Layer> layers_;
};

/// Integer encoding with qubit 0 as the most significant bit.
using Bitstring = std::vector<std::uint8_t>;

std::uint64_t bitstring_to_index(const Bitstring &x);
Bitstring index_to_bitstring(std::uint64_t index, std::size_t n_qubits);
std::string bitstring_to_string(const Bitstring &x);
Bitstring parse_bitstring(std::string_view text);

/// Operator-Schmidt pieces of a two-qubit gate: U = sum_k A_k (x) B_k with
/// A_k on targets[0] and B_k on targets[1]. Pieces with singular value below
/// `cutoff` (relative to the largest) are dropped, so fsim(1, pi/2) yields
/// four pieces and CZ two.
struct GatePiece {
    Mat2 first;
    Mat2 second;
};
std::vector<GatePiece> operator_schmidt(const Gate &gate, double cutoff = 1e-12);

} // namespace qcdmrg
