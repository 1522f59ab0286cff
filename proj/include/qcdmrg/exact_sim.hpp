#pragma once

#include "qcdmrg/circuit.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qcdmrg {

/// Desk-scale bound on dense simulation; 2^30 amplitudes is 16 GiB.
inline constexpr std::size_t kDefaultMaxQubits = 30;

/// Dense 2^N amplitude vector, qubit 0 the most significant bit of the index.
class StateVector {
  public:
    /// |0...0>
    explicit StateVector(std::size_t n_qubits, std::size_t max_qubits = kDefaultMaxQubits);
    StateVector(std::size_t n_qubits, std::vector<cplx> amplitudes);

    static StateVector basis(std::size_t n_qubits, std::uint64_t index);

    std::size_t n_qubits() const noexcept { return n_qubits_; }
    std::size_t dim() const noexcept { return amps_.size(); }
    std::span<const cplx> amplitudes() const noexcept { return amps_; }
    std::span<cplx> amplitudes() noexcept { return amps_; }
    cplx amplitude(const Bitstring &x) const;
    cplx amplitude(std::uint64_t index) const { return amps_.at(index); }

    double norm2() const;
    void normalize();
    std::vector<double> probabilities() const;

    void apply(const Gate &gate);

  private:
    std::size_t n_qubits_;
    std::vector<cplx> amps_;
};

StateVector evolve(const Circuit &circuit, StateVector initial);
StateVector evolve(const Circuit &circuit);

/// Schrodinger-Feynman evolution from |0...0> across the cut
/// `left_qubits` | rest. Cut-crossing gates are split into operator-Schmidt
/// pieces and every assignment of piece indices is summed (lexicographic
/// order). Throws when the number of terms would exceed `max_terms`.
StateVector evolve_feynman(const Circuit &circuit, const std::vector<Qubit> &left_qubits,
                           std::uint64_t max_terms = std::uint64_t{1} << 20);

/// i.i.d. complex Gaussian amplitudes, Re and Im ~ N(0, 1/(2 * 2^N)), not
/// normalized.
std::vector<cplx> gaussian_amplitudes(std::size_t n_qubits, std::uint64_t seed);
/// gaussian_amplitudes renormalized to unit norm.
StateVector porter_thomas_state(std::size_t n_qubits, std::uint64_t seed);

/// Singular values (descending) of the amplitude matrix with rows indexed by
/// `left_qubits` (in the listed order) and columns by the remaining qubits.
std::vector<double> schmidt_spectrum(const StateVector &state,
                                     const std::vector<Qubit> &left_qubits);

/// Weight kept by the best chi-truncation across the half/half cut
/// (first floor(N/2) qubits | rest).
double best_mps_fidelity(const StateVector &state, std::size_t chi);

/// Raw dump: 2^N pairs of little-endian IEEE doubles (re, im), index order
/// as in StateVector. No header.
void export_state(const std::string &path, const StateVector &state);
StateVector import_state(const std::string &path, std::size_t n_qubits);

} // namespace qcdmrg
