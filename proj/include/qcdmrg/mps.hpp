#pragma once

#include "qcdmrg/circuit.hpp"
#include "qcdmrg/exact_sim.hpp"
#include "qcdmrg/topology.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qcdmrg {

/// Chain of m rank-3 tensors (left bond, 2^{r_tau}, right bond). The
/// physical index of group tau is row-major over grouping.group(tau), first
/// qubit most significant. Boundary bonds have extent 1.
class GroupedMPS {
  public:
    GroupedMPS(Grouping grouping, std::vector<DenseTensor> tensors,
               std::optional<std::size_t> ortho_center = std::nullopt);

    static GroupedMPS product_state(const Grouping &grouping, const Bitstring &x);
    /// Seeded complex Gaussian tensors with bonds min(chi, capacity),
    /// returned canonical at 0 and normalized.
    static GroupedMPS random(const Grouping &grouping, std::size_t chi, std::uint64_t seed);

    const Grouping &grouping() const noexcept { return grouping_; }
    std::size_t size() const noexcept { return tensors_.size(); }
    std::size_t n_qubits() const noexcept { return grouping_.n_qubits(); }
    const DenseTensor &tensor(std::size_t tau) const { return tensors_.at(tau); }
    const std::vector<DenseTensor> &tensors() const noexcept { return tensors_; }
    std::optional<std::size_t> ortho_center() const noexcept { return center_; }

    /// Bond extents between consecutive tensors (m - 1 entries).
    std::vector<std::size_t> bond_dims() const;
    std::size_t max_bond() const;

    /// Replace one tensor; drops the orthogonality center unless `keep_center`.
    void set_tensor(std::size_t tau, DenseTensor t, bool keep_center = false);
    /// Replace tensors tau and tau + 1 together (their shared bond may change).
    void set_pair(std::size_t tau, DenseTensor left, DenseTensor right,
                  std::optional<std::size_t> center);
    void set_ortho_center(std::optional<std::size_t> c) { center_ = c; }

    /// Move the orthogonality center by QR steps. From no center, sweeps
    /// from both ends.
    void move_center(std::size_t tau);
    /// Scale the center tensor to unit norm (requires a center).
    void normalize();

    /// Apply one gate acting within a single group, exactly.
    void apply_internal(const Gate &g);
    /// Apply any gate; a cross-group gate is applied as an operator-Schmidt
    /// MPO and the touched span is re-truncated to `chi` by SVD. Returns the
    /// discarded weight relative to the norm before truncation.
    double apply_truncated(const Gate &g, std::size_t chi);

  private:
    void check_bonds() const;

    Grouping grouping_;
    std::vector<DenseTensor> tensors_;
    std::optional<std::size_t> center_;
};

/// Largest bond extent the grouping allows between tau and tau + 1.
std::size_t bond_capacity(const Grouping &grouping, std::size_t bond, std::size_t chi);

GroupedMPS canonicalize(GroupedMPS mps, std::size_t center);
cplx overlap(const GroupedMPS &a, const GroupedMPS &b);
double norm2(const GroupedMPS &mps);
cplx amplitude(const GroupedMPS &mps, const Bitstring &x);
StateVector to_statevector(const GroupedMPS &mps, std::size_t max_qubits = kDefaultMaxQubits);

/// True when every target of `g` lies in one group.
bool is_internal(const Grouping &grouping, const Gate &g);
bool is_internal(const Grouping &grouping, const Layer &layer);
GroupedMPS apply_internal_gates(GroupedMPS mps, const Layer &layer);

/// Checkpoint: magic "QCMPS", format version, grouping, center, then each
/// tensor's dims and raw little-endian complex payload.
inline constexpr std::uint32_t kCheckpointVersion = 1;
void save_checkpoint(const std::string &path, const GroupedMPS &mps);
GroupedMPS load_checkpoint(const std::string &path);

} // namespace qcdmrg
