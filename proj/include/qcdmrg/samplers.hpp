#pragma once

#include "qcdmrg/circuit.hpp"
#include "qcdmrg/exact_sim.hpp"

#include <functional>
#include <map>
#include <random>
#include <span>
#include <optional>
#include <string>
#include <vector>

namespace qcdmrg {

/// |Psi_x|^2 (need not be normalized).
using ProbabilityFn = std::function<double(const Bitstring &)>;

struct MetropolisResult {
    std::vector<Bitstring> samples;
    std::size_t proposals = 0;
    std::size_t accepted = 0;
    bool aborted = false; // probability evaluation failed; samples are partial
    std::string abort_reason;

    double acceptance() const {
        return proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
    }
};

/// Metropolis chain with uniform proposals over all 2^N bitstrings. The
/// first `burn_in` states (default 100 L) are discarded, then every L-th
/// state is kept.
MetropolisResult metropolis_sample(const ProbabilityFn &prob, std::size_t n_qubits,
                                   std::size_t n_samples, std::size_t L, std::uint64_t seed,
                                   std::optional<std::size_t> burn_in = std::nullopt);

/// Amplitude <x| G_k ... G_1 |0> after the first k gates (flattened order).
using PrefixAmplitudeFn = std::function<cplx(std::size_t k, const Bitstring &x)>;

/// Dense oracle holding the state after every gate prefix.
class DensePrefixOracle {
  public:
    explicit DensePrefixOracle(const Circuit &circuit);
    cplx operator()(std::size_t k, const Bitstring &x) const;
    const StateVector &state(std::size_t k) const { return states_.at(k); }

  private:
    std::vector<StateVector> states_;
};

/// Gate-by-gate conditional sampler: starting from 0...0, after each gate
/// the bits it touches are redrawn from the 2 or 4 candidates with
/// probability proportional to |amplitude|^2 at that prefix.
Bitstring conditional_sample(const PrefixAmplitudeFn &amp, const Circuit &circuit,
                             std::mt19937_64 &rng);
std::vector<Bitstring> conditional_samples(const PrefixAmplitudeFn &amp, const Circuit &circuit,
                                           std::size_t n_samples, std::uint64_t seed);

/// (1 - p_acc)^L
double chain_repetition_rate(std::size_t L, double p_acc);

/// One bitstring per line after "# key: value" header lines.
void write_samples(const std::string &path, const std::vector<Bitstring> &samples,
                   const std::map<std::string, std::string> &header);
std::vector<Bitstring> read_samples(const std::string &path);

/// Histogram over 2^N outcomes, normalized.
std::vector<double> empirical_distribution(const std::vector<Bitstring> &samples, std::size_t n_qubits);
double total_variation(std::span<const double> p, std::span<const double> q);

} // namespace qcdmrg
