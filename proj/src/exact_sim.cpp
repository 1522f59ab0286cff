#include "qcdmrg/exact_sim.hpp"

#include "qcdmrg/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>

namespace qcdmrg {

static_assert(std::endian::native == std::endian::little,
              "raw state export assumes a little-endian host");

namespace {

[[noreturn]] void fail(const std::string &what) { throw Error("exact-sim", what); }

void apply_to(std::span<cplx> amps, int nbits, const Gate &g, const std::vector<int> &pos) {
    if (g.arity() == 1)
        apply_one_qubit(amps, 1, nbits, 1, pos[g.targets()[0]], g.mat2());
    else
        apply_two_qubit(amps, 1, nbits, 1, pos[g.targets()[0]], pos[g.targets()[1]], g.mat4());
}

} // namespace

StateVector::StateVector(std::size_t n_qubits, std::size_t max_qubits) : n_qubits_(n_qubits) {
    if (n_qubits == 0)
        fail("state needs at least one qubit");
    if (n_qubits > max_qubits)
        fail(std::to_string(n_qubits) + " qubits exceed the dense bound of " +
             std::to_string(max_qubits));
    amps_.assign(std::size_t{1} << n_qubits, cplx{0.0, 0.0});
    amps_[0] = 1.0;
}

StateVector::StateVector(std::size_t n_qubits, std::vector<cplx> amplitudes)
    : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
    if (n_qubits == 0 || n_qubits > 62 || amps_.size() != (std::size_t{1} << n_qubits))
        fail("amplitude count is not 2^N");
}

StateVector StateVector::basis(std::size_t n_qubits, std::uint64_t index) {
    StateVector s(n_qubits);
    if (index >= s.dim())
        fail("basis index out of range");
    s.amps_[0] = 0.0;
    s.amps_[index] = 1.0;
    return s;
}

cplx StateVector::amplitude(const Bitstring &x) const {
    if (x.size() != n_qubits_)
        fail("bitstring length does not match qubit count");
    return amps_[bitstring_to_index(x)];
}

double StateVector::norm2() const {
    double s = 0.0;
    for (const auto &a : amps_)
        s += std::norm(a);
    return s;
}

void StateVector::normalize() {
    const double n = std::sqrt(norm2());
    if (n == 0.0)
        fail("cannot normalize the zero vector");
    for (auto &a : amps_)
        a /= n;
}

std::vector<double> StateVector::probabilities() const {
    std::vector<double> p(amps_.size());
    for (std::size_t i = 0; i < amps_.size(); ++i)
        p[i] = std::norm(amps_[i]);
    return p;
}

void StateVector::apply(const Gate &gate) {
    for (auto q : gate.targets())
        if (q >= n_qubits_)
            fail("gate target out of range");
    const int nbits = static_cast<int>(n_qubits_);
    const auto &t = gate.targets();
    if (gate.arity() == 1)
        apply_one_qubit(amps_, 1, nbits, 1, static_cast<int>(t[0]), gate.mat2());
    else
        apply_two_qubit(amps_, 1, nbits, 1, static_cast<int>(t[0]), static_cast<int>(t[1]),
                        gate.mat4());
}

StateVector evolve(const Circuit &circuit, StateVector initial) {
    if (circuit.n_qubits() != initial.n_qubits())
        fail("circuit and state qubit counts differ");
    for (const auto &layer : circuit.layers())
        for (const auto &g : layer.gates)
            initial.apply(g);
    return initial;
}

StateVector evolve(const Circuit &circuit) { return evolve(circuit, StateVector(circuit.n_qubits())); }

StateVector evolve_feynman(const Circuit &circuit, const std::vector<Qubit> &left_qubits,
                           std::uint64_t max_terms) {
    const std::size_t n = circuit.n_qubits();
    if (n > kDefaultMaxQubits)
        fail("too many qubits for dense reconstruction");
    std::vector<int> side(n, 1), pos(n, 0);
    for (auto q : left_qubits) {
        if (q >= n || side[q] == 0)
            fail("invalid cut");
        side[q] = 0;
    }
    int na = 0, nb = 0;
    for (std::size_t q = 0; q < n; ++q)
        pos[q] = side[q] == 0 ? na++ : nb++;
    if (na == 0 || nb == 0)
        fail("cut must leave qubits on both sides");

    // Each step is either a gate local to one side or a crossing gate with
    // its list of pieces.
    struct Step {
        const Gate *gate;
        std::vector<GatePiece> pieces;
    };
    std::vector<Step> steps;
    const auto gates = circuit.flattened();
    double terms = 1.0;
    for (const auto &g : gates) {
        Step s{&g, {}};
        if (g.arity() == 2 && side[g.targets()[0]] != side[g.targets()[1]]) {
            s.pieces = operator_schmidt(g);
            terms *= static_cast<double>(s.pieces.size());
            if (terms > static_cast<double>(max_terms))
                fail("Schrodinger-Feynman term count exceeds the cap of " +
                     std::to_string(max_terms));
        }
        steps.push_back(std::move(s));
    }

    const std::size_t da = std::size_t{1} << na, db = std::size_t{1} << nb;
    std::vector<cplx> total(da * db, cplx{0.0, 0.0});
    std::vector<cplx> a0(da, 0.0), b0(db, 0.0);
    a0[0] = b0[0] = 1.0;

    std::function<void(std::size_t, std::vector<cplx>, std::vector<cplx>)> dfs =
        [&](std::size_t i, std::vector<cplx> a, std::vector<cplx> b) {
            for (; i < steps.size(); ++i) {
                const Step &s = steps[i];
                const auto &t = s.gate->targets();
                if (!s.pieces.empty())
                    break;
                auto &half = side[t[0]] == 0 ? a : b;
                apply_to(half, side[t[0]] == 0 ? na : nb, *s.gate, pos);
            }
            if (i == steps.size()) {
                for (std::size_t ia = 0; ia < da; ++ia)
                    for (std::size_t ib = 0; ib < db; ++ib)
                        total[ia * db + ib] += a[ia] * b[ib];
                return;
            }
            const Step &s = steps[i];
            const auto &t = s.gate->targets();
            for (const auto &piece : s.pieces) {
                auto a2 = a, b2 = b;
                const Mat2 &ma = side[t[0]] == 0 ? piece.first : piece.second;
                const Mat2 &mb = side[t[0]] == 0 ? piece.second : piece.first;
                const Qubit qa = side[t[0]] == 0 ? t[0] : t[1];
                const Qubit qb = side[t[0]] == 0 ? t[1] : t[0];
                apply_one_qubit(a2, 1, na, 1, pos[qa], ma);
                apply_one_qubit(b2, 1, nb, 1, pos[qb], mb);
                dfs(i + 1, std::move(a2), std::move(b2));
            }
        };
    dfs(0, a0, b0);

    std::vector<cplx> amps(std::size_t{1} << n);
    for (std::size_t idx = 0; idx < amps.size(); ++idx) {
        std::size_t ia = 0, ib = 0;
        for (std::size_t q = 0; q < n; ++q) {
            const std::size_t bit = (idx >> (n - 1 - q)) & 1u;
            if (side[q] == 0)
                ia |= bit << (na - 1 - pos[q]);
            else
                ib |= bit << (nb - 1 - pos[q]);
        }
        amps[idx] = total[ia * db + ib];
    }
    return StateVector(n, std::move(amps));
}

std::vector<cplx> gaussian_amplitudes(std::size_t n_qubits, std::uint64_t seed) {
    if (n_qubits == 0 || n_qubits > kDefaultMaxQubits)
        fail("qubit count out of range for a dense random state");
    const std::size_t dim = std::size_t{1} << n_qubits;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5 / static_cast<double>(dim)));
    std::vector<cplx> amps(dim);
    for (auto &a : amps) {
        const double re = normal(rng);
        a = cplx{re, normal(rng)};
    }
    return amps;
}

StateVector porter_thomas_state(std::size_t n_qubits, std::uint64_t seed) {
    StateVector s(n_qubits, gaussian_amplitudes(n_qubits, seed));
    s.normalize();
    return s;
}

std::vector<double> schmidt_spectrum(const StateVector &state, const std::vector<Qubit> &left_qubits) {
    const std::size_t n = state.n_qubits();
    if (left_qubits.empty() || left_qubits.size() >= n)
        fail("Schmidt cut needs a nonempty proper subset of qubits");
    std::vector<int> side(n, 1);
    std::vector<std::size_t> pos(n, 0);
    for (std::size_t i = 0; i < left_qubits.size(); ++i) {
        const Qubit q = left_qubits[i];
        if (q >= n || side[q] == 0)
            fail("invalid Schmidt cut");
        side[q] = 0;
        pos[q] = i;
    }
    const std::size_t nl = left_qubits.size(), nr = n - nl;
    std::size_t r = 0;
    for (std::size_t q = 0; q < n; ++q)
        if (side[q] == 1)
            pos[q] = r++;

    bool contiguous_prefix = true;
    for (std::size_t i = 0; i < nl; ++i)
        contiguous_prefix &= left_qubits[i] == i;
    const std::size_t rows = std::size_t{1} << nl, cols = std::size_t{1} << nr;
    if (contiguous_prefix)
        return singular_values(state.amplitudes(), rows, cols);

    std::vector<cplx> mat(rows * cols);
    for (std::size_t idx = 0; idx < state.dim(); ++idx) {
        std::size_t il = 0, ir = 0;
        for (std::size_t q = 0; q < n; ++q) {
            const std::size_t bit = (idx >> (n - 1 - q)) & 1u;
            if (side[q] == 0)
                il |= bit << (nl - 1 - pos[q]);
            else
                ir |= bit << (nr - 1 - pos[q]);
        }
        mat[il * cols + ir] = state.amplitude(idx);
    }
    return singular_values(mat, rows, cols);
}

double best_mps_fidelity(const StateVector &state, std::size_t chi) {
    if (chi == 0)
        fail("chi must be >= 1");
    if (state.n_qubits() < 2)
        return 1.0;
    std::vector<Qubit> left(state.n_qubits() / 2);
    for (std::size_t q = 0; q < left.size(); ++q)
        left[q] = static_cast<Qubit>(q);
    const auto s = schmidt_spectrum(state, left);
    double total = 0.0, kept = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        total += s[k] * s[k];
        if (k < chi)
            kept += s[k] * s[k];
    }
    return kept / total;
}

void export_state(const std::string &path, const StateVector &state) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail("cannot write " + path);
    out.write(reinterpret_cast<const char *>(state.amplitudes().data()),
              static_cast<std::streamsize>(state.dim() * sizeof(cplx)));
}

StateVector import_state(const std::string &path, std::size_t n_qubits) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail("cannot read " + path);
    std::vector<cplx> amps(std::size_t{1} << n_qubits);
    in.read(reinterpret_cast<char *>(amps.data()),
            static_cast<std::streamsize>(amps.size() * sizeof(cplx)));
    if (in.gcount() != static_cast<std::streamsize>(amps.size() * sizeof(cplx)) ||
        in.peek() != std::char_traits<char>::eof())
        fail("state file size does not match 2^N amplitudes");
    return StateVector(n_qubits, std::move(amps));
}

} // namespace qcdmrg
