#include "qcdmrg/circuit.hpp"

#include "qcdmrg/error.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace qcdmrg {

namespace {

[[noreturn]] void fail(const std::string &what) { throw Error("circuit", what); }

constexpr std::array<std::string_view, 11> kNames = {
    "sqrt_x", "sqrt_y", "sqrt_w", "h", "phase", "rx", "fsim", "cz", "cnot", "swap", "zz",
};

DenseTensor make2(cplx a, cplx b, cplx c, cplx d) {
    return DenseTensor(Shape{2, 2}, {a, b, c, d});
}

// sqrt(P) = (1+i)/2 I + (1-i)/2 P for a Hermitian involution P.
DenseTensor sqrt_of_involution(cplx p00, cplx p01, cplx p10, cplx p11) {
    const cplx a{0.5, 0.5}, b{0.5, -0.5};
    return make2(a + b * p00, b * p01, b * p10, a + b * p11);
}

void check_unitary(const DenseTensor &m) {
    const std::size_t n = m.dim(0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            cplx s{0.0, 0.0};
            for (std::size_t k = 0; k < n; ++k)
                s += m[i * n + k] * std::conj(m[j * n + k]);
            const cplx expect = (i == j) ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
            if (std::abs(s - expect) > 1e-12)
                fail("gate matrix is not unitary");
        }
    }
}

} // namespace

std::string_view gate_name(GateKind kind) { return kNames.at(static_cast<std::size_t>(kind)); }

GateKind gate_kind_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kNames.size(); ++i)
        if (kNames[i] == name)
            return static_cast<GateKind>(i);
    fail("unknown gate kind '" + std::string(name) + "'");
}

int gate_arity(GateKind kind) {
    switch (kind) {
    case GateKind::FSim:
    case GateKind::CZ:
    case GateKind::CNOT:
    case GateKind::Swap:
    case GateKind::ZZPhase:
        return 2;
    default:
        return 1;
    }
}

std::size_t gate_param_count(GateKind kind) {
    switch (kind) {
    case GateKind::PhaseShift:
    case GateKind::RotationX:
    case GateKind::ZZPhase:
        return 1;
    case GateKind::FSim:
        return 2;
    default:
        return 0;
    }
}

DenseTensor gate_matrix(GateKind kind, const std::vector<double> &params) {
    if (params.size() != gate_param_count(kind))
        fail("gate '" + std::string(gate_name(kind)) + "' expects " +
             std::to_string(gate_param_count(kind)) + " parameters");
    const cplx i1{0.0, 1.0};
    const double r2 = std::numbers::sqrt2 / 2.0;
    switch (kind) {
    case GateKind::SqrtX:
        return sqrt_of_involution(0.0, 1.0, 1.0, 0.0);
    case GateKind::SqrtY:
        return sqrt_of_involution(0.0, -i1, i1, 0.0);
    case GateKind::SqrtW: {
        // W = (X + Y) / sqrt(2)
        return sqrt_of_involution(0.0, cplx{r2, -r2}, cplx{r2, r2}, 0.0);
    }
    case GateKind::Hadamard:
        return make2(r2, r2, r2, -r2);
    case GateKind::PhaseShift:
        return make2(1.0, 0.0, 0.0, std::exp(i1 * params[0]));
    case GateKind::RotationX: {
        const double c = std::cos(params[0]), s = std::sin(params[0]);
        return make2(c, -i1 * s, -i1 * s, c);
    }
    case GateKind::FSim: {
        const double c = std::cos(params[0]), s = std::sin(params[0]);
        DenseTensor m(Shape{4, 4});
        m[0] = 1.0;
        m[5] = c;
        m[6] = -i1 * s;
        m[9] = -i1 * s;
        m[10] = c;
        m[15] = std::exp(-i1 * params[1]);
        return m;
    }
    case GateKind::CZ: {
        DenseTensor m(Shape{4, 4});
        m[0] = m[5] = m[10] = 1.0;
        m[15] = -1.0;
        return m;
    }
    case GateKind::CNOT: {
        DenseTensor m(Shape{4, 4});
        m[0] = m[5] = 1.0;
        m[11] = m[14] = 1.0;
        return m;
    }
    case GateKind::Swap: {
        DenseTensor m(Shape{4, 4});
        m[0] = m[6] = m[9] = m[15] = 1.0;
        return m;
    }
    case GateKind::ZZPhase: {
        const cplx em = std::exp(-i1 * params[0]), ep = std::exp(i1 * params[0]);
        DenseTensor m(Shape{4, 4});
        m[0] = em;
        m[5] = ep;
        m[10] = ep;
        m[15] = em;
        return m;
    }
    }
    fail("unknown gate kind");
}

Gate::Gate(GateKind kind, std::vector<Qubit> targets, std::vector<double> params)
    : kind_(kind), targets_(std::move(targets)), params_(std::move(params)),
      matrix_(gate_matrix(kind_, params_)) {
    if (static_cast<int>(targets_.size()) != gate_arity(kind_))
        fail("gate '" + std::string(gate_name(kind_)) + "' expects " +
             std::to_string(gate_arity(kind_)) + " targets");
    if (targets_.size() == 2 && targets_[0] == targets_[1])
        fail("two-qubit gate targets must differ");
    check_unitary(matrix_);
}

Mat2 Gate::mat2() const {
    if (arity() != 1)
        fail("mat2 on a two-qubit gate");
    Mat2 m;
    for (std::size_t i = 0; i < 4; ++i)
        m[i] = matrix_[i];
    return m;
}

Mat4 Gate::mat4() const {
    if (arity() != 2)
        fail("mat4 on a one-qubit gate");
    Mat4 m;
    for (std::size_t i = 0; i < 16; ++i)
        m[i] = matrix_[i];
    return m;
}

Gate Gate::adjoint() const {
    Gate g = *this;
    g.adjoint_ = !adjoint_;
    const std::size_t n = matrix_.dim(0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            g.matrix_[i * n + j] = std::conj(matrix_[j * n + i]);
    return g;
}

Gate Gate::retargeted(std::vector<Qubit> targets) const {
    if (targets.size() != targets_.size())
        fail("retarget arity mismatch");
    Gate g = *this;
    g.targets_ = std::move(targets);
    return g;
}

std::size_t Layer::two_qubit_count() const {
    std::size_t n = 0;
    for (const auto &g : gates)
        n += g.arity() == 2;
    return n;
}

Layer Layer::adjoint() const {
    Layer out;
    out.gates.reserve(gates.size());
    for (auto it = gates.rbegin(); it != gates.rend(); ++it)
        out.gates.push_back(it->adjoint());
    return out;
}

Circuit::Circuit(std::size_t n_qubits, std::vector<Layer> layers) : n_qubits_(n_qubits) {
    if (n_qubits_ == 0)
        fail("circuit needs at least one qubit");
    for (auto &l : layers)
        add_layer(std::move(l));
}

void Circuit::add_layer(Layer layer) {
    for (const auto &g : layer.gates)
        for (auto q : g.targets())
            if (q >= n_qubits_)
                fail("gate target " + std::to_string(q) + " out of range");
    layers_.push_back(std::move(layer));
}

std::size_t Circuit::two_qubit_count() const {
    std::size_t n = 0;
    for (const auto &l : layers_)
        n += l.two_qubit_count();
    return n;
}

std::size_t Circuit::gate_count() const {
    std::size_t n = 0;
    for (const auto &l : layers_)
        n += l.gates.size();
    return n;
}

Circuit Circuit::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > layers_.size())
        fail("layer slice out of range");
    return Circuit(n_qubits_, std::vector<Layer>(layers_.begin() + static_cast<std::ptrdiff_t>(begin),
                                                 layers_.begin() + static_cast<std::ptrdiff_t>(end)));
}

Circuit Circuit::gate_prefix(std::size_t n_gates) const {
    Circuit out(n_qubits_);
    std::size_t remaining = n_gates;
    for (const auto &l : layers_) {
        if (remaining == 0)
            break;
        Layer part;
        for (const auto &g : l.gates) {
            if (remaining == 0)
                break;
            part.gates.push_back(g);
            --remaining;
        }
        out.add_layer(std::move(part));
    }
    return out;
}

Circuit Circuit::adjoint() const {
    Circuit out(n_qubits_);
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
        out.add_layer(it->adjoint());
    return out;
}

std::vector<Gate> Circuit::flattened() const {
    std::vector<Gate> out;
    for (const auto &l : layers_)
        out.insert(out.end(), l.gates.begin(), l.gates.end());
    return out;
}

std::uint64_t bitstring_to_index(const Bitstring &x) {
    if (x.size() > 64)
        fail("bitstring too long for integer encoding");
    std::uint64_t idx = 0;
    for (auto b : x)
        idx = (idx << 1) | (b & 1u);
    return idx;
}

Bitstring index_to_bitstring(std::uint64_t index, std::size_t n_qubits) {
    Bitstring x(n_qubits);
    for (std::size_t q = 0; q < n_qubits; ++q)
        x[q] = static_cast<std::uint8_t>((index >> (n_qubits - 1 - q)) & 1u);
    return x;
}

std::string bitstring_to_string(const Bitstring &x) {
    std::string s(x.size(), '0');
    for (std::size_t i = 0; i < x.size(); ++i)
        s[i] = x[i] ? '1' : '0';
    return s;
}

Bitstring parse_bitstring(std::string_view text) {
    Bitstring x;
    x.reserve(text.size());
    for (char c : text) {
        if (c != '0' && c != '1')
            fail("bitstring may only contain '0' and '1'");
        x.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return x;
}

std::vector<GatePiece> operator_schmidt(const Gate &gate, double cutoff) {
    if (gate.arity() != 2)
        throw Error("circuit", "operator Schmidt split needs a two-qubit gate");
    // [o0 o1 i0 i1] -> [o0 i0 | o1 i1]
    const DenseTensor u = permute(reshape(gate.matrix(), {2, 2, 2, 2}), {0, 2, 1, 3});
    const SvdResult svd = split_svd(u, {0, 1}, std::nullopt, cutoff);
    std::vector<GatePiece> pieces(svd.s.size());
    for (std::size_t k = 0; k < svd.s.size(); ++k) {
        const double w = std::sqrt(svd.s[k]);
        for (std::size_t e = 0; e < 4; ++e) {
            pieces[k].first[e] = w * svd.u[e * svd.s.size() + k];
            pieces[k].second[e] = w * svd.v[k * 4 + e];
        }
    }
    return pieces;
}

} // namespace qcdmrg
