#include "qcdmrg/mps.hpp"

#include "qcdmrg/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace qcdmrg {

namespace {

[[noreturn]] void fail(const std::string &what) { throw Error("mps-state", what); }

std::size_t pow2_capped(std::size_t bits) {
    return bits >= 62 ? std::size_t{1} << 62 : std::size_t{1} << bits;
}

std::size_t physical_index(const Grouping &g, std::size_t tau, const Bitstring &x) {
    std::size_t s = 0;
    for (auto q : g.group(tau))
        s = (s << 1) | (x[q] & 1u);
    return s;
}

// M with a one-qubit operator applied at bit `pos` of its physical index.
DenseTensor applied(const DenseTensor &m, int nbits, int pos, const Mat2 &op) {
    DenseTensor out = m;
    apply_one_qubit(out.data(), m.dim(0), nbits, m.dim(2), pos, op);
    return out;
}

} // namespace

GroupedMPS::GroupedMPS(Grouping grouping, std::vector<DenseTensor> tensors,
                       std::optional<std::size_t> ortho_center)
    : grouping_(std::move(grouping)), tensors_(std::move(tensors)), center_(ortho_center) {
    check_bonds();
    if (center_ && *center_ >= tensors_.size())
        fail("orthogonality center out of range");
}

void GroupedMPS::check_bonds() const {
    if (tensors_.size() != grouping_.size())
        fail("tensor count does not match the grouping");
    for (std::size_t tau = 0; tau < tensors_.size(); ++tau) {
        const auto &t = tensors_[tau];
        if (t.rank() != 3)
            fail("MPS tensors must have rank 3");
        if (t.dim(1) != (std::size_t{1} << grouping_.group_size(tau)))
            fail("physical extent of tensor " + std::to_string(tau) + " is not 2^r");
        if (tau == 0 && t.dim(0) != 1)
            fail("left boundary bond must have extent 1");
        if (tau + 1 == tensors_.size() && t.dim(2) != 1)
            fail("right boundary bond must have extent 1");
        if (tau > 0 && tensors_[tau - 1].dim(2) != t.dim(0))
            fail("bond extents do not match at bond " + std::to_string(tau - 1));
    }
}

GroupedMPS GroupedMPS::product_state(const Grouping &grouping, const Bitstring &x) {
    if (x.size() != grouping.n_qubits())
        fail("bitstring length does not match qubit count");
    std::vector<DenseTensor> ts;
    for (std::size_t tau = 0; tau < grouping.size(); ++tau) {
        DenseTensor t(Shape{1, std::size_t{1} << grouping.group_size(tau), 1});
        t[physical_index(grouping, tau, x)] = 1.0;
        ts.push_back(std::move(t));
    }
    return GroupedMPS(grouping, std::move(ts), 0);
}

std::size_t bond_capacity(const Grouping &grouping, std::size_t bond, std::size_t chi) {
    std::size_t left = 0;
    for (std::size_t tau = 0; tau <= bond; ++tau)
        left += grouping.group_size(tau);
    return std::min({chi, pow2_capped(left), pow2_capped(grouping.n_qubits() - left)});
}

GroupedMPS GroupedMPS::random(const Grouping &grouping, std::size_t chi, std::uint64_t seed) {
    if (chi == 0)
        fail("chi must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<DenseTensor> ts;
    std::size_t left = 1;
    for (std::size_t tau = 0; tau < grouping.size(); ++tau) {
        const std::size_t right =
            tau + 1 == grouping.size() ? 1 : bond_capacity(grouping, tau, chi);
        DenseTensor t(Shape{left, std::size_t{1} << grouping.group_size(tau), right});
        for (auto &v : t.data()) {
            const double re = normal(rng);
            v = cplx{re, normal(rng)};
        }
        ts.push_back(std::move(t));
        left = right;
    }
    GroupedMPS mps(grouping, std::move(ts));
    mps.move_center(0);
    mps.normalize();
    return mps;
}

std::vector<std::size_t> GroupedMPS::bond_dims() const {
    std::vector<std::size_t> b;
    for (std::size_t tau = 0; tau + 1 < tensors_.size(); ++tau)
        b.push_back(tensors_[tau].dim(2));
    return b;
}

std::size_t GroupedMPS::max_bond() const {
    std::size_t b = 1;
    for (auto d : bond_dims())
        b = std::max(b, d);
    return b;
}

void GroupedMPS::set_tensor(std::size_t tau, DenseTensor t, bool keep_center) {
    tensors_.at(tau) = std::move(t);
    check_bonds();
    if (!keep_center)
        center_.reset();
}

void GroupedMPS::set_pair(std::size_t tau, DenseTensor left, DenseTensor right,
                          std::optional<std::size_t> center) {
    tensors_.at(tau) = std::move(left);
    tensors_.at(tau + 1) = std::move(right);
    check_bonds();
    center_ = center;
}

void GroupedMPS::move_center(std::size_t tau) {
    const std::size_t m = tensors_.size();
    if (tau >= m)
        fail("orthogonality center out of range");
    std::size_t lo = 0, hi = m - 1;
    if (center_)
        lo = hi = *center_;
    for (std::size_t i = lo; i < tau; ++i) {
        auto qr = split_qr(tensors_[i], {0, 1});
        tensors_[i] = std::move(qr.q);
        tensors_[i + 1] = contract(qr.r, tensors_[i + 1], {{1, 0}});
    }
    for (std::size_t i = hi; i > tau; --i) {
        auto qr = split_qr(permute(tensors_[i], {1, 2, 0}), {0, 1});
        tensors_[i] = permute(qr.q, {2, 0, 1});
        tensors_[i - 1] = contract(tensors_[i - 1], qr.r, {{2, 1}});
    }
    center_ = tau;
}

void GroupedMPS::normalize() {
    if (!center_)
        fail("normalize needs an orthogonality center");
    const double n = std::sqrt(qcdmrg::norm2(tensors_[*center_]));
    if (n == 0.0)
        fail("cannot normalize a zero MPS");
    tensors_[*center_] *= cplx{1.0 / n, 0.0};
}

void GroupedMPS::apply_internal(const Gate &g) {
    const auto &t = g.targets();
    for (auto q : t)
        if (q >= n_qubits())
            fail("gate target out of range");
    const std::size_t tau = grouping_.group_of(t[0]);
    if (g.arity() == 2 && grouping_.group_of(t[1]) != tau)
        fail("gate on qubits " + std::to_string(t[0]) + "," + std::to_string(t[1]) +
             " straddles groups");
    auto &m = tensors_[tau];
    const int nbits = static_cast<int>(grouping_.group_size(tau));
    const int p0 = static_cast<int>(grouping_.position_of(t[0]));
    if (g.arity() == 1)
        apply_one_qubit(m.data(), m.dim(0), nbits, m.dim(2), p0, g.mat2());
    else
        apply_two_qubit(m.data(), m.dim(0), nbits, m.dim(2), p0,
                        static_cast<int>(grouping_.position_of(t[1])), g.mat4());
}

double GroupedMPS::apply_truncated(const Gate &g, std::size_t chi) {
    if (is_internal(grouping_, g)) {
        apply_internal(g);
        return 0.0;
    }
    const auto &t = g.targets();
    const bool first_left = grouping_.group_of(t[0]) < grouping_.group_of(t[1]);
    const Qubit ql = first_left ? t[0] : t[1], qr = first_left ? t[1] : t[0];
    const std::size_t t1 = grouping_.group_of(ql), t2 = grouping_.group_of(qr);
    const auto pieces = operator_schmidt(g);
    const std::size_t K = pieces.size();
    move_center(t1);

    // MPO application: a bond of extent K runs from t1 to t2.
    for (std::size_t tau = t1; tau <= t2; ++tau) {
        const DenseTensor &m = tensors_[tau];
        const std::size_t l = m.dim(0), d = m.dim(1), r = m.dim(2);
        const int nbits = static_cast<int>(grouping_.group_size(tau));
        if (tau == t1) {
            DenseTensor out(Shape{l, d, r * K});
            for (std::size_t k = 0; k < K; ++k) {
                const auto &op = first_left ? pieces[k].first : pieces[k].second;
                const DenseTensor mk =
                    applied(m, nbits, static_cast<int>(grouping_.position_of(ql)), op);
                for (std::size_t i = 0; i < l * d; ++i)
                    for (std::size_t j = 0; j < r; ++j)
                        out[(i * r + j) * K + k] = mk[i * r + j];
            }
            tensors_[tau] = std::move(out);
        } else if (tau == t2) {
            DenseTensor out(Shape{l * K, d, r});
            for (std::size_t k = 0; k < K; ++k) {
                const auto &op = first_left ? pieces[k].second : pieces[k].first;
                const DenseTensor mk =
                    applied(m, nbits, static_cast<int>(grouping_.position_of(qr)), op);
                for (std::size_t i = 0; i < l; ++i)
                    std::copy_n(mk.data().data() + i * d * r, d * r,
                                out.data().data() + (i * K + k) * d * r);
            }
            tensors_[tau] = std::move(out);
        } else {
            DenseTensor out(Shape{l * K, d, r * K});
            for (std::size_t i = 0; i < l; ++i)
                for (std::size_t k = 0; k < K; ++k)
                    for (std::size_t s = 0; s < d; ++s)
                        for (std::size_t j = 0; j < r; ++j)
                            out[(((i * K + k) * d + s) * r + j) * K + k] = m[(i * d + s) * r + j];
            tensors_[tau] = std::move(out);
        }
    }

    for (std::size_t i = t1; i < t2; ++i) {
        auto qrr = split_qr(tensors_[i], {0, 1});
        tensors_[i] = std::move(qrr.q);
        tensors_[i + 1] = contract(qrr.r, tensors_[i + 1], {{1, 0}});
    }
    const double total = qcdmrg::norm2(tensors_[t2]);
    double discarded = 0.0;
    for (std::size_t i = t2; i > t1; --i) {
        auto svd = split_svd(tensors_[i], {0}, bond_capacity(grouping_, i - 1, chi));
        discarded += svd.discarded_weight;
        for (std::size_t a = 0; a < svd.u.dim(0); ++a)
            for (std::size_t k = 0; k < svd.s.size(); ++k)
                svd.u[a * svd.s.size() + k] *= svd.s[k];
        tensors_[i] = std::move(svd.v);
        tensors_[i - 1] = contract(tensors_[i - 1], svd.u, {{2, 0}});
    }
    center_ = t1;
    return total > 0.0 ? discarded / total : 0.0;
}

GroupedMPS canonicalize(GroupedMPS mps, std::size_t center) {
    mps.move_center(center);
    return mps;
}

cplx overlap(const GroupedMPS &a, const GroupedMPS &b) {
    if (!(a.grouping() == b.grouping()))
        fail("overlap needs identical groupings");
    DenseTensor env = DenseTensor::identity(1);
    for (std::size_t tau = 0; tau < a.size(); ++tau) {
        const DenseTensor tmp = contract(env, b.tensor(tau), {{1, 0}});
        env = contract(conj(a.tensor(tau)), tmp, {{0, 0}, {1, 1}});
    }
    return env[0];
}

double norm2(const GroupedMPS &mps) {
    if (auto c = mps.ortho_center())
        return norm2(mps.tensor(*c));
    return overlap(mps, mps).real();
}

cplx amplitude(const GroupedMPS &mps, const Bitstring &x) {
    if (x.size() != mps.n_qubits())
        fail("bitstring length does not match qubit count");
    std::vector<cplx> v{1.0};
    for (std::size_t tau = 0; tau < mps.size(); ++tau) {
        const auto &m = mps.tensor(tau);
        const std::size_t l = m.dim(0), d = m.dim(1), r = m.dim(2);
        const std::size_t s = physical_index(mps.grouping(), tau, x);
        std::vector<cplx> w(r, 0.0);
        for (std::size_t i = 0; i < l; ++i)
            for (std::size_t j = 0; j < r; ++j)
                w[j] += v[i] * m[(i * d + s) * r + j];
        v = std::move(w);
    }
    return v[0];
}

StateVector to_statevector(const GroupedMPS &mps, std::size_t max_qubits) {
    const std::size_t n = mps.n_qubits();
    if (n > max_qubits)
        fail("MPS too large for a dense state vector");
    DenseTensor psi = reshape(mps.tensor(0), {mps.tensor(0).dim(1), mps.tensor(0).dim(2)});
    for (std::size_t tau = 1; tau < mps.size(); ++tau) {
        const DenseTensor next = contract(psi, mps.tensor(tau), {{1, 0}});
        psi = reshape(next, {next.dim(0) * next.dim(1), next.dim(2)});
    }
    std::vector<Qubit> order;
    for (const auto &g : mps.grouping().groups())
        order.insert(order.end(), g.begin(), g.end());
    std::vector<cplx> amps(std::size_t{1} << n);
    for (std::size_t idx = 0; idx < amps.size(); ++idx) {
        std::size_t global = 0;
        for (std::size_t j = 0; j < n; ++j)
            global |= ((idx >> (n - 1 - j)) & 1u) << (n - 1 - order[j]);
        amps[global] = psi[idx];
    }
    return StateVector(n, std::move(amps));
}

bool is_internal(const Grouping &grouping, const Gate &g) {
    const auto &t = g.targets();
    return g.arity() == 1 || grouping.group_of(t[0]) == grouping.group_of(t[1]);
}

bool is_internal(const Grouping &grouping, const Layer &layer) {
    return std::all_of(layer.gates.begin(), layer.gates.end(),
                       [&](const Gate &g) { return is_internal(grouping, g); });
}

GroupedMPS apply_internal_gates(GroupedMPS mps, const Layer &layer) {
    for (const auto &g : layer.gates)
        mps.apply_internal(g);
    return mps;
}

namespace {

template <class T> void put(std::ostream &out, T v) {
    out.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <class T> T get(std::istream &in) {
    T v{};
    in.read(reinterpret_cast<char *>(&v), sizeof(T));
    if (!in)
        fail("truncated checkpoint file");
    return v;
}

constexpr char kMagic[5] = {'Q', 'C', 'M', 'P', 'S'};

} // namespace

void save_checkpoint(const std::string &path, const GroupedMPS &mps) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail("cannot write " + path);
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kCheckpointVersion);
    const auto &g = mps.grouping();
    put<std::uint64_t>(out, g.name().size());
    out.write(g.name().data(), static_cast<std::streamsize>(g.name().size()));
    put<std::uint64_t>(out, g.size());
    for (const auto &group : g.groups()) {
        put<std::uint64_t>(out, group.size());
        for (auto q : group)
            put<std::uint32_t>(out, q);
    }
    put<std::int64_t>(out, mps.ortho_center() ? static_cast<std::int64_t>(*mps.ortho_center()) : -1);
    for (const auto &t : mps.tensors()) {
        for (std::size_t a = 0; a < 3; ++a)
            put<std::uint64_t>(out, t.dim(a));
        out.write(reinterpret_cast<const char *>(t.data().data()),
                  static_cast<std::streamsize>(t.size() * sizeof(cplx)));
    }
    if (!out)
        fail("write failed for " + path);
}

GroupedMPS load_checkpoint(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail("cannot read " + path);
    char magic[5];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
        fail(path + " is not an MPS checkpoint");
    const auto version = get<std::uint32_t>(in);
    if (version != kCheckpointVersion)
        fail("unsupported checkpoint version " + std::to_string(version));
    std::string name(get<std::uint64_t>(in), '\0');
    in.read(name.data(), static_cast<std::streamsize>(name.size()));
    const auto m = get<std::uint64_t>(in);
    std::vector<std::vector<Qubit>> groups(m);
    for (auto &group : groups) {
        group.resize(get<std::uint64_t>(in));
        for (auto &q : group)
            q = get<std::uint32_t>(in);
    }
    const auto center = get<std::int64_t>(in);
    std::vector<DenseTensor> ts;
    for (std::size_t tau = 0; tau < m; ++tau) {
        Shape dims(3);
        for (auto &d : dims)
            d = get<std::uint64_t>(in);
        DenseTensor t(dims);
        in.read(reinterpret_cast<char *>(t.data().data()),
                static_cast<std::streamsize>(t.size() * sizeof(cplx)));
        if (!in)
            fail("truncated checkpoint file");
        ts.push_back(std::move(t));
    }
    std::optional<std::size_t> c;
    if (center >= 0)
        c = static_cast<std::size_t>(center);
    return GroupedMPS(Grouping(name, std::move(groups)), std::move(ts), c);
}

} // namespace qcdmrg
