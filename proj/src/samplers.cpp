#include "qcdmrg/samplers.hpp"

#include "qcdmrg/error.hpp"

#include <cmath>
#include <fstream>

namespace qcdmrg {

namespace {

[[noreturn]] void fail(const std::string &what) { throw Error("samplers", what); }

Bitstring random_bitstring(std::size_t n, std::mt19937_64 &rng) {
    Bitstring x(n);
    for (auto &b : x)
        b = static_cast<std::uint8_t>(rng() & 1u);
    return x;
}

} // namespace

MetropolisResult metropolis_sample(const ProbabilityFn &prob, std::size_t n_qubits,
                                   std::size_t n_samples, std::size_t L, std::uint64_t seed,
                                   std::optional<std::size_t> burn_in) {
    if (L < 1)
        fail("thinning L must be >= 1");
    if (n_qubits == 0)
        fail("need at least one qubit");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    MetropolisResult res;
    const std::size_t skip = burn_in.value_or(100 * L);
    try {
        Bitstring x = random_bitstring(n_qubits, rng);
        double px = prob(x);
        std::size_t step = 0;
        while (res.samples.size() < n_samples) {
            Bitstring y = random_bitstring(n_qubits, rng);
            const double py = prob(y);
            ++res.proposals;
            if (px <= 0.0 || uni(rng) * px < py) {
                x = std::move(y);
                px = py;
                ++res.accepted;
            }
            ++step;
            if (step > skip && (step - skip) % L == 0)
                res.samples.push_back(x);
        }
    } catch (const std::exception &e) {
        res.aborted = true;
        res.abort_reason = e.what();
    }
    return res;
}

DensePrefixOracle::DensePrefixOracle(const Circuit &circuit) {
    StateVector s(circuit.n_qubits());
    states_.push_back(s);
    for (const auto &g : circuit.flattened()) {
        s.apply(g);
        states_.push_back(s);
    }
}

cplx DensePrefixOracle::operator()(std::size_t k, const Bitstring &x) const {
    return states_.at(k).amplitude(x);
}

Bitstring conditional_sample(const PrefixAmplitudeFn &amp, const Circuit &circuit,
                             std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Bitstring x(circuit.n_qubits(), 0);
    std::size_t k = 0;
    for (const auto &layer : circuit.layers()) {
        for (const auto &g : layer.gates) {
            ++k;
            const auto &t = g.targets();
            const std::size_t n_cand = std::size_t{1} << t.size();
            double p[4] = {0, 0, 0, 0};
            double total = 0.0;
            for (std::size_t c = 0; c < n_cand; ++c) {
                for (std::size_t i = 0; i < t.size(); ++i)
                    x[t[i]] = static_cast<std::uint8_t>((c >> (t.size() - 1 - i)) & 1u);
                p[c] = std::norm(amp(k, x));
                total += p[c];
            }
            if (!(total > 0.0))
                fail("all candidate probabilities vanish at gate " + std::to_string(k));
            double r = uni(rng) * total;
            std::size_t pick = n_cand - 1;
            for (std::size_t c = 0; c < n_cand; ++c) {
                if (r < p[c]) {
                    pick = c;
                    break;
                }
                r -= p[c];
            }
            for (std::size_t i = 0; i < t.size(); ++i)
                x[t[i]] = static_cast<std::uint8_t>((pick >> (t.size() - 1 - i)) & 1u);
        }
    }
    return x;
}

std::vector<Bitstring> conditional_samples(const PrefixAmplitudeFn &amp, const Circuit &circuit,
                                           std::size_t n_samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Bitstring> out;
    out.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i)
        out.push_back(conditional_sample(amp, circuit, rng));
    return out;
}

double chain_repetition_rate(std::size_t L, double p_acc) {
    if (L < 1 || !(p_acc >= 0.0 && p_acc <= 1.0))
        fail("need L >= 1 and p_acc in [0, 1]");
    return std::pow(1.0 - p_acc, static_cast<double>(L));
}

void write_samples(const std::string &path, const std::vector<Bitstring> &samples,
                   const std::map<std::string, std::string> &header) {
    std::ofstream out(path);
    if (!out)
        fail("cannot write " + path);
    for (const auto &[k, v] : header)
        out << "# " << k << ": " << v << '\n';
    for (const auto &x : samples)
        out << bitstring_to_string(x) << '\n';
}

std::vector<Bitstring> read_samples(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        fail("cannot read " + path);
    std::vector<Bitstring> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#')
            out.push_back(parse_bitstring(line));
    return out;
}

std::vector<double> empirical_distribution(const std::vector<Bitstring> &samples, std::size_t n_qubits) {
    std::vector<double> h(std::size_t{1} << n_qubits, 0.0);
    for (const auto &x : samples)
        h.at(bitstring_to_index(x)) += 1.0;
    for (auto &v : h)
        v /= static_cast<double>(samples.size());
    return h;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        fail("distributions differ in size");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

} // namespace qcdmrg
