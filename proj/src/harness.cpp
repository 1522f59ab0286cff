#include "qcdmrg/harness.hpp"

#include "qcdmrg/circuit_io.hpp"
#include "qcdmrg/exact_sim.hpp"
#include "qcdmrg/fidelity.hpp"
#include "qcdmrg/samplers.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace qcdmrg {

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string &what) { throw ConfigError(what); }

const std::vector<std::string> kStandardGroupings{"V1", "V2", "H1", "H2", "D1", "D2"};
const std::vector<std::string> kModes{"open", "closed", "sample", "analyze"};
const std::vector<std::string> kCircuitKinds{"sequence_I", "sequence_II", "sequence_III", "file"};

std::string join(const std::vector<std::string> &items, const std::string &sep = ", ") {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i)
        out += (i ? sep : "") + items[i];
    return out;
}

bool contains(const std::vector<std::string> &items, const std::string &x) {
    return std::find(items.begin(), items.end(), x) != items.end();
}

void check_keys(const json &obj, const std::string &where, const std::vector<std::string> &allowed) {
    if (!obj.is_object())
        config_fail(where + " must be an object");
    for (const auto &[key, _] : obj.items())
        if (!contains(allowed, key))
            config_fail("unknown key '" + where + key + "' (allowed: " + join(allowed) + ")");
}

template <class T> void read(const json &obj, const std::string &where, const char *key, T &out) {
    if (!obj.contains(key))
        return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception &) {
        config_fail("'" + where + key + "' has the wrong type: " + obj.at(key).dump());
    }
}

template <class T>
void read_opt(const json &obj, const std::string &where, const char *key, std::optional<T> &out) {
    if (!obj.contains(key) || obj.at(key).is_null())
        return;
    T v{};
    read(obj, where, key, v);
    out = v;
}

// A scalar or a list of scalars.
template <class T>
void read_list(const json &obj, const std::string &where, const char *key, std::vector<T> &out) {
    if (!obj.contains(key))
        return;
    const auto &v = obj.at(key);
    try {
        out = v.is_array() ? v.get<std::vector<T>>() : std::vector<T>{v.get<T>()};
    } catch (const json::exception &) {
        config_fail("'" + where + key + "' has the wrong type: " + v.dump());
    }
}

std::size_t circuit_depth_hint(const RunConfig &cfg) {
    if (cfg.circuit.kind == "file")
        return load_circuit(cfg.circuit.path).circuit.depth();
    if (cfg.circuit.kind == "sequence_III")
        return 0; // depends on the drawn graph
    return cfg.circuit.depth;
}

std::size_t circuit_qubits_hint(const RunConfig &cfg) {
    const auto &c = cfg.circuit;
    if (c.kind == "file")
        return load_circuit(c.path).circuit.n_qubits();
    if (c.kind == "sequence_III" && !c.compile)
        return c.n_qubits;
    if (c.n_b == 0 || c.n_c == 0)
        return 0;
    return build_topology(c.n_b, c.n_c, c.uniform_columns).n_qubits();
}

// path.ext -> path_p3.ext when a run has several points
std::string point_path(const std::string &path, std::size_t index, std::size_t n_points) {
    if (path.empty() || n_points == 1)
        return path;
    std::filesystem::path p(path);
    const auto stem = p.stem().string() + "_p" + std::to_string(index);
    return (p.parent_path() / (stem + p.extension().string())).string();
}

std::ofstream open_out(const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cli", "cannot open '" + path + "' for writing");
    return out;
}

CompressionConfig compression_of(const RunConfig &cfg, std::size_t chi) {
    CompressionConfig c;
    c.chi = chi;
    c.K = cfg.K;
    c.n_s = cfg.n_s;
    c.convergence_tol = cfg.convergence_tol;
    c.init = cfg.init == "random" ? InitStrategy::RandomMPS : InitStrategy::TruncatedApply;
    c.init_seed = cfg.seeds.init.value_or(0);
    return c;
}

ClosedConfig closed_of(const RunConfig &cfg, std::size_t chi, std::size_t depth) {
    const auto comp = compression_of(cfg, chi);
    ClosedConfig cc;
    const auto &s = cfg.closed;
    if (s.D1 || s.D2 || s.D3) {
        cc.D1 = s.D1.value_or(0);
        cc.D2 = s.D2.value_or(0);
        cc.D3 = s.D3.value_or(0);
        cc.forward = cc.backward = comp;
    } else {
        cc = ClosedConfig::with_defaults(depth, comp);
    }
    cc.max_middle_elements = s.max_middle_elements;
    return cc;
}

json sweep_point_json(const GeneratedCircuit &gc, std::size_t chi, const RunConfig &cfg) {
    return json{{"circuit_id", gc.id},    {"circuit_seed", gc.seed}, {"retries", gc.retries},
                {"chi", chi},             {"K", cfg.K},              {"n_s", cfg.n_s},
                {"grouping", cfg.grouping}, {"D", gc.circuit.depth()},
                {"n_2g", gc.circuit.two_qubit_count()}};
}

// The forward half of a closed run, read from a checkpoint written for the
// same circuit and chi or recomputed (and stored) otherwise.
ForwardCache forward_cache(const Circuit &circuit, const Grouping &grouping, const ClosedConfig &cc,
                           const std::string &id, const std::string &checkpoint, bool reuse) {
    const std::string meta_path = checkpoint + ".json";
    if (!checkpoint.empty() && reuse && std::filesystem::exists(checkpoint) &&
        std::filesystem::exists(meta_path)) {
        std::ifstream in(meta_path);
        json meta = json::parse(in);
        if (meta.at("circuit_id") != id || meta.at("chi") != cc.forward.chi ||
            meta.at("D1") != cc.D1 || meta.at("K") != cc.forward.K ||
            meta.at("n_s") != cc.forward.n_s)
            config_fail("checkpoint '" + checkpoint +
                        "' was written for a different circuit or compression; remove it or "
                        "set closed.reuse_checkpoint to false");
        return ForwardCache{load_checkpoint(checkpoint), meta.at("F_tilde").get<double>(),
                            meta.at("n_2g").get<std::size_t>()};
    }
    auto cache = run_forward(circuit, grouping, cc);
    if (!checkpoint.empty()) {
        save_checkpoint(checkpoint, cache.mps);
        json meta{{"schema_version", kResultsSchemaVersion},
                  {"circuit_id", id},
                  {"chi", cc.forward.chi},
                  {"K", cc.forward.K},
                  {"n_s", cc.forward.n_s},
                  {"D1", cc.D1},
                  {"F_tilde", cache.F_tilde},
                  {"n_2g", cache.n_2g}};
        open_out(meta_path) << meta.dump(2) << '\n';
    }
    return cache;
}

struct PointOutput {
    std::vector<MetricsRow> rows;
    json record;
    std::string trace_csv;
    std::vector<std::string> files;
};

// Runs `n` isolated jobs on up to `jobs` threads; `sink` receives the
// outputs in job order from a single appender.
void run_pool(std::size_t n, std::size_t jobs, const std::function<PointOutput(std::size_t)> &work,
              const std::function<void(std::size_t, PointOutput &)> &sink) {
    std::vector<std::optional<PointOutput>> done(n);
    std::size_t next_to_write = 0;
    std::atomic<std::size_t> next_job{0};
    std::exception_ptr error;
    std::mutex mu;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next_job.fetch_add(1);
            if (i >= n)
                return;
            {
                std::lock_guard lock(mu);
                if (error)
                    return;
            }
            try {
                auto out = work(i);
                std::lock_guard lock(mu);
                done[i] = std::move(out);
                while (next_to_write < n && done[next_to_write]) {
                    sink(next_to_write, *done[next_to_write]);
                    done[next_to_write].reset();
                    ++next_to_write;
                }
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error)
                    error = std::current_exception();
                return;
            }
        }
    };

    const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, n));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t)
            pool.emplace_back(worker);
        for (auto &t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);
}

PointOutput open_point(const RunConfig &cfg, const GeneratedCircuit &gc, std::size_t chi,
                       std::size_t index, std::size_t n_points) {
    const auto grouping = make_grouping(cfg.grouping, gc);
    auto res = run_open(gc.circuit, grouping, compression_of(cfg, chi));

    PointOutput out;
    MetricsRow row{gc.id, "open", chi, cfg.K, cfg.n_s, cfg.grouping, gc.circuit.depth(),
                   make_record(res.F_tilde, res.n_2g)};
    out.record = sweep_point_json(gc, chi, cfg);
    if (cfg.oracle) {
        const auto exact = evolve(gc.circuit);
        const auto approx = to_statevector(res.mps);
        const double F = fidelity(exact, approx);
        const double FB = xeb_exact(exact.probabilities(), approx.probabilities());
        row.record = make_record(res.F_tilde, res.n_2g, F, FB);
        out.record["F"] = F;
        out.record["F_B"] = FB;
    }
    out.record["F_tilde"] = res.F_tilde;
    out.record["eps_tilde"] = res.eps_tilde;
    out.record["f_deltas"] = res.f_deltas();
    out.record["bond_dims"] = res.mps.bond_dims();
    out.rows.push_back(row);

    if (!cfg.output.trace.empty()) {
        std::ostringstream t;
        write_trace_header(t);
        for (const auto &s : res.steps)
            write_trace_rows(t, s.step, s.trace);
        out.trace_csv = t.str();
    }
    if (!cfg.output.checkpoint.empty()) {
        const auto path = point_path(cfg.output.checkpoint, index, n_points);
        save_checkpoint(path, res.mps);
        out.record["checkpoint"] = path;
        out.files.push_back(path);
    }
    return out;
}

std::vector<Bitstring> parse_bitstrings(const std::vector<std::string> &texts, std::size_t n) {
    std::vector<Bitstring> xs;
    for (const auto &t : texts) {
        auto x = parse_bitstring(t);
        if (x.size() != n)
            config_fail("bitstring '" + t + "' has " + std::to_string(x.size()) +
                        " bits, the circuit has " + std::to_string(n) + " qubits");
        xs.push_back(std::move(x));
    }
    return xs;
}

PointOutput closed_point(const RunConfig &cfg, const GeneratedCircuit &gc, std::size_t chi,
                         std::size_t index, std::size_t n_points) {
    const auto grouping = make_grouping(cfg.grouping, gc);
    const auto cc = closed_of(cfg, chi, gc.circuit.depth());
    const auto xs = parse_bitstrings(cfg.closed.bitstrings, gc.circuit.n_qubits());
    const auto checkpoint = point_path(cfg.output.checkpoint, index, n_points);
    const auto cache =
        forward_cache(gc.circuit, grouping, cc, gc.id, checkpoint, cfg.closed.reuse_checkpoint);
    const auto results = run_closed_batch(cache, gc.circuit, xs, cc);

    std::optional<StateVector> exact;
    if (cfg.oracle)
        exact = evolve(gc.circuit);

    PointOutput out;
    out.record = sweep_point_json(gc, chi, cfg);
    out.record["D1"] = cc.D1;
    out.record["D2"] = cc.D2;
    out.record["D3"] = cc.D3;
    out.record["F_forward"] = cache.F_tilde;
    if (!checkpoint.empty()) {
        out.record["checkpoint"] = checkpoint;
        out.files.push_back(checkpoint);
    }
    json amps = json::array();
    for (const auto &r : results) {
        const auto xs_text = bitstring_to_string(r.x);
        json a{{"x", xs_text},
               {"amplitude", {r.amplitude.real(), r.amplitude.imag()}},
               {"F_tilde", r.F_tilde},
               {"F_forward", r.F_forward},
               {"F_backward", r.F_backward},
               {"eps_tilde", r.eps_tilde},
               {"eps_tilde_approx", r.eps_tilde_approx},
               {"n_2g_approx", r.n_2g_approx}};
        if (exact) {
            const cplx e = exact->amplitude(r.x);
            a["exact_amplitude"] = {e.real(), e.imag()};
        }
        amps.push_back(a);
        out.rows.push_back(MetricsRow{gc.id + "/" + xs_text, "closed", chi, cfg.K, cfg.n_s,
                                      cfg.grouping, gc.circuit.depth(),
                                      make_record(r.F_tilde, r.n_2g)});
    }
    out.record["amplitudes"] = amps;
    return out;
}

PointOutput sample_point(const RunConfig &cfg, const GeneratedCircuit &gc, std::size_t chi,
                         std::size_t index, std::size_t n_points) {
    const auto &s = cfg.sample;
    const std::size_t n = gc.circuit.n_qubits();
    const std::uint64_t seed = *cfg.seeds.sampler;
    double F_tilde = 1.0;
    std::size_t n_2g = gc.circuit.two_qubit_count();

    std::vector<Bitstring> samples;
    std::optional<double> acceptance;
    std::optional<StateVector> exact;
    if (s.amplitudes == "exact" || cfg.oracle)
        exact = evolve(gc.circuit);

    if (s.method == "conditional") {
        const DensePrefixOracle oracle(gc.circuit);
        samples = conditional_samples(
            [&](std::size_t k, const Bitstring &x) { return oracle(k, x); }, gc.circuit,
            s.n_samples, seed);
    } else {
        ProbabilityFn prob;
        std::optional<OpenRunResult> open;
        std::optional<ForwardCache> cache;
        std::optional<ClosedConfig> cc;
        if (s.amplitudes == "exact") {
            prob = [&](const Bitstring &x) { return std::norm(exact->amplitude(x)); };
        } else if (s.amplitudes == "open") {
            open = run_open(gc.circuit, make_grouping(cfg.grouping, gc), compression_of(cfg, chi));
            F_tilde = open->F_tilde;
            prob = [&](const Bitstring &x) { return std::norm(amplitude(open->mps, x)); };
        } else {
            cc = closed_of(cfg, chi, gc.circuit.depth());
            cache = forward_cache(gc.circuit, make_grouping(cfg.grouping, gc), *cc, gc.id,
                                  point_path(cfg.output.checkpoint, index, n_points),
                                  cfg.closed.reuse_checkpoint);
            prob = [&](const Bitstring &x) {
                return std::norm(run_closed_batch(*cache, gc.circuit, {x}, *cc).at(0).amplitude);
            };
        }
        auto res = metropolis_sample(prob, n, s.n_samples, s.L, seed, s.burn_in);
        if (res.aborted)
            throw Error("samplers", "Metropolis chain aborted: " + res.abort_reason);
        acceptance = res.acceptance();
        samples = std::move(res.samples);
    }

    PointOutput out;
    out.record = sweep_point_json(gc, chi, cfg);
    out.record["method"] = s.method;
    out.record["amplitudes"] = s.amplitudes;
    out.record["n_samples"] = samples.size();
    if (acceptance)
        out.record["acceptance"] = *acceptance;
    std::optional<double> FB;
    if (exact) {
        FB = xeb_estimate([&](const Bitstring &x) { return std::norm(exact->amplitude(x)); },
                          samples);
        out.record["F_B"] = *FB;
    }
    MetricsRow row{gc.id, "sample", chi, cfg.K, cfg.n_s, cfg.grouping, gc.circuit.depth(),
                   make_record(F_tilde, n_2g, std::nullopt, FB)};
    out.rows.push_back(row);

    if (!cfg.output.samples.empty()) {
        const auto path = point_path(cfg.output.samples, index, n_points);
        std::map<std::string, std::string> header{{"circuit_id", gc.id},
                                                  {"method", s.method},
                                                  {"amplitudes", s.amplitudes},
                                                  {"chi", std::to_string(chi)},
                                                  {"seed", std::to_string(seed)}};
        write_samples(path, samples, header);
        out.record["samples"] = path;
        out.files.push_back(path);
    }
    return out;
}

PointOutput analyze_point(const RunConfig &cfg, const GeneratedCircuit &gc, std::size_t chi,
                          std::size_t index, std::size_t n_points) {
    const auto path = point_path(cfg.output.samples, index, n_points);
    const auto samples = read_samples(path);
    for (const auto &x : samples)
        if (x.size() != gc.circuit.n_qubits())
            throw Error("cli", "sample file '" + path + "' does not match the circuit width");
    const auto exact = evolve(gc.circuit);
    const double FB =
        xeb_estimate([&](const Bitstring &x) { return std::norm(exact.amplitude(x)); }, samples);

    PointOutput out;
    out.record = sweep_point_json(gc, chi, cfg);
    out.record["samples"] = path;
    out.record["n_samples"] = samples.size();
    out.record["F_B"] = FB;
    out.rows.push_back(MetricsRow{gc.id, "analyze", chi, cfg.K, cfg.n_s, cfg.grouping,
                                  gc.circuit.depth(),
                                  make_record(1.0, gc.circuit.two_qubit_count(), std::nullopt, FB)});
    return out;
}

} // namespace

std::vector<std::string> valid_grouping_names() {
    auto names = kStandardGroupings;
    names.push_back("qubits");
    names.push_back("blocks:<sizes>");
    return names;
}

RunConfig parse_config(const json &doc) {
    RunConfig cfg;
    check_keys(doc, "",
               {"circuit", "grouping", "chi", "K", "n_s", "convergence_tol", "init", "mode", "oracle",
                "oracle_max_qubits", "jobs", "seeds", "closed", "sample", "output", "comment"});
    if (!doc.contains("circuit"))
        config_fail("missing 'circuit' section");

    const auto &c = doc.at("circuit");
    check_keys(c, "circuit.",
               {"kind", "n_b", "n_c", "uniform_columns", "depth", "path", "n_qubits", "edge_prob",
                "p_layers", "compile", "betas", "gammas", "target_n2g", "n2g_tolerance",
                "max_retries"});
    auto &cs = cfg.circuit;
    read(c, "circuit.", "kind", cs.kind);
    read(c, "circuit.", "n_b", cs.n_b);
    read(c, "circuit.", "n_c", cs.n_c);
    read(c, "circuit.", "uniform_columns", cs.uniform_columns);
    read(c, "circuit.", "depth", cs.depth);
    read(c, "circuit.", "path", cs.path);
    read(c, "circuit.", "n_qubits", cs.n_qubits);
    read(c, "circuit.", "edge_prob", cs.edge_prob);
    read(c, "circuit.", "p_layers", cs.p_layers);
    read(c, "circuit.", "compile", cs.compile);
    read_list(c, "circuit.", "betas", cs.betas);
    read_list(c, "circuit.", "gammas", cs.gammas);
    read_opt(c, "circuit.", "target_n2g", cs.target_n2g);
    read(c, "circuit.", "n2g_tolerance", cs.n2g_tolerance);
    read(c, "circuit.", "max_retries", cs.max_retries);

    read(doc, "", "grouping", cfg.grouping);
    read_list(doc, "", "chi", cfg.chi);
    read(doc, "", "K", cfg.K);
    read(doc, "", "n_s", cfg.n_s);
    read_opt(doc, "", "convergence_tol", cfg.convergence_tol);
    read(doc, "", "init", cfg.init);
    read(doc, "", "mode", cfg.mode);
    read(doc, "", "oracle", cfg.oracle);
    read(doc, "", "oracle_max_qubits", cfg.oracle_max_qubits);
    read(doc, "", "jobs", cfg.jobs);

    if (doc.contains("seeds")) {
        const auto &s = doc.at("seeds");
        check_keys(s, "seeds.", {"circuit", "init", "sampler", "params"});
        read_list(s, "seeds.", "circuit", cfg.seeds.circuit);
        read_opt(s, "seeds.", "init", cfg.seeds.init);
        read_opt(s, "seeds.", "sampler", cfg.seeds.sampler);
        read_opt(s, "seeds.", "params", cfg.seeds.params);
    }
    if (doc.contains("closed")) {
        const auto &s = doc.at("closed");
        check_keys(s, "closed.",
                   {"D1", "D2", "D3", "bitstrings", "reuse_checkpoint", "max_middle_elements"});
        read_opt(s, "closed.", "D1", cfg.closed.D1);
        read_opt(s, "closed.", "D2", cfg.closed.D2);
        read_opt(s, "closed.", "D3", cfg.closed.D3);
        read_list(s, "closed.", "bitstrings", cfg.closed.bitstrings);
        read(s, "closed.", "reuse_checkpoint", cfg.closed.reuse_checkpoint);
        read(s, "closed.", "max_middle_elements", cfg.closed.max_middle_elements);
    }
    if (doc.contains("sample")) {
        const auto &s = doc.at("sample");
        check_keys(s, "sample.", {"method", "amplitudes", "n_samples", "L", "burn_in"});
        read(s, "sample.", "method", cfg.sample.method);
        read(s, "sample.", "amplitudes", cfg.sample.amplitudes);
        read(s, "sample.", "n_samples", cfg.sample.n_samples);
        read(s, "sample.", "L", cfg.sample.L);
        read_opt(s, "sample.", "burn_in", cfg.sample.burn_in);
    }
    if (doc.contains("output")) {
        const auto &s = doc.at("output");
        check_keys(s, "output.", {"metrics", "results", "trace", "checkpoint", "samples", "report"});
        read(s, "output.", "metrics", cfg.output.metrics);
        read(s, "output.", "results", cfg.output.results);
        read(s, "output.", "trace", cfg.output.trace);
        read(s, "output.", "checkpoint", cfg.output.checkpoint);
        read(s, "output.", "samples", cfg.output.samples);
        read(s, "output.", "report", cfg.output.report);
    }
    return cfg;
}

RunConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        config_fail("cannot read config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        config_fail("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

json config_to_json(const RunConfig &cfg) {
    const auto &c = cfg.circuit;
    json circuit{{"kind", c.kind}};
    if (c.kind == "file") {
        circuit["path"] = c.path;
    } else {
        if (c.kind != "sequence_III" || c.compile) {
            circuit["n_b"] = c.n_b;
            circuit["n_c"] = c.n_c;
            circuit["uniform_columns"] = c.uniform_columns;
        }
        if (c.kind == "sequence_III") {
            circuit["n_qubits"] = c.n_qubits;
            circuit["edge_prob"] = c.edge_prob;
            circuit["p_layers"] = c.p_layers;
            circuit["compile"] = c.compile;
            if (!c.betas.empty())
                circuit["betas"] = c.betas;
            if (!c.gammas.empty())
                circuit["gammas"] = c.gammas;
            if (c.target_n2g) {
                circuit["target_n2g"] = *c.target_n2g;
                circuit["n2g_tolerance"] = c.n2g_tolerance;
                circuit["max_retries"] = c.max_retries;
            }
        } else {
            circuit["depth"] = c.depth;
        }
    }
    json seeds{{"circuit", cfg.seeds.circuit}};
    if (cfg.seeds.init)
        seeds["init"] = *cfg.seeds.init;
    if (cfg.seeds.sampler)
        seeds["sampler"] = *cfg.seeds.sampler;
    if (cfg.seeds.params)
        seeds["params"] = *cfg.seeds.params;

    json doc{{"circuit", circuit}, {"grouping", cfg.grouping}, {"chi", cfg.chi},
             {"K", cfg.K},         {"n_s", cfg.n_s},           {"init", cfg.init},
             {"mode", cfg.mode},   {"oracle", cfg.oracle},     {"seeds", seeds}};
    if (cfg.convergence_tol)
        doc["convergence_tol"] = *cfg.convergence_tol;
    const auto &cs = cfg.closed;
    if (cfg.mode == "closed" || (cfg.mode == "sample" && cfg.sample.amplitudes == "closed") ||
        cs.D1 || cs.D2 || cs.D3 || !cs.bitstrings.empty()) {
        json closed{{"bitstrings", cs.bitstrings},
                    {"reuse_checkpoint", cs.reuse_checkpoint},
                    {"max_middle_elements", cs.max_middle_elements}};
        if (cs.D1)
            closed["D1"] = *cs.D1;
        if (cs.D2)
            closed["D2"] = *cs.D2;
        if (cs.D3)
            closed["D3"] = *cs.D3;
        doc["closed"] = closed;
    }
    if (cfg.mode == "sample") {
        json sample{{"method", cfg.sample.method},
                    {"amplitudes", cfg.sample.amplitudes},
                    {"n_samples", cfg.sample.n_samples},
                    {"L", cfg.sample.L}};
        if (cfg.sample.burn_in)
            sample["burn_in"] = *cfg.sample.burn_in;
        doc["sample"] = sample;
    }
    return doc;
}

void apply_override(json &doc, const std::string &assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        config_fail("override '" + assignment + "' is not of the form key.path=value");
    std::string pointer;
    std::stringstream keys(assignment.substr(0, eq));
    for (std::string key; std::getline(keys, key, '.');)
        pointer += "/" + key;
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error &) {
        value = text;
    }
    doc[json::json_pointer(pointer)] = value;
}

std::vector<std::string> validate(const RunConfig &cfg) {
    std::vector<std::string> d;
    const auto &c = cfg.circuit;

    if (!contains(kModes, cfg.mode))
        d.push_back("unknown mode '" + cfg.mode + "' (valid: " + join(kModes) + ")");
    if (!contains(kCircuitKinds, c.kind)) {
        d.push_back("unknown circuit.kind '" + c.kind + "' (valid: " + join(kCircuitKinds) + ")");
        return d;
    }

    bool has_topology = false;
    if (c.kind == "sequence_I" || c.kind == "sequence_II" || (c.kind == "sequence_III" && c.compile)) {
        if (c.n_b < 2 || c.n_c < 2 || c.n_c % 2 != 0)
            d.push_back("circuit.n_b must be at least 2 and circuit.n_c even and at least 2 (got n_b = " +
                        std::to_string(c.n_b) + ", n_c = " + std::to_string(c.n_c) + ")");
        else
            has_topology = true;
    }
    if ((c.kind == "sequence_I" || c.kind == "sequence_II") && c.depth < 1)
        d.push_back("circuit.depth must be at least 1");
    if (c.kind == "file") {
        if (c.path.empty())
            d.push_back("circuit.path is required for circuit.kind 'file'");
        else if (!std::filesystem::exists(c.path))
            d.push_back("circuit file '" + c.path + "' does not exist");
        else {
            try {
                has_topology = load_circuit(c.path).topology.has_value();
            } catch (const std::exception &e) {
                d.push_back(std::string("circuit file is unreadable: ") + e.what());
                return d;
            }
        }
    }
    if (c.kind == "sequence_III") {
        if (c.n_qubits < 1)
            d.push_back("circuit.n_qubits must be at least 1");
        if (!(c.edge_prob > 0.0 && c.edge_prob < 1.0))
            d.push_back("circuit.edge_prob must lie in (0, 1)");
        if (c.p_layers < 1)
            d.push_back("circuit.p_layers must be at least 1");
        if (!c.betas.empty() && c.betas.size() != c.p_layers)
            d.push_back("circuit.betas needs exactly p_layers entries");
        if (!c.gammas.empty() && c.gammas.size() != c.p_layers)
            d.push_back("circuit.gammas needs exactly p_layers entries");
        if (c.betas.empty() != c.gammas.empty())
            d.push_back("give both circuit.betas and circuit.gammas or neither");
        if (has_topology &&
            c.n_qubits > build_topology(c.n_b, c.n_c, c.uniform_columns).n_qubits())
            d.push_back("circuit.n_qubits exceeds the qubits of the compile target");
        if (c.max_retries < 1)
            d.push_back("circuit.max_retries must be at least 1");
    } else if (c.target_n2g) {
        d.push_back("circuit.target_n2g only applies to sequence_III");
    }
    // checks below that need the circuit shape run only when it is well defined
    const bool circuit_ok = d.empty();
    const std::size_t n_hint = circuit_ok ? circuit_qubits_hint(cfg) : 0;

    if (c.kind != "file" && cfg.seeds.circuit.empty())
        d.push_back("seeds.circuit is required: every circuit draw needs an explicit seed");
    if (cfg.init == "random" && !cfg.seeds.init)
        d.push_back("seeds.init is required with init 'random'");
    if (cfg.init != "random" && cfg.init != "truncated")
        d.push_back("unknown init '" + cfg.init + "' (valid: truncated, random)");

    const auto &g = cfg.grouping;
    if (g.rfind("blocks:", 0) == 0) {
        std::size_t total = 0;
        bool numeric = true;
        std::stringstream in(g.substr(7));
        for (std::string item; std::getline(in, item, ',');) {
            if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
                d.push_back("grouping '" + g + "' has a non-numeric block size '" + item + "'");
                numeric = false;
                break;
            }
            total += std::stoul(item);
        }
        if (numeric && n_hint > 0 && total != n_hint)
            d.push_back("grouping '" + g + "' covers " + std::to_string(total) +
                        " qubits, the circuit has " + std::to_string(n_hint));
    } else if (g == "qubits") {
    } else if (contains(kStandardGroupings, g)) {
        if (!has_topology && d.empty())
            d.push_back("grouping '" + g +
                        "' needs a grid topology; this circuit has none (use qubits or blocks:...)");
        else if (has_topology && c.kind != "file") {
            try {
                standard_grouping(build_topology(c.n_b, c.n_c, c.uniform_columns), g);
            } catch (const std::exception &e) {
                d.push_back("grouping '" + g + "' is incompatible with the topology: " + e.what());
            }
        }
    } else {
        d.push_back("unknown grouping '" + g + "' (valid: " + join(valid_grouping_names()) + ")");
    }

    if (cfg.chi.empty())
        d.push_back("chi needs at least one value");
    for (auto chi : cfg.chi)
        if (chi < 1)
            d.push_back("chi must be at least 1");
    if (cfg.K < 1)
        d.push_back("K must be at least 1");
    if (cfg.n_s < 1)
        d.push_back("n_s must be at least 1");
    if (cfg.convergence_tol && *cfg.convergence_tol < 0)
        d.push_back("convergence_tol must be non-negative");
    if (cfg.jobs < 1)
        d.push_back("jobs must be at least 1");

    const bool needs_closed =
        cfg.mode == "closed" || (cfg.mode == "sample" && cfg.sample.amplitudes == "closed");
    if (needs_closed && circuit_ok) {
        const auto &s = cfg.closed;
        if (s.D1 || s.D2 || s.D3) {
            const std::size_t sum = s.D1.value_or(0) + s.D2.value_or(0) + s.D3.value_or(0);
            const std::size_t depth = circuit_depth_hint(cfg);
            if (depth > 0 && sum != depth)
                d.push_back("closed.D1 + closed.D2 + closed.D3 = " + std::to_string(sum) +
                            " but the circuit depth is D = " + std::to_string(depth) +
                            "; the constraint D1 + D2 + D3 = D must hold");
        }
        if (cfg.mode == "closed" && s.bitstrings.empty())
            d.push_back("closed mode needs closed.bitstrings");
        for (const auto &x : s.bitstrings)
            if ((n_hint > 0 && x.size() != n_hint) ||
                x.find_first_not_of("01") != std::string::npos)
                d.push_back("closed.bitstrings entry '" + x + "' is not a string of " +
                            std::to_string(n_hint) + " characters 0 or 1");
    }
    if (cfg.mode == "sample") {
        const auto &s = cfg.sample;
        if (s.method != "metropolis" && s.method != "conditional")
            d.push_back("unknown sample.method '" + s.method + "' (valid: metropolis, conditional)");
        if (s.amplitudes != "open" && s.amplitudes != "closed" && s.amplitudes != "exact")
            d.push_back("unknown sample.amplitudes '" + s.amplitudes +
                        "' (valid: open, closed, exact)");
        if (s.method == "conditional" && s.amplitudes != "exact")
            d.push_back("sample.method 'conditional' needs gate-prefix amplitudes; set "
                        "sample.amplitudes to 'exact'");
        if (s.n_samples < 1)
            d.push_back("sample.n_samples must be at least 1");
        if (s.L < 1)
            d.push_back("sample.L must be at least 1");
        if (!cfg.seeds.sampler)
            d.push_back("seeds.sampler is required in sample mode");
    }
    if (cfg.mode == "analyze" && cfg.output.samples.empty())
        d.push_back("analyze mode reads output.samples; set it to the sample file");

    const bool dense = cfg.oracle || cfg.mode == "analyze" ||
                       (cfg.mode == "sample" && cfg.sample.amplitudes == "exact");
    if (dense && d.empty()) {
        const std::size_t n = circuit_qubits_hint(cfg);
        if (n > cfg.oracle_max_qubits)
            d.push_back("the dense oracle is limited to " + std::to_string(cfg.oracle_max_qubits) +
                        " qubits (oracle_max_qubits) but the circuit has " + std::to_string(n));
    }
    return d;
}

GeneratedCircuit generate_circuit(const CircuitSpec &spec, std::uint64_t seed,
                                  std::optional<std::uint64_t> params_seed) {
    if (spec.kind == "file") {
        auto doc = load_circuit(spec.path);
        return GeneratedCircuit{std::move(doc.circuit), std::move(doc.topology),
                                std::filesystem::path(spec.path).stem().string(), seed, 0};
    }
    if (spec.kind == "sequence_I" || spec.kind == "sequence_II") {
        auto topo = build_topology(spec.n_b, spec.n_c, spec.uniform_columns);
        auto circ = spec.kind == "sequence_I" ? sequence_I(topo, spec.depth, seed)
                                              : sequence_II(topo, spec.depth, seed);
        const std::string id = std::string(spec.kind == "sequence_I" ? "seqI" : "seqII") + "-b" +
                               std::to_string(spec.n_b) + "c" + std::to_string(spec.n_c) +
                               (spec.uniform_columns ? "u" : "") + "-D" +
                               std::to_string(spec.depth) + "-s" + std::to_string(seed);
        return GeneratedCircuit{std::move(circ), std::move(topo), id, seed, 0};
    }
    if (spec.kind != "sequence_III")
        config_fail("unknown circuit.kind '" + spec.kind + "'");

    std::optional<GridTopology> topo;
    if (spec.compile)
        topo = build_topology(spec.n_b, spec.n_c, spec.uniform_columns);
    // retry seeds come from a stream keyed by the requested seed, so
    // neighboring requested seeds never land on the same draw
    std::mt19937_64 retry_stream(seed);
    for (std::size_t r = 0; r < spec.max_retries; ++r) {
        const std::uint64_t s = r == 0 ? seed : retry_stream();
        QaoaConfig q;
        q.n_qubits = spec.n_qubits;
        q.edge_prob = spec.edge_prob;
        q.p_layers = spec.p_layers;
        q.seed = s;
        q.compile_to = topo;
        q.betas = spec.betas;
        q.gammas = spec.gammas;
        if (q.betas.empty()) {
            std::mt19937_64 rng(params_seed.value_or(s + 1000));
            std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
            for (std::size_t k = 0; k < spec.p_layers; ++k) {
                q.betas.push_back(angle(rng));
                q.gammas.push_back(angle(rng));
            }
        }
        auto circ = sequence_III(q);
        const std::size_t n2 = circ.two_qubit_count();
        if (spec.target_n2g) {
            const std::size_t t = *spec.target_n2g;
            const std::size_t diff = n2 > t ? n2 - t : t - n2;
            if (diff > spec.n2g_tolerance)
                continue;
        }
        std::ostringstream id;
        id << "qaoa-n" << spec.n_qubits << "-P" << spec.edge_prob << "-p" << spec.p_layers << "-s"
           << s;
        return GeneratedCircuit{std::move(circ), std::move(topo), id.str(), s, r};
    }
    throw Error("circuit", "no sequence III draw within " + std::to_string(spec.max_retries) +
                               " retries has N_2g within " + std::to_string(spec.n2g_tolerance) +
                               " of " + std::to_string(*spec.target_n2g));
}

Grouping make_grouping(const std::string &name, const GeneratedCircuit &gc) {
    const std::size_t n = gc.circuit.n_qubits();
    if (name == "qubits")
        return single_qubit_grouping(n);
    if (name.rfind("blocks:", 0) == 0) {
        std::vector<std::size_t> sizes;
        std::stringstream in(name.substr(7));
        std::size_t total = 0;
        for (std::string item; std::getline(in, item, ',');) {
            try {
                sizes.push_back(std::stoul(item));
            } catch (const std::exception &) {
                config_fail("grouping '" + name + "' has a non-numeric block size '" + item + "'");
            }
            total += sizes.back();
        }
        if (total != n)
            config_fail("grouping '" + name + "' covers " + std::to_string(total) +
                        " qubits, the circuit has " + std::to_string(n));
        return contiguous_grouping(sizes, name);
    }
    if (!gc.topology)
        config_fail("grouping '" + name + "' needs a grid topology; this circuit has none");
    return standard_grouping(*gc.topology, name);
}

RunSummary run(const RunConfig &cfg) {
    const auto diagnostics = validate(cfg);
    if (!diagnostics.empty())
        config_fail(join(diagnostics, "; "));

    std::vector<std::uint64_t> seeds = cfg.seeds.circuit;
    if (seeds.empty())
        seeds.push_back(0); // circuit files carry no seed
    struct Point {
        std::uint64_t seed;
        std::size_t chi;
    };
    std::vector<Point> points;
    for (auto s : seeds)
        for (auto chi : cfg.chi)
            points.push_back({s, chi});
    const std::size_t n_points = points.size();

    RunSummary summary;
    summary.points = n_points;
    std::optional<std::ofstream> metrics, trace;
    if (!cfg.output.metrics.empty()) {
        metrics = open_out(cfg.output.metrics);
        write_metrics_header(*metrics);
        summary.files.push_back(cfg.output.metrics);
    }
    json records = json::array();

    auto work = [&](std::size_t i) {
        const auto gc = generate_circuit(cfg.circuit, points[i].seed, cfg.seeds.params);
        if (cfg.mode == "open")
            return open_point(cfg, gc, points[i].chi, i, n_points);
        if (cfg.mode == "closed")
            return closed_point(cfg, gc, points[i].chi, i, n_points);
        if (cfg.mode == "sample")
            return sample_point(cfg, gc, points[i].chi, i, n_points);
        return analyze_point(cfg, gc, points[i].chi, i, n_points);
    };
    auto sink = [&](std::size_t i, PointOutput &out) {
        if (metrics)
            for (const auto &row : out.rows)
                write_metrics_row(*metrics, row);
        if (!cfg.output.trace.empty() && !out.trace_csv.empty()) {
            const auto path = point_path(cfg.output.trace, i, n_points);
            open_out(path) << out.trace_csv;
            summary.files.push_back(path);
        }
        for (auto &f : out.files)
            summary.files.push_back(f);
        records.push_back(std::move(out.record));
    };
    run_pool(n_points, cfg.jobs, work, sink);

    if (!cfg.output.results.empty()) {
        json doc{{"schema_version", kResultsSchemaVersion},
                 {"mode", cfg.mode},
                 {"config", config_to_json(cfg)},
                 {"points", records}};
        open_out(cfg.output.results) << doc.dump(2) << '\n';
        summary.files.push_back(cfg.output.results);
    }
    return summary;
}

std::vector<CompareRow> compare_against_oracle(const RunConfig &cfg) {
    const auto diagnostics = validate(cfg);
    if (!diagnostics.empty())
        config_fail(join(diagnostics, "; "));
    const auto gc = generate_circuit(cfg.circuit, cfg.seeds.circuit.empty() ? 0 : cfg.seeds.circuit[0],
                                     cfg.seeds.params);
    const std::size_t n = gc.circuit.n_qubits();
    if (n > cfg.oracle_max_qubits)
        config_fail("compare needs the dense oracle, limited to " +
                    std::to_string(cfg.oracle_max_qubits) + " qubits; the circuit has " +
                    std::to_string(n));
    const auto grouping = make_grouping(cfg.grouping, gc);

    StateVector exact(n);
    std::vector<CompareRow> rows;
    {
        const auto P = exact.probabilities();
        rows.push_back({0, 0, 1.0, 1.0, xeb_exact(P, P), 1.0});
    }
    double F_tilde = 1.0;
    std::size_t n_2g = 0;
    run_open(gc.circuit, grouping, compression_of(cfg, cfg.chi.at(0)),
             [&](const StepRecord &r, const GroupedMPS &mps) {
                 for (std::size_t l = r.layer_begin; l < r.layer_end; ++l) {
                     const auto &layer = gc.circuit.layers()[l];
                     for (const auto &g : layer.gates)
                         exact.apply(g);
                     n_2g += layer.two_qubit_count();
                 }
                 F_tilde *= r.f;
                 const auto approx = to_statevector(mps);
                 const double F = fidelity(exact, approx);
                 const double FB = xeb_exact(exact.probabilities(), approx.probabilities());
                 rows.push_back({r.layer_end, n_2g, F, F_tilde, FB, std::sqrt(F)});
             });
    return rows;
}

void write_compare_report(std::ostream &out, const std::vector<CompareRow> &rows) {
    const auto old = out.precision(17);
    out << kCompareHeader << '\n';
    for (const auto &r : rows)
        out << r.D << ',' << r.n_2g << ',' << r.F << ',' << r.F_tilde << ',' << r.F_B << ','
            << r.sqrt_F << ',' << r.F_B / r.sqrt_F << '\n';
    out.precision(old);
}

} // namespace qcdmrg
