// qcdmrg: run, validate, compare and sample from a JSON run config.
// Exit codes: 0 ok, 1 config error, 2 runtime error.

#include "qcdmrg/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct Options {
    std::string config;
    std::vector<std::string> sets;
    std::vector<std::size_t> chi;
    std::vector<std::uint64_t> seed;
    std::optional<std::size_t> K, n_s, depth, jobs;
    std::string grouping, mode, metrics, results, trace, checkpoint, samples, out;
    bool oracle = false;
};

void add_common(CLI::App *cmd, Options &o) {
    cmd->add_option("config", o.config, "JSON run config")->required();
    cmd->add_option("--set", o.sets, "override a config field, e.g. --set circuit.depth=12");
    cmd->add_option("--chi", o.chi, "bond dimensions (one sweep point each)");
    cmd->add_option("--seed", o.seed, "circuit seeds (one sweep point each)");
    cmd->add_option("--K", o.K, "layers per compression step");
    cmd->add_option("--n-s", o.n_s, "sweeps per compression step");
    cmd->add_option("--depth", o.depth, "circuit depth");
    cmd->add_option("--jobs", o.jobs, "worker threads for sweep points");
    cmd->add_option("--grouping", o.grouping, "grouping name");
    cmd->add_option("--mode", o.mode, "open | closed | sample | analyze");
    cmd->add_flag("--oracle", o.oracle, "also compute exact F and F_B");
    cmd->add_option("--metrics", o.metrics, "metrics CSV path");
    cmd->add_option("--results", o.results, "results JSON path");
    cmd->add_option("--trace", o.trace, "sweep-trace CSV path");
    cmd->add_option("--checkpoint", o.checkpoint, "MPS checkpoint path");
    cmd->add_option("--samples", o.samples, "sample file path");
}

qcdmrg::RunConfig resolve(const Options &o) {
    using nlohmann::json;
    std::ifstream in(o.config);
    if (!in)
        throw qcdmrg::ConfigError("cannot read config file '" + o.config + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        throw qcdmrg::ConfigError("config file '" + o.config + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object())
        throw qcdmrg::ConfigError("config file '" + o.config + "' must hold a JSON object");
    for (const auto &s : o.sets)
        qcdmrg::apply_override(doc, s);
    if (!o.chi.empty())
        doc["chi"] = o.chi;
    if (!o.seed.empty())
        doc["seeds"]["circuit"] = o.seed;
    if (o.K)
        doc["K"] = *o.K;
    if (o.n_s)
        doc["n_s"] = *o.n_s;
    if (o.depth)
        doc["circuit"]["depth"] = *o.depth;
    if (o.jobs)
        doc["jobs"] = *o.jobs;
    if (!o.grouping.empty())
        doc["grouping"] = o.grouping;
    if (!o.mode.empty())
        doc["mode"] = o.mode;
    if (o.oracle)
        doc["oracle"] = true;
    const std::pair<const char *, const std::string *> paths[] = {
        {"metrics", &o.metrics}, {"results", &o.results},       {"trace", &o.trace},
        {"checkpoint", &o.checkpoint}, {"samples", &o.samples}, {"report", &o.out}};
    for (const auto &[key, value] : paths)
        if (!value->empty())
            doc["output"][key] = *value;
    return qcdmrg::parse_config(doc);
}

int do_validate(const Options &o) {
    const auto diagnostics = qcdmrg::validate(resolve(o));
    for (const auto &d : diagnostics)
        std::cerr << "error: " << d << '\n';
    if (!diagnostics.empty())
        return kConfigError;
    std::cout << "ok\n";
    return kOk;
}

int do_run(const Options &o, bool force_sample) {
    auto cfg = resolve(o);
    if (force_sample)
        cfg.mode = "sample";
    const auto summary = qcdmrg::run(cfg);
    std::cout << summary.points << " point(s)";
    for (const auto &f : summary.files)
        std::cout << "\nwrote " << f;
    std::cout << '\n';
    return kOk;
}

int do_compare(const Options &o) {
    const auto cfg = resolve(o);
    const auto rows = qcdmrg::compare_against_oracle(cfg);
    if (cfg.output.report.empty()) {
        qcdmrg::write_compare_report(std::cout, rows);
    } else {
        std::ofstream out(cfg.output.report);
        if (!out)
            throw qcdmrg::Error("cli", "cannot open '" + cfg.output.report + "' for writing");
        qcdmrg::write_compare_report(out, rows);
        std::cout << "wrote " << cfg.output.report << '\n';
    }
    return kOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Grouped-MPS quantum circuit simulator with DMRG-style compression"};
    app.require_subcommand(1);
    Options o;
    auto *run = app.add_subcommand("run", "execute the config's mode");
    auto *validate = app.add_subcommand("validate", "check a config without running it");
    auto *compare = app.add_subcommand("compare", "depth sweep against the dense oracle");
    auto *sample = app.add_subcommand("sample", "draw bitstrings (mode forced to sample)");
    for (auto *cmd : {run, validate, compare, sample})
        add_common(cmd, o);
    compare->add_option("--out", o.out, "report CSV path (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (validate->parsed())
            return do_validate(o);
        if (compare->parsed())
            return do_compare(o);
        return do_run(o, sample->parsed());
    } catch (const qcdmrg::ConfigError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const nlohmann::json::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}
