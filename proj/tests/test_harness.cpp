#include "qcdmrg/harness.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qcdmrg;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string &name) {
    const auto dir = std::filesystem::temp_directory_path() / "qcdmrg_harness_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string slurp(const std::filesystem::path &p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json small_open() {
    return json::parse(R"({
      "circuit": {"kind": "sequence_I", "n_b": 3, "n_c": 4, "depth": 6},
      "chi": [2, 4], "n_s": 2, "mode": "open", "oracle": true,
      "seeds": {"circuit": [1, 2]}
    })");
}

bool mentions(const std::vector<std::string> &diags, const std::string &needle) {
    for (const auto &d : diags)
        if (d.find(needle) != std::string::npos)
            return true;
    return false;
}

} // namespace

TEST(Config, DefaultsAndScalarsAsLists) {
    const auto cfg = parse_config(json::parse(
        R"({"circuit": {"n_b": 2, "n_c": 4, "depth": 3}, "chi": 8, "seeds": {"circuit": 5}})"));
    EXPECT_EQ(cfg.circuit.kind, "sequence_I");
    EXPECT_EQ(cfg.grouping, "V1");
    EXPECT_EQ(cfg.chi, std::vector<std::size_t>{8});
    EXPECT_EQ(cfg.seeds.circuit, std::vector<std::uint64_t>{5});
    EXPECT_EQ(cfg.mode, "open");
    EXPECT_EQ(cfg.K, 1u);
    EXPECT_TRUE(validate(cfg).empty());
}

TEST(Config, UnknownKeyAndBadTypeNameTheKey) {
    auto doc = small_open();
    doc["circuit"]["dpeth"] = 4;
    try {
        parse_config(doc);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError &e) {
        EXPECT_NE(std::string(e.what()).find("dpeth"), std::string::npos) << e.what();
    }
    doc = small_open();
    doc["K"] = "two";
    try {
        parse_config(doc);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError &e) {
        EXPECT_NE(std::string(e.what()).find("K"), std::string::npos) << e.what();
    }
}

TEST(Config, OverridesParseJsonOrKeepStrings) {
    auto doc = small_open();
    apply_override(doc, "circuit.depth=9");
    apply_override(doc, "grouping=H1");
    apply_override(doc, "output.metrics=out/x.csv");
    const auto cfg = parse_config(doc);
    EXPECT_EQ(cfg.circuit.depth, 9u);
    EXPECT_EQ(cfg.grouping, "H1");
    EXPECT_EQ(cfg.output.metrics, "out/x.csv");
    EXPECT_THROW(apply_override(doc, "no_equals_sign"), ConfigError);
}

TEST(Config, JsonRoundTrip) {
    auto doc = small_open();
    doc["closed"] = json::parse(R"({"D1": 2, "D2": 2, "D3": 2, "bitstrings": ["0000000000"]})");
    const auto a = parse_config(doc);
    const auto b = parse_config(config_to_json(a));
    EXPECT_EQ(config_to_json(a), config_to_json(b));
    EXPECT_EQ(b.closed.D2, std::optional<std::size_t>{2});
}

TEST(Validate, ReportsEveryProblem) {
    auto doc = small_open();
    doc["mode"] = "closed";
    doc["closed"] = json::parse(R"({"D1": 2, "D2": 2, "D3": 3, "bitstrings": ["01"]})");
    doc["grouping"] = "Z9";
    doc["chi"] = json::array({0});
    const auto diags = validate(parse_config(doc));
    EXPECT_TRUE(mentions(diags, "closed.D3 = 7"));
    EXPECT_TRUE(mentions(diags, "Z9"));
    EXPECT_TRUE(mentions(diags, "chi"));
    EXPECT_TRUE(mentions(diags, "01"));
    EXPECT_GE(diags.size(), 4u);
}

TEST(Validate, OddColumnCountIsRejected) {
    auto doc = small_open();
    doc["circuit"]["n_c"] = 5;
    EXPECT_TRUE(mentions(validate(parse_config(doc)), "n_c"));
}

TEST(Validate, GroupingNames) {
    const auto names = valid_grouping_names();
    for (const char *n : {"V1", "V2", "H1", "H2", "D1", "D2", "qubits"})
        EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
    auto doc = small_open();
    doc["grouping"] = "blocks:3,3,4";
    EXPECT_TRUE(validate(parse_config(doc)).empty());
    doc["grouping"] = "blocks:3,3";
    EXPECT_FALSE(validate(parse_config(doc)).empty());
}

TEST(Generate, SeedsAreDeterministicAndIdsDescribeTheCircuit) {
    const auto cfg = parse_config(small_open());
    const auto a = generate_circuit(cfg.circuit, 7);
    const auto b = generate_circuit(cfg.circuit, 7);
    const auto c = generate_circuit(cfg.circuit, 8);
    EXPECT_EQ(a.id, b.id);
    EXPECT_NE(a.id, c.id);
    EXPECT_EQ(a.circuit.depth(), 6u);
    EXPECT_EQ(a.circuit.two_qubit_count(), b.circuit.two_qubit_count());
    EXPECT_EQ(make_grouping("V1", a).size(), 3u);
}

TEST(Generate, QaoaRetriesUntilGateCountIsNearTarget) {
    CircuitSpec spec;
    spec.kind = "sequence_III";
    spec.n_qubits = 10;
    spec.edge_prob = 0.3;
    spec.n_b = 2;
    spec.n_c = 6;
    spec.uniform_columns = true;
    spec.target_n2g = 40;
    spec.n2g_tolerance = 8;
    const auto gc = generate_circuit(spec, 3);
    const long n2g = static_cast<long>(gc.circuit.two_qubit_count());
    EXPECT_LE(std::abs(n2g - 40), 8) << gc.retries << " retries";
    EXPECT_EQ(gc.circuit.n_qubits(), 12u); // compiled onto the 2 x 6 grid
    spec.max_retries = 0;
    spec.target_n2g = 100000;
    EXPECT_THROW(generate_circuit(spec, 3), Error);
}

TEST(Run, OpenSweepIsDeterministicAcrossJobCounts) {
    auto doc = small_open();
    doc["output"]["metrics"] = scratch("serial.csv").string();
    doc["output"]["results"] = scratch("serial.json").string();
    const auto serial = run(parse_config(doc));
    EXPECT_EQ(serial.points, 4u);
    doc["jobs"] = 3;
    doc["output"]["metrics"] = scratch("pool.csv").string();
    doc["output"]["results"] = scratch("pool.json").string();
    run(parse_config(doc));
    const auto csv = slurp(scratch("serial.csv"));
    EXPECT_EQ(csv, slurp(scratch("pool.csv")));
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
    const auto results = json::parse(slurp(scratch("serial.json")));
    EXPECT_EQ(results["schema_version"], kResultsSchemaVersion);
    EXPECT_EQ(results["points"].size(), 4u);
}

TEST(Run, InvalidConfigThrowsConfigError) {
    auto doc = small_open();
    doc["circuit"]["n_b"] = 1;
    EXPECT_THROW(run(parse_config(doc)), ConfigError);
}

TEST(Run, ClosedCheckpointMustMatch) {
    auto doc = json::parse(R"({
      "circuit": {"kind": "sequence_II", "n_b": 3, "n_c": 4, "depth": 6},
      "chi": 4, "mode": "closed", "seeds": {"circuit": 1},
      "closed": {"D1": 2, "D2": 2, "D3": 2, "bitstrings": ["0000000000", "1111100000"]}
    })");
    const auto ckpt = scratch("closed.mps");
    std::filesystem::remove(ckpt);
    doc["output"]["checkpoint"] = ckpt.string();
    doc["output"]["results"] = scratch("closed_a.json").string();
    run(parse_config(doc));
    EXPECT_TRUE(std::filesystem::exists(ckpt));
    // reusing the checkpoint gives identical amplitudes
    doc["output"]["results"] = scratch("closed_b.json").string();
    run(parse_config(doc));
    const auto a = json::parse(slurp(scratch("closed_a.json")));
    const auto b = json::parse(slurp(scratch("closed_b.json")));
    EXPECT_EQ(a["points"], b["points"]);
    doc["chi"] = 2;
    EXPECT_THROW(run(parse_config(doc)), ConfigError);
}

TEST(Compare, DepthZeroRowIsTheProductState) {
    auto doc = small_open();
    const auto rows = compare_against_oracle(parse_config(doc));
    ASSERT_EQ(rows.size(), 7u);
    EXPECT_EQ(rows[0].D, 0u);
    EXPECT_EQ(rows[0].F, 1.0);
    EXPECT_EQ(rows[0].F_tilde, 1.0);
    EXPECT_NEAR(rows[0].F_B, 1023.0, 1e-9);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].D, i);
        EXPECT_LE(rows[i].F_tilde, rows[i - 1].F_tilde + 1e-12);
        EXPECT_NEAR(rows[i].sqrt_F, std::sqrt(rows[i].F), 1e-15);
    }
    std::ostringstream out;
    write_compare_report(out, rows);
    EXPECT_EQ(out.str().rfind(std::string(kCompareHeader) + "\n0,0,", 0), 0u) << out.str();
}
