#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"

#include "eacsi/capacity.h"
#include "eacsi/cli.h"
#include "eacsi/rpchannel.h"
#include "eacsi/verify.h"

using namespace eacsi;
using nlohmann::json;

namespace {

const std::string kData = EACSI_DATA_DIR;

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

CliRun run(std::vector<std::string> args) {
    std::ostringstream out, err;
    CliRun r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

json run_json(std::vector<std::string> args) {
    args.push_back("--json");
    const CliRun r = run(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return json::parse(r.out);
}

std::string channel(const std::string& name) { return kData + "/channels/" + name + ".json"; }
std::string classical(const std::string& name) { return kData + "/classical/" + name + ".json"; }

std::string tmp_path(const std::string& name) { return ::testing::TempDir() + "eacsi_cli_" + name; }

double h2(double p) { return -p * std::log2(p) - (1 - p) * std::log2(1 - p); }

}  // namespace

TEST(CliCapacity, DephasingNoncausalReachesTwo) {
    const json j = run_json({"capacity", "--channel", channel("dephasing"), "--scenario", "noncausal", "--restarts",
                             "32", "--seed", "7"});
    EXPECT_GE(j["result"]["value_bits"].get<double>(), 1.95);
    EXPECT_EQ(j["result"]["scenario"], "noncausal");
}

TEST(CliCapacity, DephasingWithoutSideInformationIsOne) {
    const json j = run_json({"capacity", "--channel", channel("dephasing"), "--scenario", "none"});
    EXPECT_NEAR(j["result"]["value_bits"].get<double>(), 1.0, 0.02);
}

TEST(CliCapacity, MalformedFileIsValidationError) {
    const std::string path = tmp_path("bad.json");
    std::ofstream(path) << "{\"dim_in\": 2,";
    EXPECT_EQ(run({"capacity", "--channel", path}).code, kExitInvalid);

    std::ofstream(path) << R"({"name":"x","dim_in":2,"dim_out":2,"params":[{"label":"0","prob":0.7,)"
                        << R"("kraus":[[[[1,0],[0,0]],[[0,0],[1,0]]]]}]})";
    const CliRun r = run({"capacity", "--channel", path});
    EXPECT_EQ(r.code, kExitInvalid);
    EXPECT_FALSE(r.err.empty());
}

TEST(CliCapacity, BadArgumentsAreValidationErrors) {
    EXPECT_EQ(run({"capacity", "--channel", kData + "/missing.json"}).code, kExitInvalid);
    EXPECT_EQ(run({"capacity", "--channel", channel("dephasing"), "--scenario", "sideways"}).code, kExitInvalid);
    EXPECT_EQ(run({"capacity"}).code, kExitInvalid);
    EXPECT_EQ(run({"capacity", "--channel", channel("dephasing"), "--restarts", "many"}).code, kExitInvalid);
    EXPECT_EQ(run({}).code, kExitInvalid);
    EXPECT_EQ(run({"frobnicate"}).code, kExitInvalid);
}

TEST(Cli, HelpAndVersionExitZero) {
    const CliRun help = run({"--help"});
    EXPECT_EQ(help.code, kExitOk);
    EXPECT_NE(help.out.find("simulate"), std::string::npos);
    const CliRun version = run({"--version"});
    EXPECT_EQ(version.code, kExitOk);
    EXPECT_NE(version.out.find(tool_version()), std::string::npos);
}

TEST(CliSimulate, SuperdenseCodingIsExact) {
    const json j = run_json({"simulate", "--channel", channel("identity"), "--n", "1", "--messages", "4"});
    EXPECT_EQ(j["result"]["max_error"].get<double>(), 0.0);
    EXPECT_EQ(j["result"]["rate"].get<double>(), 2.0);
}

TEST(CliSimulate, DepolarizingIsUniformGuessing) {
    const json j = run_json({"simulate", "--channel", channel("depolarizing"), "--messages", "4"});
    EXPECT_NEAR(j["result"]["avg_error"].get<double>(), 0.75, 1e-9);
}

TEST(CliSimulate, CapExceededNamesDimension) {
    const CliRun r = run({"simulate", "--channel", channel("dephasing"), "--n", "9"});
    EXPECT_EQ(r.code, kExitInvalid);
    EXPECT_NE(r.err.find("exceeds the cap"), std::string::npos);
    EXPECT_NE(r.err.find("4^9"), std::string::npos);
}

TEST(CliSimulate, InvalidSweepListIsRejected) {
    EXPECT_EQ(run({"simulate", "--channel", channel("dephasing"), "--n", "1,x"}).code, kExitInvalid);
    EXPECT_EQ(run({"simulate", "--channel", channel("dephasing"), "--n", "0"}).code, kExitInvalid);
    EXPECT_EQ(run({"simulate", "--channel", channel("dephasing"), "--scheme", "psychic"}).code, kExitInvalid);
}

TEST(CliSimulate, SweepWritesJsonAndCsv) {
    const std::string csv = tmp_path("sweep.csv");
    const json j = run_json({"simulate", "--channel", channel("dephasing"), "--family",
                             kData + "/families/precorrect_z.json", "--n", "1,2,3", "--csv", csv});
    ASSERT_EQ(j["result"]["sweep"].size(), 3u);
    for (const auto& r : j["result"]["sweep"]) EXPECT_LE(r["max_error"].get<double>(), 1e-12);

    std::ifstream f(csv);
    std::string line;
    std::getline(f, line);
    ASSERT_EQ(line.rfind("# ", 0), 0u);
    EXPECT_EQ(json::parse(line.substr(2))["command"], "simulate");
    std::getline(f, line);
    EXPECT_EQ(line, "n,rate,max_error,avg_error");
    int rows = 0;
    while (std::getline(f, line)) ++rows;
    EXPECT_EQ(rows, 3);
}

TEST(CliSimulate, NoncausalReportsCovering) {
    const json j = run_json({"simulate", "--channel", channel("dephasing"), "--scheme", "noncausal", "--n", "2",
                             "--delta", "0.4", "--seed", "3"});
    EXPECT_TRUE(j["result"].contains("covering_failure_prob"));
    EXPECT_EQ(j["result"]["scheme"], "noncausal");
}

TEST(CliOutput, OutFileEmbedsManifest) {
    const std::string path = tmp_path("out.json");
    const CliRun r = run({"baseline", "--channel", classical("bsc"), "--out", path, "--seed", "5"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    std::ifstream f(path);
    const json j = json::parse(f);
    EXPECT_EQ(j["manifest"]["command"], "baseline");
    EXPECT_EQ(j["manifest"]["seed"], 5);
    EXPECT_EQ(j["manifest"]["tool_version"], tool_version());
    EXPECT_TRUE(j["manifest"]["arguments"].contains("channel"));
    const std::string ts = j["manifest"]["timestamp"];
    EXPECT_EQ(ts.size(), 20u);
    EXPECT_EQ(ts.back(), 'Z');
}

TEST(CliOutput, ArgumentsAreSortedWithDefaults) {
    const json j = run_json({"simulate", "--channel", channel("identity")});
    const auto& args = j["manifest"]["arguments"];
    std::vector<std::string> keys;
    for (auto it = args.begin(); it != args.end(); ++it) keys.push_back(it.key());
    EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
    EXPECT_EQ(args["layout"], "auto");
    EXPECT_EQ(args["messages"], 4);
}

TEST(CliVerify, AlgebraPasses) {
    const CliRun r = run({"verify", "--suite", "algebra"});
    EXPECT_EQ(r.code, kExitOk) << r.out;
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(CliVerify, PackingPrintsMeasuredAlpha) {
    const CliRun r = run({"verify", "--suite", "packing", "--n", "3"});
    EXPECT_EQ(r.code, kExitOk) << r.out;
    EXPECT_NE(r.out.find("measured alpha"), std::string::npos);
}

TEST(CliVerify, CoveringPasses) {
    const CliRun r = run({"verify", "--suite", "covering"});
    EXPECT_EQ(r.code, kExitOk) << r.out;
}

TEST(CliVerify, InjectedFaultFailsAndNamesCheck) {
    for (const std::string suite : {"algebra", "packing", "covering"}) {
        const CliRun r = run({"verify", "--suite", suite, "--inject-fault"});
        EXPECT_EQ(r.code, kExitVerifyFailed) << suite;
        EXPECT_NE(r.err.find("check '"), std::string::npos) << suite;
    }
}

TEST(CliVerify, UnknownSuiteIsValidationError) {
    EXPECT_EQ(run({"verify", "--suite", "vibes"}).code, kExitInvalid);
}

TEST(CliBaseline, MatchesReferenceValues) {
    const json stuck = run_json({"baseline", "--channel", classical("stuck_at_memory")});
    EXPECT_NEAR(stuck["result"]["gelfand_pinsker"].get<double>(), 0.7, 0.02);
    const json x = run_json({"baseline", "--channel", classical("xor_state")});
    EXPECT_NEAR(x["result"]["shannon_strategy"].get<double>(), 1.0, 1e-6);
    const json bsc = run_json({"baseline", "--channel", classical("bsc")});
    EXPECT_NEAR(bsc["result"]["shannon_strategy"].get<double>(), 1 - h2(0.1), 1e-4);
    EXPECT_NEAR(bsc["result"]["gelfand_pinsker"].get<double>(), 1 - h2(0.1), 1e-4);
}

TEST(CliBaseline, InvalidClassicalFileIsRejected) {
    const std::string path = tmp_path("bad_classical.json");
    std::ofstream(path) << R"({"name": "x", "w": [[[0.5]], [[0.6]]], "q": [1.0]})";
    EXPECT_EQ(run({"baseline", "--channel", path}).code, kExitInvalid);
}

TEST(CliDeterminism, RepeatedRunsMatchApartFromTimestamp) {
    const std::vector<std::vector<std::string>> commands = {
        {"capacity", "--channel", channel("stuck_at"), "--scenario", "causal", "--restarts", "4", "--seed", "11"},
        {"simulate", "--channel", channel("dephasing"), "--scheme", "noncausal", "--n", "1,2", "--delta", "0.4",
         "--seed", "11"},
        {"verify", "--suite", "covering", "--trials", "2000", "--seed", "11"},
        {"baseline", "--channel", classical("stuck_at_memory"), "--seed", "11"},
    };
    for (const auto& cmd : commands) {
        json a = run_json(cmd);
        json b = run_json(cmd);
        a["manifest"].erase("timestamp");
        b["manifest"].erase("timestamp");
        EXPECT_EQ(a.dump(), b.dump()) << cmd.front();
    }
}

TEST(DataFiles, ChannelsMatchFixtures) {
    EXPECT_EQ(to_canonical_json(load_spec(channel("dephasing"))), to_canonical_json(fixtures::dephasing_parameter()));
    EXPECT_EQ(to_canonical_json(load_spec(channel("stuck_at"))), to_canonical_json(fixtures::stuck_at(0.5)));
    EXPECT_EQ(to_canonical_json(load_spec(channel("identity"))), to_canonical_json(fixtures::identity_channel(2)));
    EXPECT_EQ(to_canonical_json(load_spec(channel("depolarizing"))), to_canonical_json(fixtures::depolarizing(2)));
    EXPECT_EQ(to_canonical_json(load_spec(channel("state_independent"))),
              to_canonical_json(fixtures::state_independent()));
}

TEST(DataFiles, ClassicalMatchFixtures) {
    const auto same = [](const ClassicalChannelWithState& a, const ClassicalChannelWithState& b) {
        ASSERT_EQ(a.x_size, b.x_size);
        ASSERT_EQ(a.y_size, b.y_size);
        ASSERT_EQ(a.s_size, b.s_size);
        for (size_t i = 0; i < a.w.size(); ++i) EXPECT_NEAR(a.w[i], b.w[i], 1e-15);
        for (size_t i = 0; i < a.q.size(); ++i) EXPECT_NEAR(a.q[i], b.q[i], 1e-15);
    };
    same(load_classical(classical("stuck_at_memory")), classical_fixtures::stuck_at_memory(0.3));
    same(load_classical(classical("xor_state")), classical_fixtures::xor_state());
    same(load_classical(classical("bsc")), classical_fixtures::bsc(0.1));
}

TEST(DataFiles, PrecorrectingFamilyUndoesDephasing) {
    const EncoderFamily fam = load_family(kData + "/families/precorrect_z.json");
    EXPECT_TRUE(fam.isometric);
    const KrausChannel v = virtual_channel(fixtures::dephasing_parameter(), fam);
    Rng rng(4);
    const CMatrix rho = random_density_matrix(2, rng);
    EXPECT_LT(max_abs_entry(v.apply(rho) - rho), 1e-12);
}
