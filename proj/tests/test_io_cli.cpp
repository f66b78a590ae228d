#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "support.hpp"

using namespace nugap;
using nugap::testing::data_path;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
};

CliRun cli(const std::string& args, const std::string& env = "") {
    std::string cmd = env + " " + std::string(NUGAP_CLI) + " " + args + " 2>/dev/null";
    CliRun r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

double field(const std::string& out, const std::string& name) {
    std::istringstream is(out);
    std::string line;
    while (std::getline(is, line))
        if (line.rfind(name + " ", 0) == 0) return std::stod(line.substr(name.size()));
    return std::nan("");
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path scratch(const std::string& name) {
    auto d = std::filesystem::temp_directory_path() / ("nugap_test_" + name);
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

const std::string cfg = "--config " + data_path("benchmark_3t.cfg");

}  // namespace

TEST(Io, RationalFileIsAscendingPowers) {
    auto d = scratch("tf");
    {
        std::ofstream(d / "g.tf") << R"({"num": [1, 0, 1], "den": [2, 3, 1]})";
    }
    RationalFunction g = load_rational((d / "g.tf").string());
    cplx s(0, 2);
    EXPECT_LT(std::abs(g(s) - (1.0 + s * s) / (2.0 + 3.0 * s + s * s)), 1e-15);
    save_rational((d / "h.tf").string(), g);
    RationalFunction h = load_rational((d / "h.tf").string());
    EXPECT_EQ(h.num(), g.num());
    EXPECT_EQ(h.den(), g.den());
}

TEST(Io, RejectsMalformedFiles) {
    auto d = scratch("bad");
    std::ofstream(d / "a.tf") << R"({"num": [1]})";
    std::ofstream(d / "b.tf") << R"({"num": [1], "den": [0]})";
    std::ofstream(d / "c.tf") << "{not json";
    std::ofstream(d / "d.cfg") << R"({"vscs": [{"name": "A", "P0": 0, "C": 1, "Xf": 0.1, "Xg": 0.1, "gains": {}}]})";
    EXPECT_THROW(load_rational((d / "a.tf").string()), ModelError);
    EXPECT_THROW(load_rational((d / "b.tf").string()), ModelError);
    EXPECT_THROW(load_rational((d / "c.tf").string()), ModelError);
    EXPECT_THROW(load_rational((d / "missing.tf").string()), ModelError);
    EXPECT_THROW(load_system((d / "d.cfg").string()), ModelError);
}

TEST(Io, BenchmarkConfig) {
    mtdc::MtdcSystem sys = nugap::testing::benchmark();
    ASSERT_EQ(sys.size(), 3);
    EXPECT_EQ(sys.vscs[1].name, "B");
    EXPECT_EQ(sys.vscs[1].gains.kp1, 0.8);
    EXPECT_EQ(sys.vscs[0].gains.ki2, 2000);
    EXPECT_EQ(sys.cables.size(), 2u);
    EXPECT_EQ(sys.base.Udcbase, 400);
    EXPECT_EQ(sys.j1, (std::vector<int>{4, 6}));
}

TEST(Io, BlockOverridesBypassReconstruction) {
    auto d = scratch("blocks");
    nlohmann::json j = read_json_file(data_path("benchmark_3t.cfg"));
    j["blocks"]["B"]["gdc"] = {{"num", {1.0}}, {"den", {1.0, 0.01}}};
    j["blocks"]["B"]["kp0"] = 2.0;
    std::ofstream(d / "o.cfg") << j.dump();
    mtdc::MtdcSystem sys = load_system((d / "o.cfg").string());
    auto blocks = mtdc::build_all_blocks(mtdc::prepared(sys));
    EXPECT_EQ(blocks[1].kp0, 2.0);
    EXPECT_EQ(blocks[1].gdc.den().degree(), 1);
}

TEST(Cli, VgapOfConstants) {
    CliRun r = cli("vgap --g1 " + data_path("zero.tf") + " --g2 " + data_path("one.tf"));
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("vgap        0.785398"), std::string::npos) << r.out;
}

TEST(Cli, IndexMatchesLibrary) {
    CliRun r = cli("index " + cfg + " --focus A --j1 4,6");
    ASSERT_EQ(r.code, 0);
    double want = mtdc::stability_index(nugap::testing::benchmark(), {4, 6}).zeta;
    EXPECT_NEAR(field(r.out, "zeta"), want, 1e-6);
}

TEST(Cli, CoeffsRoundTripThroughMargin) {
    auto d = scratch("coeffs");
    for (std::string j1 : {"4,6", "6", "4", "1,2,3,4,5,6"}) {
        ASSERT_EQ(cli("coeffs " + cfg + " --j1 " + j1 + " --out " + d.string()).code, 0);
        ASSERT_TRUE(std::filesystem::exists(d / "FE6.tf"));
        RationalFunction p = load_rational((d / "plant.tf").string()), c = load_rational((d / "controller.tf").string());
        double m = stability_margin(p, c).value;
        std::vector<int> paths;
        for (char ch : j1)
            if (ch != ',') paths.push_back(ch - '0');
        double z = mtdc::stability_index(nugap::testing::benchmark(), paths).zeta;
        EXPECT_NEAR(m, z, 1e-9) << "J1 " << j1;
        CliRun r = cli("margin --p " + (d / "plant.tf").string() + " --c " + (d / "controller.tf").string());
        EXPECT_NEAR(field(r.out, "margin"), z, 1e-6);
    }
}

TEST(Cli, SweepCsvIsDeterministic) {
    auto d = scratch("sweep");
    std::string args = "sweep " + cfg + " --j1 2,6 --param vscB.kp1 --range 0.1:0.8:8 --csv ";
    ASSERT_EQ(cli(args + (d / "a.csv").string()).code, 0);
    ASSERT_EQ(cli(args + (d / "b.csv").string()).code, 0);
    std::string a = slurp(d / "a.csv");
    EXPECT_EQ(a, slurp(d / "b.csv"));
    EXPECT_EQ(a.substr(0, a.find('\n')), "c,r,zeta,slack,stable,oracle_stable,comparable,failed");
    EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 9);
}

TEST(Cli, SweepPointsFromEnvironment) {
    CliRun a = cli("index " + cfg + " --j1 6", "NUGAP_SWEEP_POINTS=20");
    EXPECT_EQ(a.code, 0);
    CliRun bad = cli("index " + cfg + " --j1 6", "NUGAP_SWEEP_POINTS=5");
    EXPECT_EQ(bad.code, 2);
    CliRun junk = cli("index " + cfg + " --j1 6", "NUGAP_SWEEP_POINTS=abc");
    EXPECT_EQ(junk.code, 2);
}

TEST(Cli, VerdictAndBoundary) {
    CliRun v = cli("verdict " + cfg + " --j1 2,6 --perturb vscB.kp1=0.1");
    ASSERT_EQ(v.code, 0);
    EXPECT_NE(v.out.find("verdict     not certified"), std::string::npos) << v.out;
    CliRun b = cli("boundary " + cfg + " --focus A --j1 2,6 --param vscB.kp1 --bracket 0.05:0.8");
    ASSERT_EQ(b.code, 0);
    EXPECT_NE(b.out.find("r <= zeta for c >= c0"), std::string::npos) << b.out;
}

TEST(Cli, SimulateWritesTrace) {
    auto d = scratch("sim");
    CliRun r = cli("simulate " + cfg + " --j1 4,6 --duration 0.2 --dt 1e-5 --csv " + (d / "t.csv").string());
    ASSERT_EQ(r.code, 0) << r.out;
    std::string csv = slurp(d / "t.csv");
    EXPECT_EQ(csv.substr(0, 4), "t,y\n");
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(cli("").code, 2);
    EXPECT_EQ(cli("frobnicate").code, 2);
    EXPECT_EQ(cli("index --bogus").code, 2);
    EXPECT_EQ(cli("index --config /nonexistent.cfg").code, 2);
    // vscC.kp1 reaches path 4, outside J1 = {6}
    EXPECT_EQ(cli("verdict " + cfg + " --j1 6 --perturb vscC.kp1=1.5").code, 2);
    EXPECT_EQ(cli("verdict " + cfg + " --j1 6 --perturb vscB.kp1=abc").code, 2);
    EXPECT_EQ(cli("index " + cfg + " --j1 9").code, 2);
    // P = 1, C = -1: the characteristic polynomial vanishes, a numerical failure
    auto d = scratch("exit");
    std::ofstream(d / "m1.tf") << R"({"num": [-1], "den": [1]})";
    EXPECT_EQ(cli("margin --p " + data_path("one.tf") + " --c " + (d / "m1.tf").string()).code, 3);
    EXPECT_EQ(cli("simulate " + cfg + " --dt 1").code, 2);
    EXPECT_EQ(cli("--help").code, 0);
}
