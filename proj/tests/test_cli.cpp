/*
 Copyright 2026 The statespace-kit Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sskit/builtins.hpp"
#include "sskit/cli.hpp"
#include "sskit/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kData = SSKIT_DATA_DIR;

struct RunResult {
    int code = 0;
    std::string err;
};

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        root_ = fs::temp_directory_path() / ("sskit_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    void TearDown() override { fs::remove_all(root_); }

    RunResult run(std::vector<std::string> args) {
        args.insert(args.begin(), "statespace-kit");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream err;
        RunResult r;
        r.code = sskit::cli::run(static_cast<int>(argv.size()), argv.data(), err);
        r.err = err.str();
        return r;
    }
    RunResult runData(const std::string& cmd, const std::string& file, const std::string& outName) {
        return run({cmd, "--input", kData + "/" + file, "--out", (root_ / outName).string()});
    }
    json report(const std::string& outName) {
        std::ifstream in(root_ / outName / "report.json");
        return json::parse(in);
    }
    std::string write(const std::string& name, const std::string& body) {
        const fs::path p = root_ / name;
        std::ofstream(p) << body;
        return p.string();
    }
    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }

    fs::path root_;
};

double re(const json& z) { return z.at("re").get<double>(); }
double im(const json& z) { return z.at("im").get<double>(); }

}  // namespace

TEST_F(CliTest, StructuralModeTableForThreeModeModel) {
    ASSERT_EQ(runData("structural", "star1.json", "s").code, 0);
    const json r = report("s").at("results");
    ASSERT_EQ(r.at("modes").size(), 3u);
    for (const json& m : r.at("modes")) {
        const double l = re(m.at("eigenvalue"));
        EXPECT_EQ(m.at("controllable").get<bool>(), l != -1.0) << l;
        EXPECT_EQ(m.at("observable").get<bool>(), l != 2.0) << l;
    }
    EXPECT_TRUE(r.at("stabilizable").get<bool>());
    EXPECT_FALSE(r.at("detectable").get<bool>());
    ASSERT_EQ(runData("analyze", "star1.json", "a").code, 0);
    EXPECT_EQ(report("a").at("results").at("structural").at("modes").size(), 3u);
}

TEST_F(CliTest, LqrMultivariateExample) {
    ASSERT_EQ(runData("lqr", "lqr_multivariate.json", "l").code, 0);
    const json r = report("l").at("results");
    const json& k = r.at("K");
    EXPECT_NEAR(k[0][0].get<double>(), 2.0, 1e-9);
    EXPECT_NEAR(k[0][1].get<double>(), 0.0, 1e-9);
    EXPECT_NEAR(k[1][0].get<double>(), 0.0, 1e-9);
    EXPECT_NEAR(k[1][1].get<double>(), 1.0, 1e-9);
    std::vector<double> poles;
    for (const json& p : r.at("closedLoopPoles")) {
        poles.push_back(re(p));
        EXPECT_NEAR(im(p), 0.0, 1e-12);
    }
    std::sort(poles.begin(), poles.end());
    ASSERT_EQ(poles.size(), 2u);
    EXPECT_NEAR(poles[0], -2.0, 1e-9);
    EXPECT_NEAR(poles[1], -1.0, 1e-9);
}

TEST_F(CliTest, MissingInputIsUsageErrorWithoutOutputs) {
    const auto r = run({"analyze", "--input", (root_ / "nope.json").string(), "--out", (root_ / "o").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(fs::exists(root_ / "o"));
    EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST_F(CliTest, UnparsableJsonIsIoError) {
    const std::string in = write("broken.json", "{\"model\": [1, 2");
    EXPECT_EQ(run({"analyze", "--input", in, "--out", (root_ / "o").string()}).code, 2);
    EXPECT_FALSE(fs::exists(root_ / "o"));
}

TEST_F(CliTest, SchemaErrorCarriesPointer) {
    const auto r = runData("analyze", "bad_b_rows.json", "b");
    EXPECT_EQ(r.code, 1);
    const json rep = report("b");
    EXPECT_TRUE(rep.at("results").is_null());
    EXPECT_EQ(rep.at("error").at("kind"), "SchemaError");
    EXPECT_EQ(rep.at("error").at("pointer"), "/B");
    EXPECT_EQ(std::distance(fs::directory_iterator(root_ / "b"), fs::directory_iterator{}), 1);
}

TEST_F(CliTest, DomainErrorIsExitOneWithKind) {
    const std::string in = write("unc.json", R"({"model": {"type": "lti", "A": [[-2, 0], [-1, -1]], "B": [[1], [1]],
                                                  "C": [[1, 0]], "D": [[0]]}, "poles": [-3, -4]})");
    EXPECT_EQ(run({"place", "--input", in, "--out", (root_ / "p").string()}).code, 1);
    const json rep = report("p");
    EXPECT_EQ(rep.at("error").at("kind"), "Uncontrollable");
    EXPECT_TRUE(rep.at("results").is_null());
    EXPECT_EQ(rep.at("error").at("message").get<std::string>().find("0x"), std::string::npos);
}

TEST_F(CliTest, ScalarModelLoads) {
    const std::string in = write("one.json", R"({"model": {"type": "lti", "A": [[-1]], "B": [[1]], "C": [[1]], "D": [[0]]}})");
    ASSERT_EQ(run({"analyze", "--input", in, "--out", (root_ / "o").string()}).code, 0);
    const json r = report("o").at("results");
    EXPECT_EQ(r.at("n"), 1);
    EXPECT_EQ(r.at("m"), 1);
    EXPECT_EQ(r.at("p"), 1);
}

TEST_F(CliTest, PendubotBuiltinMatrices) {
    ASSERT_EQ(runData("analyze", "pendubot.json", "p").code, 0);
    EXPECT_EQ(report("p").at("results").at("n"), 4);
    std::ifstream file(kData + "/pendubot.json");
    const auto lm = sskit::loadModel(json::parse(file).at("model"), "/model");
    const sskit::StateSpace s = *sskit::builtinModel("pendubot").lti;
    ASSERT_TRUE(lm.lti.has_value());
    EXPECT_EQ(lm.lti->A, s.A);
    EXPECT_EQ(s.A(1, 0), 51.9243);
    EXPECT_EQ(s.A(1, 2), -13.9700);
    EXPECT_EQ(s.A(3, 0), -52.8376);
    EXPECT_EQ(s.A(3, 2), 68.4187);
    EXPECT_EQ(s.B(1, 0), 15.9549);
    EXPECT_EQ(s.B(3, 0), -29.3596);
}

TEST_F(CliTest, EveryCorpusFileRuns) {
    const std::vector<std::pair<std::string, std::string>> jobs{
        {"diophantine", "diophantine_ball.json"}, {"integral", "integral_scalar.json"},
        {"margins", "margins_are_example.json"},  {"mintime", "mintime_bilinear.json"},
        {"mintime", "mintime_double_integrator.json"}, {"observer", "observer_ball.json"},
        {"place", "place_ball.json"},             {"realize", "realize_mimo.json"},
        {"simulate", "simulate_vanderpol.json"},  {"srl", "srl_integrator_lag.json"},
        {"stability", "stability_lyapunov.json"}, {"stability", "stability_pendulum.json"},
        {"steer", "steer_double_integrator.json"}, {"structural", "structural_kccf.json"},
        {"tpbvp", "tpbvp_double_integrator.json"}};
    int i = 0;
    for (const auto& [cmd, file] : jobs) {
        const std::string out = "job" + std::to_string(i++);
        const auto r = runData(cmd, file, out);
        EXPECT_EQ(r.code, 0) << cmd << " " << file << " " << r.err;
        const json rep = report(out);
        EXPECT_EQ(rep.at("command"), cmd);
        EXPECT_EQ(rep.at("version"), sskit::cli::kVersion);
        EXPECT_FALSE(rep.contains("error")) << file << ": " << rep.dump();
        EXPECT_EQ(rep.at("inputsDigest").get<std::string>().rfind("fnv1a64:", 0), 0u);
    }
}

TEST_F(CliTest, GoldenResultsThroughTheFrontEnd) {
    ASSERT_EQ(runData("mintime", "mintime_double_integrator.json", "m").code, 0);
    const json m = report("m").at("results");
    ASSERT_EQ(m.at("switchingTimes").size(), 1u);
    EXPECT_NEAR(m.at("switchingTimes")[0].get<double>(), 1.0, 1e-8);
    EXPECT_NEAR(m.at("terminalTime").get<double>(), 2.0, 1e-8);
    EXPECT_EQ(m.at("dominance").at("violations"), 0);

    ASSERT_EQ(runData("integral", "integral_scalar.json", "i").code, 0);
    const json in = report("i").at("results");
    EXPECT_NEAR(in.at("K1")[0][0].get<double>(), 2.0, 1e-9);
    EXPECT_NEAR(in.at("K2")[0][0].get<double>(), 8.0, 1e-9);
}

TEST_F(CliTest, TrajectoryCsvLayoutAndPrecision) {
    ASSERT_EQ(runData("simulate", "simulate_vanderpol.json", "v").code, 0);
    std::ifstream in(root_ / "v" / "trajectory.csv");
    std::string header, row;
    std::getline(in, header);
    EXPECT_EQ(header, "t,x1,x2,u1,y1");
    std::getline(in, row);
    std::getline(in, row);
    std::stringstream ss(row);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    ASSERT_EQ(cells.size(), 5u);
    // Every value round-trips exactly through its text form.
    for (const auto& c : cells) {
        const double v = std::stod(c);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        EXPECT_EQ(std::stod(buf), v);
    }
}

TEST_F(CliTest, UsageErrors) {
    const std::string in = kData + "/scalar_lti.json";
    EXPECT_EQ(run({"frobnicate", "--input", in, "--out", (root_ / "a").string()}).code, 2);
    EXPECT_EQ(run({"analyze", "--input", in, "--out", (root_ / "b").string(), "--tol", "bogus=1"}).code, 2);
    EXPECT_EQ(run({"analyze", "--input", in, "--out", (root_ / "c").string(), "--tol", "rank"}).code, 2);
    EXPECT_EQ(run({"analyze", "--input", in, "--out", (root_ / "d").string(), "--tol", "rank=abc"}).code, 2);
    EXPECT_EQ(run({"analyze", "--input", in}).code, 2);
    for (const char* d : {"a", "b", "c", "d"}) EXPECT_FALSE(fs::exists(root_ / d)) << d;
    EXPECT_EQ(run({"analyze", "--input", in, "--out", (root_ / "e").string(), "--tol", "rank=1e-9", "--tol", "modal=1e-7"}).code, 0);
}

TEST_F(CliTest, ToleranceOverridesChangeTheDigest) {
    const std::string in = kData + "/scalar_lti.json";
    ASSERT_EQ(run({"analyze", "--input", in, "--out", (root_ / "a").string()}).code, 0);
    ASSERT_EQ(run({"analyze", "--input", in, "--out", (root_ / "b").string(), "--tol", "rank=1e-9"}).code, 0);
    ASSERT_EQ(run({"analyze", "--input", in, "--out", (root_ / "c").string(), "--seed", "3"}).code, 0);
    const std::string da = report("a").at("inputsDigest"), db = report("b").at("inputsDigest"), dc = report("c").at("inputsDigest");
    EXPECT_NE(da, db);
    EXPECT_NE(da, dc);
}

TEST_F(CliTest, BinaryRunsAreByteIdentical) {
    const std::string bin = SSKIT_CLI_PATH;
    const std::vector<std::pair<std::string, std::string>> jobs{{"srl", "srl_integrator_lag.json"},
                                                                {"mintime", "mintime_bilinear.json"},
                                                                {"margins", "margins_are_example.json"},
                                                                {"structural", "star1.json"}};
    for (const auto& [cmd, file] : jobs) {
        std::vector<fs::path> outs;
        for (const char* threads : {"1", "1", "4"}) {
            const fs::path out = root_ / (cmd + "_" + std::to_string(outs.size()));
            const std::string line = std::string("STATESPACE_KIT_THREADS=") + threads + " '" + bin + "' " + cmd + " --input '" + kData + "/" +
                                     file + "' --out '" + out.string() + "' --seed 5 > /dev/null 2>&1";
            ASSERT_EQ(std::system(line.c_str()), 0) << line;
            outs.push_back(out);
        }
        for (const auto& entry : fs::directory_iterator(outs[0])) {
            const std::string name = entry.path().filename().string();
            const std::string first = slurp(entry.path());
            EXPECT_EQ(first, slurp(outs[1] / name)) << cmd << " " << name;
            EXPECT_EQ(first, slurp(outs[2] / name)) << cmd << " " << name << " (thread count)";
        }
    }
}

TEST_F(CliTest, ReportKeysAreSorted) {
    ASSERT_EQ(runData("lqr", "lqr_multivariate.json", "l").code, 0);
    const std::string text = slurp(root_ / "l" / "report.json");
    EXPECT_LT(text.find("\"command\""), text.find("\"inputsDigest\""));
    EXPECT_LT(text.find("\"inputsDigest\""), text.find("\"results\""));
    EXPECT_LT(text.find("\"results\""), text.find("\"version\""));
    EXPECT_EQ(text.back(), '\n');
}
