#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "lambqed/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string output;
};

Run run(const std::string& args) {
    static int counter = 0;
    const fs::path log = fs::temp_directory_path() / ("lambqed_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".log");
    const std::string cmd = std::string(LAMBQED_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    fs::remove(log);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("lambqed_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, UsageErrorsExitWithTwo) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("bogus-command").code, 2);
    EXPECT_EQ(run("evolve --no-such-flag 1").code, 2);
    const auto bad_theta = run("evolve --theta 1.5 --out " + dir_.string());
    EXPECT_EQ(bad_theta.code, 2);
    EXPECT_NE(bad_theta.output.find("theta"), std::string::npos);
    EXPECT_EQ(run("evolve --metrics C,XYZ --out " + dir_.string()).code, 2);
    EXPECT_EQ(run("sweep-steady --grid kappa=0:1 --out " + dir_.string()).code, 2);
    EXPECT_EQ(run("run").code, 2);
    EXPECT_EQ(run("verify --criteria 12").code, 2);
    std::ofstream(dir_ / "bad.cfg") << "[params]\ntheta = lots\n";
    const auto bad_cfg = run("evolve --config " + (dir_ / "bad.cfg").string());
    EXPECT_EQ(bad_cfg.code, 2);
    EXPECT_NE(bad_cfg.output.find("line 2"), std::string::npos);
}

TEST_F(CliTest, IoErrorsExitWithThree) {
    EXPECT_EQ(run("evolve --config " + (dir_ / "missing.cfg").string()).code, 3);
    EXPECT_EQ(run("heatmap " + (dir_ / "missing.csv").string()).code, 3);
    std::ofstream(dir_ / "file") << "x";
    EXPECT_EQ(run("evolve --t-max 1 --t-points 3 --n-max 2 --out " + (dir_ / "file" / "sub").string()).code, 3);
}

TEST_F(CliTest, VersionAndHelp) {
    const auto v = run("--version");
    EXPECT_EQ(v.code, 0);
    EXPECT_NE(v.output.find("lambqed 1."), std::string::npos);
    EXPECT_EQ(run("--help").code, 0);
}

// n_ph at θ = 1/2 grows as g²t²/2.
TEST_F(CliTest, EvolveHalfThetaPhotonNumber) {
    const auto r = run("evolve --theta 0.5 --g 0.05 --t-max 100 --t-points 51 --n-max 60 --metrics n_ph,C --out " + dir_.string());
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_EQ(r.output.find("warning"), std::string::npos) << r.output;
    std::istringstream csv(slurp(dir_ / "trajectory.csv"));
    std::string line;
    int rows = 0;
    bool header = false;
    while (std::getline(csv, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            EXPECT_EQ(line, "t,n_ph,C");
            header = true;
            continue;
        }
        const auto cols = lambqed::split(line, ',');
        ASSERT_EQ(cols.size(), 3u);
        const double t = lambqed::parse_double(cols[0]);
        EXPECT_NEAR(lambqed::parse_double(cols[1]), 0.5 * 0.05 * 0.05 * t * t, 1e-4) << "t=" << t;
        EXPECT_LT(lambqed::parse_double(cols[2]), 1e-6);
        ++rows;
    }
    EXPECT_EQ(rows, 51);
    EXPECT_TRUE(fs::exists(dir_ / "manifest.cfg"));
}

TEST_F(CliTest, EvolveWarnsWhenTruncated) {
    const auto r = run("evolve --theta 0.5 --t-max 100 --t-points 11 --n-max 8 --metrics n_ph --out " + dir_.string());
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.output.find("raise --n-max"), std::string::npos);
}

TEST_F(CliTest, SteadyWithoutDissipationFails) {
    const auto r = run("steady --theta 0.7 --out " + dir_.string());
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.output.find("no unique steady state"), std::string::npos);
    EXPECT_EQ(run("steady --theta 0.7 --kappa 0.05 --gamma 0.01 --n-max 10 --out " + dir_.string()).code, 0);
    EXPECT_NE(slurp(dir_ / "steady.csv").find("theta,kappa,C,I,n_ph,p_exc,residual,converged,top_fock"), std::string::npos);
}

TEST_F(CliTest, SweepManifestReproducesOutput) {
    const fs::path a = dir_ / "a", b = dir_ / "b";
    const auto first = run("sweep-steady --gamma 0.01 --n-max 8 --grid theta=0.6:0.9:3 --grid kappa=0:0.1:3 --metrics C,I --out " +
                           a.string());
    ASSERT_EQ(first.code, 0) << first.output;
    ASSERT_TRUE(fs::exists(a / "steady_map_C.csv"));
    ASSERT_TRUE(fs::exists(a / "steady_map_I.csv"));
    const auto second = run("run --config " + (a / "manifest.cfg").string() + " --out " + b.string());
    ASSERT_EQ(second.code, 0) << second.output;
    EXPECT_EQ(slurp(a / "steady_map_C.csv"), slurp(b / "steady_map_C.csv"));
    EXPECT_EQ(slurp(a / "steady_map_I.csv"), slurp(b / "steady_map_I.csv"));
}

TEST_F(CliTest, SweepSteadyWithZeroKappaEdgeFails) {
    // κ = γ = 0 cells have no steady state; the sweep finishes but reports failure
    const auto r = run("sweep-steady --n-max 6 --grid theta=0.6:0.9:2 --grid kappa=0:0.1:2 --metrics C --out " + dir_.string());
    EXPECT_EQ(r.code, 1);
    EXPECT_TRUE(fs::exists(dir_ / "steady_map_C.csv"));
    EXPECT_NE(r.output.find("cell failure"), std::string::npos);
}

TEST_F(CliTest, TimeThetaSweepRendersAndHeatmapCommand) {
    const auto r = run("sweep-time-theta --n-max 10 --grid theta=0:1:5 --grid t=0:60:13 --render --out " + dir_.string());
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_TRUE(fs::exists(dir_ / "time_theta_C.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "time_theta_C.png"));
    const auto h = run("heatmap " + (dir_ / "time_theta_C.csv").string() + " --png " + (dir_ / "again.png").string());
    EXPECT_EQ(h.code, 0) << h.output;
    EXPECT_GT(fs::file_size(dir_ / "again.png"), 100u);
}

TEST_F(CliTest, VerifySingleCriterion) {
    const auto r = run("verify --criteria 10");
    EXPECT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("PASS"), std::string::npos);
}
