#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <pdisorder/io.hpp>

using namespace pdisorder;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    fs::path dir;

    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() / ("pdisorder_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    // Runs the CLI with --out set to the test dir; returns the exit status.
    auto run(const std::string& args) -> int {
        std::string cmd = std::string("\"") + PDISORDER_CLI + "\" " + args + " --out \"" + dir.string() + "\" >\"" +
                          (dir / "stdout.txt").string() + "\" 2>\"" + (dir / "stderr.txt").string() + "\"";
        int rc = std::system(cmd.c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    }
    auto load(const std::string& name) -> json { return json::parse(read_text(dir / name)); }
    auto stderr_json() -> json { return json::parse(read_text(dir / "stderr.txt")); }
};

const std::string small_ref_l = "--nx 40 --ny 40";

}  // namespace

TEST_F(Cli, SolveWritesReportAndReusesCache) {
    ASSERT_EQ(run("solve " + small_ref_l), 0) << read_text(dir / "stderr.txt");
    auto rep = load("solve_report.json");
    EXPECT_EQ(rep.at("report").at("n_final").get<int>(), 10);
    EXPECT_FALSE(rep.at("cache_hit").get<bool>());
    EXPECT_TRUE(rep.at("manifest").contains("config_hash"));
    EXPECT_TRUE(fs::exists(dir / "grid.csv"));
    EXPECT_EQ(read_text(dir / "grid.csv").substr(0, 6), "x,y,v\n");

    ASSERT_EQ(run("solve " + small_ref_l), 0);
    auto again = load("solve_report.json");
    EXPECT_TRUE(again.at("cache_hit").get<bool>());
    EXPECT_EQ(again.at("grid_hash"), rep.at("grid_hash"));
    EXPECT_EQ(again.at("v_at_initial"), rep.at("v_at_initial"));
}

TEST_F(Cli, LargeEpsilonNeedsNoIteration) {
    ASSERT_EQ(run("solve " + small_ref_l + " --epsilon 10"), 0);
    EXPECT_EQ(load("solve_report.json").at("report").at("n_final").get<int>(), 0);
}

TEST_F(Cli, InvalidInputExitsTwo) {
    EXPECT_EQ(run("solve --lambda -1"), 2);
    EXPECT_EQ(stderr_json().at("error"), "LAMBDA_NOT_POSITIVE");
    EXPECT_EQ(run("solve --mu 1"), 2);
    write_text(dir / "cfg.json", R"({"epsilon": 0.1, "bogus": 1})");
    EXPECT_EQ(run("solve --config \"" + (dir / "cfg.json").string() + "\""), 2);
    EXPECT_EQ(stderr_json().at("error"), "UNKNOWN_KEY");
    EXPECT_EQ(run("solve --no-such-flag"), 2);
}

TEST_F(Cli, ConfigFileAndFlagPrecedence) {
    write_text(dir / "cfg.json", R"({"grid": {"nx": 40, "ny": 40}, "epsilon": 10})");
    ASSERT_EQ(run("solve --config \"" + (dir / "cfg.json").string() + "\" --epsilon 0.025"), 0);
    EXPECT_EQ(load("solve_report.json").at("report").at("n_final").get<int>(), 10);
}

TEST_F(Cli, MissingBoundaryExitsThree) {
    EXPECT_EQ(run("simulate " + small_ref_l + " --policy boundary --n-paths 10"), 3);
    EXPECT_EQ(stderr_json().at("error"), "MISSING_ARTIFACT");
}

TEST_F(Cli, IterationCapExitsFour) {
    EXPECT_EQ(run("solve " + small_ref_l + " --max-iter 3"), 4);
    EXPECT_EQ(stderr_json().at("error"), "BUDGET_EXCEEDED");
}

TEST_F(Cli, BoundaryThenSimulate) {
    ASSERT_EQ(run("boundary " + small_ref_l + " --split"), 0) << read_text(dir / "stderr.txt");
    auto split = load("boundary_split.json");
    EXPECT_EQ(split.at("regime"), "LargeLambda");
    EXPECT_GT(split.at("xi").get<double>(), 0.0);
    EXPECT_TRUE(split.contains("manifest"));
    auto curve = read_boundary_csv(dir / "boundary.csv");
    EXPECT_NEAR(curve.xi, split.at("xi").get<double>(), 1e-12);

    ASSERT_EQ(run("simulate " + small_ref_l + " --policy boundary --n-paths 2000 --sandwich"), 0)
        << read_text(dir / "stderr.txt");
    auto sim = load("simulate_report.json");
    double risk = sim.at("risk").at("mean").get<double>();
    EXPECT_GT(risk, 0.0);
    EXPECT_LT(risk, 0.8);
    EXPECT_EQ(sim.at("sandwich").at("violations").get<int>(), 0);

    // Alarm at 0 costs the false-alarm probability 1 - pi.
    ASSERT_EQ(run("simulate " + small_ref_l + " --policy fixed --T 0 --n-paths 2000"), 0);
    EXPECT_NEAR(load("simulate_report.json").at("risk").at("mean").get<double>(), 0.8, 0.03);

    // A boundary written for other parameters is refused.
    EXPECT_EQ(run("simulate " + small_ref_l + " --c 1.5 --policy boundary --n-paths 10"), 3);
    EXPECT_EQ(stderr_json().at("error"), "CACHE_MISMATCH");
}

TEST_F(Cli, BoundaryMethodC) {
    ASSERT_EQ(run("boundary " + small_ref_l + " --method c"), 0) << read_text(dir / "stderr.txt");
    auto split = load("boundary_split.json");
    const auto& cert = split.at("details").at("x1_certificate");
    EXPECT_LE(cert.at("max_abs_deviation").get<double>(), 2 * cert.at("h").get<double>());
}

TEST_F(Cli, MethodCRefusesSmallLambda) {
    EXPECT_EQ(run("boundary --lambda 0.15 --mu 1.5 --c 0.7 --m 0.9 --nx 32 --ny 32 --window 0.6 --epsilon 0.5 "
                  "--method c"),
              2);
    EXPECT_EQ(stderr_json().at("error"), "WRONG_REGIME");
}

TEST_F(Cli, FilterCsv) {
    write_text(dir / "events.txt", "0.3\n0.9\n1.4\n");
    ASSERT_EQ(run("filter --events \"" + (dir / "events.txt").string() + "\" --step 0.5 --t-end 2"), 0)
        << read_text(dir / "stderr.txt");
    auto text = read_text(dir / "filter.csv");
    EXPECT_EQ(text.substr(0, text.find('\n')), "t,phi0,phi1,phi2,posterior");
    std::istringstream in(text);
    std::string line, last;
    int rows = 0;
    std::getline(in, line);
    while (std::getline(in, line)) {
        ++rows;
        last = line;
    }
    EXPECT_GE(rows, 8);
    EXPECT_EQ(last.substr(0, 2), "2,");

    write_text(dir / "bad.txt", "1\n0.5\n");
    EXPECT_EQ(run("filter --events \"" + (dir / "bad.txt").string() + "\""), 2);
    EXPECT_EQ(stderr_json().at("error"), "BAD_EVENTS");
}

TEST_F(Cli, RiskCurve) {
    ASSERT_EQ(run("risk-curve " + small_ref_l + " --pi-steps 5"), 0);
    auto text = read_text(dir / "risk_curve.csv");
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "pi,U");
    int rows = 0;
    while (std::getline(in, line)) {
        double pi = std::stod(line.substr(0, line.find(',')));
        double u = std::stod(line.substr(line.find(',') + 1));
        // Stopping at once costs 1 - pi.
        EXPECT_LE(u, 1.0 - pi + 1e-12);
        EXPECT_GT(u, 0.0);
        ++rows;
    }
    EXPECT_EQ(rows, 5);
}

TEST_F(Cli, SmoothfitFlagsCoarseGrid) {
    ASSERT_EQ(run("smoothfit " + small_ref_l), 0) << read_text(dir / "stderr.txt");
    auto j = load("smoothfit.json");
    EXPECT_TRUE(j.at("insufficient_resolution").get<bool>());
    EXPECT_TRUE(j.contains("manifest"));
    EXPECT_TRUE(fs::exists(dir / "smoothfit.csv"));
}
