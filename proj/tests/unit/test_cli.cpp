#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rayleigh/cli.hpp"

using namespace rayleigh;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rayleigh_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& cmd, const std::string& config, const std::string& threads = "1") {
    fs::path cfg = dir_ / (cmd + ".cfg");
    std::ofstream(cfg) << config;
    std::vector<std::string> args = {"rayleigh_cli", cmd,  "--config", cfg.string(),
                                     "--out",        out().string(), "--threads", threads};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli::main(static_cast<int>(argv.size()), argv.data());
  }

  fs::path out() const { return dir_ / "out"; }

  std::string read(const std::string& name) const {
    std::ifstream f(out() / name, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

}  // namespace

TEST(Config, ParsesFlatKeys) {
  auto c = Config::parse("# comment\nalpha = 1.5\nevolve.times = 0, 5 ,10\nprofile.kind=builtin-jet # trailing\n",
                         cli::known_keys());
  EXPECT_DOUBLE_EQ(c.num("alpha"), 1.5);
  EXPECT_EQ(c.str("profile.kind"), "builtin-jet");
  EXPECT_EQ(c.list("evolve.times"), (std::vector<double>{0, 5, 10}));
  EXPECT_DOUBLE_EQ(c.num("numerics.rtol", 1e-11), 1e-11);
}

TEST(Config, RejectsUnknownDuplicateAndMalformed) {
  EXPECT_THROW(Config::parse("alpah = 1\n", cli::known_keys()), ValidationError);
  EXPECT_THROW(Config::parse("alpha = 1\nalpha = 2\n", cli::known_keys()), ValidationError);
  EXPECT_THROW(Config::parse("alpha\n", cli::known_keys()), ValidationError);
  auto c = Config::parse("alpha = one\nthreads = 1.5\n", cli::known_keys());
  EXPECT_THROW(c.num("alpha"), ValidationError);
  EXPECT_THROW(c.integer("threads", 0), ValidationError);
  EXPECT_THROW(c.str("profile.kind"), ValidationError);
}

TEST_F(CliTest, SpectrumOfExpWritesVersionedReport) {
  ASSERT_EQ(run("spectrum", "profile.kind = builtin-exp\nalpha = 1\n"), cli::kOk);
  auto j = io::Json::parse(read("spectrum.json"));
  EXPECT_EQ(j["schema"], "spectrum-report");
  EXPECT_EQ(j["schema_version"], io::kSchemaVersion);
  EXPECT_TRUE(j["discrete"].empty());
  EXPECT_TRUE(j["flags"]["a3"].get<bool>());
}

TEST_F(CliTest, SpectrumOfTanhFindsTheUnstableMode) {
  ASSERT_EQ(run("spectrum", "profile.kind = builtin-tanh\nalpha = 1\n"), cli::kOk);
  auto j = io::Json::parse(read("spectrum.json"));
  ASSERT_EQ(j["discrete"].size(), 1u);
  EXPECT_NEAR(j["discrete"][0]["im"].get<double>(), 0.27993346085236986, 1e-8);
}

TEST_F(CliTest, ConfigErrorsExitWithOne) {
  EXPECT_EQ(run("spectrum", "alpha = 1\n"), cli::kConfig);                               // no profile
  EXPECT_EQ(run("spectrum", "profile.kind = builtin-exp\nbogus.key = 1\n"), cli::kConfig);
  EXPECT_EQ(run("spectrum", "profile.kind = builtin-exp\nspectrum.im_floor = 0\n"), cli::kConfig);
  EXPECT_EQ(run("evolve", "profile.kind = builtin-exp\nevolve.method = sideways\nevolve.times = 1\n"), cli::kConfig);
}

TEST_F(CliTest, MissingConfigFileExitsWithOne) {
  std::vector<std::string> args = {"rayleigh_cli", "spectrum", "--config", (dir_ / "absent.cfg").string()};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  EXPECT_EQ(cli::main(static_cast<int>(argv.size()), argv.data()), cli::kConfig);
}

TEST_F(CliTest, EigenvalueOnTheContourExitsWithThree) {
  std::string cfg =
      "profile.kind = builtin-tanh\nalpha = 1\nevolve.method = contour\nevolve.times = 1\nevolve.y_count = 5\n"
      "contour.eps = 0.27993346085236986\n";
  EXPECT_EQ(run("evolve", cfg), cli::kNumeric);
}

TEST_F(CliTest, EvolveBothWritesAComparison) {
  std::string cfg =
      "profile.kind = builtin-exp\nalpha = 1\nevolve.method = both\nevolve.times = 0, 5\nevolve.y_count = 21\n"
      "evolve.dt = 0.02\nevolve.direct_nodes = 2001\n";
  ASSERT_EQ(run("evolve", cfg), cli::kOk);
  auto j = io::Json::parse(read("comparison.json"));
  EXPECT_LT(j["max_rel_diff_omega"].get<double>(), 1e-3);
  EXPECT_EQ(read("field_contour.csv").rfind("# schema: evolution-field/1\n", 0), 0u);
}

TEST_F(CliTest, OutputsDoNotDependOnTheThreadCount) {
  std::string cfg = "profile.kind = builtin-jet\nalpha = 1\ndepletion.y_count = 21\n";
  ASSERT_EQ(run("depletion", cfg, "1"), cli::kOk);
  std::string a = read("depletion.csv") + read("depletion.json");
  ASSERT_EQ(run("depletion", cfg, "4"), cli::kOk);
  EXPECT_EQ(a, read("depletion.csv") + read("depletion.json"));
}

TEST_F(CliTest, EmptyTimeListExitsWithOne) {
  EXPECT_EQ(run("evolve", "profile.kind = builtin-exp\nevolve.times =\n"), cli::kConfig);
}

TEST_F(CliTest, LinearWindowBothMethodsAgree) {
  std::string cfg =
      "profile.kind = builtin-linear-window\nnumerics.y_max = 5\nalpha = 1\nevolve.method = both\n"
      "evolve.times = 0, 10\nevolve.y_hi = 4\nevolve.y_count = 21\n";
  ASSERT_EQ(run("evolve", cfg), cli::kOk);
  EXPECT_LT(io::Json::parse(read("comparison.json"))["max_rel_diff_omega"].get<double>(), 1e-3);
}

TEST_F(CliTest, MonotoneProfileHasNoDepletionLayers) {
  ASSERT_EQ(run("depletion", "profile.kind = builtin-exp\nalpha = 1\ndepletion.y_count = 11\n"), cli::kOk);
  EXPECT_TRUE(io::Json::parse(read("depletion.json"))["layers"].empty());
}

TEST_F(CliTest, ZeroDatumGivesZeroProfile) {
  ASSERT_EQ(run("depletion", "profile.kind = builtin-jet\nalpha = 1\ndata.kind = zero\ndepletion.y_count = 11\n"),
            cli::kOk);
  std::istringstream in(read("depletion.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'y') continue;
    ++rows;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "0") << line;
  }
  EXPECT_EQ(rows, 11);
}

TEST_F(CliTest, ExpSpectrumMatchesGoldenFile) {
  ASSERT_EQ(run("spectrum", "profile.kind = builtin-exp\nalpha = 1\n"), cli::kOk);
  std::ifstream g(RAYLEIGH_GOLDEN_DIR "/spectrum_exp_alpha1.json", std::ios::binary);
  ASSERT_TRUE(g.good());
  std::stringstream ss;
  ss << g.rdbuf();
  EXPECT_EQ(read("spectrum.json"), ss.str());
}

TEST(Threads, EnvironmentCap) {
  ::setenv("RAYLEIGH_MAX_THREADS", "2", 1);
  EXPECT_EQ(resolve_threads(8), 2u);
  ::unsetenv("RAYLEIGH_MAX_THREADS");
  EXPECT_EQ(resolve_threads(3), 3u);
}
