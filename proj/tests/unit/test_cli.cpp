#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "dk/errors.hpp"
#include "dk/rng.hpp"

using namespace dk;
using namespace dk::cli;
namespace fs = std::filesystem;

namespace {

const char* kHeat = R"([grid]
dim = 2
n = 16
[kernel]
type = zero
[noise]
type = none
[time]
end = 0.01
dt = 1e-3
snapshot_stride = 5
[experiment]
initial = sine
initial_value = 1.0
initial_amplitude = 0.4
seed = 3
)";

const char* kNoisy = R"([grid]
dim = 2
n = 16
[kernel]
type = biot_savart
[noise]
type = uv
K = 2
amplitude = 0.3
normalize = true
[time]
end = 0.005
dt = 1e-4
snapshot_stride = 10
[experiment]
initial = modes
seed = 11
)";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dk_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& text, const std::string& name = "cfg.ini") {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  int run(const std::string& sub, const std::string& text, const std::string& out_name, std::string* stdout_text = nullptr,
          std::string* stderr_text = nullptr) {
    RunOptions o;
    o.config = write_config(text, out_name + ".ini");
    o.out = dir_ / out_name;
    o.threads = 2;
    std::ostringstream out, err;
    const int code = run_subcommand(sub, o, out, err);
    if (stdout_text) *stdout_text = out.str();
    if (stderr_text) *stderr_text = err.str();
    return code;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

int exit_status(const std::string& cmd) {
  const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

}  // namespace

TEST(ParseIni, SectionsCommentsAndErrors) {
  auto doc = parse_ini("# top\n[a]\nx = 1 # trailing\n; other\ny=two\n");
  ASSERT_NE(doc.find("a", "x"), nullptr);
  EXPECT_EQ(*doc.find("a", "x"), "1");
  EXPECT_EQ(*doc.find("a", "y"), "two");
  EXPECT_EQ(doc.find("a", "z"), nullptr);
  EXPECT_THROW(parse_ini("[a]\nx = 1\nx = 2\n"), ConfigError);
  EXPECT_THROW(parse_ini("x = 1\n"), ConfigError);
  try {
    parse_ini("[a]\n\nnot a pair\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(LoadConfig, RejectsUnknownKeysAndSections) {
  EXPECT_NO_THROW(load_config(kHeat));
  EXPECT_THROW(load_config(std::string(kHeat) + "[extra]\nx = 1\n"), ConfigError);
  std::string typo = kHeat;
  typo.replace(typo.find("dt ="), 2, "dT");
  EXPECT_THROW(load_config(typo), ConfigError);
  std::string bad_n = kHeat;
  bad_n.replace(bad_n.find("n = 16"), 6, "n = 12");
  EXPECT_THROW(load_config(bad_n), ConfigError);
}

TEST(LoadConfig, ProfilesGateTheKernelAudit) {
  auto exploratory = load_config(kNoisy);
  EXPECT_FALSE(exploratory.warnings.empty());
  EXPECT_THROW(load_config(std::string(kNoisy) + "profile = theory\n"), ConfigError);
}

TEST(LoadConfig, StabilityGuardRejectsLargeStep) {
  std::string text = kNoisy;
  text.replace(text.find("amplitude = 0.3"), 15, "amplitude = 3.0");
  text.replace(text.find("dt = 1e-4"), 9, "dt = 1e-3");
  EXPECT_THROW(load_config(text), ConfigError);
}

TEST_F(CliTest, SimulateHeatRunKeepsMassAndIsReproducible) {
  std::string out;
  ASSERT_EQ(run("simulate", kHeat, "a", &out), kExitOk);
  EXPECT_EQ(out.rfind("config_hash ", 0), 0u);
  ASSERT_EQ(run("simulate", kHeat, "b"), kExitOk);
  const std::string csv = slurp(dir_ / "a" / "trajectory.csv");
  EXPECT_EQ(csv, slurp(dir_ / "b" / "trajectory.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "trajectory.bin"), slurp(dir_ / "b" / "trajectory.bin"));

  std::istringstream rows(csv);
  std::string line, first_mass;
  std::getline(rows, line);
  EXPECT_EQ(line, "t,mass,entropy,dissipation,min_rho,l2,l4");
  int count = 0;
  while (std::getline(rows, line)) {
    const auto a = line.find(','), b = line.find(',', a + 1);
    const std::string mass = line.substr(a + 1, b - a - 1);
    if (count++ == 0) first_mass = mass;
    EXPECT_EQ(mass, first_mass);
  }
  EXPECT_EQ(count, 11);
  auto manifest = nlohmann::json::parse(slurp(dir_ / "a" / "trajectory.manifest.json"));
  EXPECT_EQ(manifest["seed"].get<std::uint64_t>(), rng::replica_seed(3, 0));
}

TEST_F(CliTest, SimulateReplicasWriteKineticTails) {
  RunOptions o;
  o.config = write_config(kNoisy);
  o.out = dir_ / "r";
  o.replicas = 2;
  o.threads = 2;
  std::ostringstream out, err;
  ASSERT_EQ(run_subcommand("simulate", o, out, err), kExitOk);
  EXPECT_TRUE(fs::exists(dir_ / "r" / "replica_000.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "r" / "replica_001.csv"));
  EXPECT_NE(slurp(dir_ / "r" / "replica_000.bin"), slurp(dir_ / "r" / "replica_001.bin"));
  const std::string tails = slurp(dir_ / "r" / "tails.csv");
  EXPECT_EQ(tails.rfind("kind,parameter,value\n", 0), 0u);
  EXPECT_NE(tails.find("infinity,"), std::string::npos);
  EXPECT_NE(tails.find("zero,"), std::string::npos);
}

TEST_F(CliTest, GuardViolationExitsWithConfigStatus) {
  std::string text = kNoisy;
  text.replace(text.find("amplitude = 0.3"), 15, "amplitude = 3.0");
  text.replace(text.find("dt = 1e-4"), 9, "dt = 1e-3");
  std::string err;
  EXPECT_EQ(run("simulate", text, "g", nullptr, &err), kExitConfig);
  auto rec = nlohmann::json::parse(slurp(dir_ / "g" / "error.json"));
  EXPECT_EQ(rec["error"], "config");
  EXPECT_EQ(rec["exit_code"], kExitConfig);
  EXPECT_NE(err.find("\"error\":\"config\""), std::string::npos);
}

TEST_F(CliTest, KernelAuditReportsBiotSavartVerdict) {
  std::string out;
  ASSERT_EQ(run("kernel-audit", kNoisy, "k", &out), kExitOk);
  EXPECT_NE(out.find("biot_savart: A1 fail, A2 pass"), std::string::npos);
  auto j = nlohmann::json::parse(slurp(dir_ / "k" / "kernel-audit.json"));
  EXPECT_LT(j["max_abs_divergence"].get<double>(), 1e-12);
  EXPECT_TRUE(fs::exists(dir_ / "k" / "kernel.table"));
}

TEST_F(CliTest, UniquenessWithIdenticalDataIsExactlyZero) {
  ASSERT_EQ(run("uniqueness", kNoisy, "u"), kExitOk);
  auto j = nlohmann::json::parse(slurp(dir_ / "u" / "uniqueness.json"));
  EXPECT_EQ(j["runs"][0]["sup_l1"].get<double>(), 0.0);

  ASSERT_EQ(run("uniqueness", std::string(kNoisy) + "perturbation = 0.05\n", "p"), kExitOk);
  auto p = nlohmann::json::parse(slurp(dir_ / "p" / "uniqueness.json"));
  const double sup = p["runs"][0]["sup_l1"].get<double>();
  EXPECT_GT(sup, 0.0);
  EXPECT_LT(p["runs"][0]["amplification"].get<double>(), 100.0);
}

TEST_F(CliTest, LadderWithoutLevelsRunsOnce) {
  ASSERT_EQ(run("ladder", kHeat, "l"), kExitOk);
  auto j = nlohmann::json::parse(slurp(dir_ / "l" / "ladder.json"));
  ASSERT_EQ(j["levels"].size(), 1u);
  EXPECT_FALSE(j["levels"][0].contains("l1_to_previous"));

  ASSERT_EQ(run("ladder", std::string(kNoisy) + "n_ladder = 16, 32\n", "n"), kExitOk);
  auto n = nlohmann::json::parse(slurp(dir_ / "n" / "ladder.json"));
  ASSERT_EQ(n["levels"].size(), 2u);
  EXPECT_TRUE(n["levels"][1].contains("l1_to_previous"));
}

TEST_F(CliTest, EntropyAuditOnHeatRunIsMonotone) {
  std::string out;
  ASSERT_EQ(run("entropy-audit", kHeat, "e", &out), kExitOk);
  auto j = nlohmann::json::parse(slurp(dir_ / "e" / "entropy-audit.json"));
  EXPECT_TRUE(j["runs"][0]["monotone"].get<bool>());
  EXPECT_NE(out.find("monotone yes"), std::string::npos);
}

TEST_F(CliTest, ParticlesAndCompare) {
  const std::string text = std::string(kHeat) + "particles = 200, 20000\nparticle_dt = 1e-3\n";
  ASSERT_EQ(run("particles", text, "pa"), kExitOk);
  EXPECT_TRUE(fs::exists(dir_ / "pa" / "positions.csv"));
  ASSERT_EQ(run("compare", text, "c"), kExitOk);
  auto j = nlohmann::json::parse(slurp(dir_ / "c" / "compare.json"));
  EXPECT_TRUE(j.contains("decreasing"));
  EXPECT_TRUE(fs::exists(dir_ / "c" / "compare.csv"));
}

TEST_F(CliTest, ExecutableExitCodes) {
  const std::string exe = DK_SIM_EXE;
  EXPECT_EQ(exit_status(exe + " simulate --config " + (dir_ / "missing.ini").string()), kExitConfig);
  EXPECT_EQ(exit_status(exe + " no-such-command"), kExitConfig);
  const auto cfg = write_config(kHeat);
  EXPECT_EQ(exit_status(exe + " simulate --config " + cfg.string() + " --out " + (dir_ / "x").string()), kExitOk);
  // The explicit quadratic advection term outruns the implicit damping.
  const std::string blow = R"([grid]
dim = 2
n = 16
[kernel]
type = biot_savart
[noise]
type = none
[time]
end = 1
dt = 1e-3
[experiment]
initial = modes
initial_amplitude = 10000
)";
  const auto bcfg = write_config(blow, "blow.ini");
  EXPECT_EQ(exit_status(exe + " simulate --config " + bcfg.string() + " --out " + (dir_ / "blow").string()),
            kExitNumerical);
  EXPECT_TRUE(fs::exists(dir_ / "blow" / "error.json"));
}
