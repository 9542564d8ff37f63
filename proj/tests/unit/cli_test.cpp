#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include "cli.hpp"
#include "fishing/codec.hpp"

namespace fishing::cli {
namespace {

namespace fs = std::filesystem;

const std::string kDemo = std::string(FISHING_SOURCE_DIR) + "/data/demo_scenario.json";
const std::string kDemoIntervals = std::string(FISHING_SOURCE_DIR) + "/data/demo_intervals.json";

int run_cli(const std::string& args) {
  const std::string command = std::string(FISHING_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("fishing-cli-" + std::to_string(::getpid()) + "-" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, ExitCodeMapping) {
  EXPECT_EQ(exit_code(ErrorCode::validation), 1);
  EXPECT_EQ(exit_code(ErrorCode::not_found), 1);
  EXPECT_EQ(exit_code(ErrorCode::conflict), 1);
  EXPECT_EQ(exit_code(ErrorCode::internal), 2);
}

TEST_F(CliTest, SimulateIsDeterministic) {
  ASSERT_EQ(run_cli("simulate --scenario " + kDemo + " --out " + path("a")), 0);
  ASSERT_EQ(run_cli("simulate --scenario " + kDemo + " --out " + path("b")), 0);
  for (const auto* file : {"events.tsv", "sightings.tsv", "truth.json"}) {
    EXPECT_EQ(codec::read_file(path("a/") + file), codec::read_file(path("b/") + file)) << file;
  }
  ASSERT_EQ(run_cli("simulate --scenario " + kDemo + " --seed 5 --out " + path("c")), 0);
  EXPECT_NE(codec::read_file(path("a/events.tsv")), codec::read_file(path("c/events.tsv")));
}

TEST_F(CliTest, FilterWritesMachineTable) {
  ASSERT_EQ(run_cli("simulate --scenario " + kDemo + " --out " + path("log")), 0);
  ASSERT_EQ(run_cli("filter --log " + path("log") + " --intervals " + kDemoIntervals), 0);
  const auto table = codec::table_from_json(nlohmann::json::parse(codec::read_file(path("log/result.json"))));
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(table.ap_ids, (std::vector<std::string>{"ap1", "ap2", "ap3"}));
}

TEST_F(CliTest, BadInputsExitWithValidationCode) {
  codec::write_file(path("broken.json"), "{\"schema_version\": 1, \"aps\": ");
  EXPECT_EQ(run_cli("simulate --scenario " + path("broken.json") + " --out " + path("x")), 1);
  EXPECT_EQ(run_cli("simulate --scenario " + path("missing.json") + " --out " + path("x")), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);

  ASSERT_EQ(run_cli("simulate --scenario " + kDemo + " --out " + path("log")), 0);
  codec::write_file(path("dup.json"), R"([{"ap_id":"ap1","enter":1000,"exit":1060},
                                          {"ap_id":"ap1","enter":1100,"exit":1160}])");
  EXPECT_EQ(run_cli("filter --log " + path("log") + " --intervals " + path("dup.json")), 1);
}

TEST_F(CliTest, EmptyTableIsSuccess) {
  ASSERT_EQ(run_cli("simulate --scenario " + kDemo + " --out " + path("log")), 0);
  codec::write_file(path("quiet.json"), R"([{"ap_id":"ap1","enter":100,"exit":160}])");
  std::ostringstream out, err;
  FilterOptions options;
  options.log_dir = path("log");
  options.intervals = path("quiet.json");
  EXPECT_EQ(cmd_filter(options, out, err), 0) << err.str();
  EXPECT_NE(out.str().find("no candidate"), std::string::npos);
}

TEST_F(CliTest, ScenarioCommandFeedsSimulate) {
  ASSERT_EQ(run_cli("scenario --trial 3 --out " + path("t3.json")), 0);
  ASSERT_EQ(run_cli("simulate --scenario " + path("t3.json") + " --out " + path("t3")), 0);
  EXPECT_TRUE(fs::exists(path("t3/events.tsv")));
}

TEST_F(CliTest, ExperimentMachineOutput) {
  std::ostringstream out, err;
  ExperimentOptions options;
  options.trials = 2;
  options.seed = 3;
  options.format = "machine";
  ASSERT_EQ(cmd_experiment(options, out, err), 0) << err.str();
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j["trials"].size(), 2u);
}

}  // namespace
}  // namespace fishing::cli
