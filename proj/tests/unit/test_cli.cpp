#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>

#include <moldsched/cli/cli.hpp>
#include <moldsched/trace.hpp>

#include "support.hpp"

using namespace moldsched;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string kLayout = std::string(MOLDSCHED_LAYOUT_DIR) + "/eight_workers.layout";

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run({"--help"}).code == cli::kExitOk);
  CHECK(run({"--bogus"}).code == cli::kExitUsage);
  CHECK(run({"--policy", "nope"}).code == cli::kExitUsage);
  CHECK(run({"--policy", "rws", "--moldability", "on"}).code == cli::kExitUsage);
  CHECK(run({"--policy", "arms-1", "--moldability", "on"}).code == cli::kExitUsage);
  CHECK(run({"--sta", "maybe"}).code == cli::kExitUsage);
  CHECK(run({"--layout", "/nonexistent.layout"}).code == cli::kExitUsage);
  CHECK(run({"--bench", "stencil", "--block", "20", "--workers", "2"}).code == cli::kExitUsage);
  CHECK(run({"--bench", "matmul", "--n", "100", "--workers", "2"}).code == cli::kExitUsage);
  CHECK(run({"--layout", kLayout, "--workers", "4"}).code == cli::kExitUsage);
  const auto r = run({"--sweep", "3", "--tasks", "100", "--workers", "2", "--deterministic"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("divisible") != std::string::npos);
}

TEST_CASE("malformed layout file is a usage error") {
  testing::TempDir dir;
  const auto path = dir.path() + "/bad.layout";
  testing::write_file(path, "0,1\n1,3\n1\n");
  const auto r = run({"--layout", path});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("exceeds") != std::string::npos);
}

TEST_CASE("matmul verifies") {
  const auto r = run({"--bench", "matmul", "--n", "256", "--leaf", "128", "--workers", "2",
                      "--no-pin", "--verify"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.rfind("bench,policy,workers,parallelism,tasks,run,elapsed,checksum,verified\n", 0) ==
        0);
  CHECK(r.out.find("matmul,arms-m,2,0,8,0,") != std::string::npos);
  CHECK(r.out.find(",pass\n") != std::string::npos);
}

TEST_CASE("every benchmark verifies in virtual time") {
  for (std::vector<std::string> args :
       {std::vector<std::string>{"--bench", "chain", "--kind", "triad", "--n", "64", "--depth", "20"},
        std::vector<std::string>{"--bench", "nbody", "--depth", "20", "--n", "32"},
        std::vector<std::string>{"--bench", "stencil", "--rows", "32", "--cols", "32", "--block", "8",
                                 "--timesteps", "3"},
        std::vector<std::string>{"--bench", "sparselu", "--blocks", "4", "--block-size", "8"},
        std::vector<std::string>{"--bench", "matmul", "--n", "64", "--leaf", "16"}}) {
    args.insert(args.end(), {"--layout", kLayout, "--deterministic", "--verify"});
    const auto r = run(args);
    CHECK_MESSAGE(r.code == cli::kExitOk, args[1], ": ", r.err);
  }
}

TEST_CASE("layout comes from the environment when --layout is absent") {
  ::setenv(cli::kLayoutEnv, kLayout.c_str(), 1);
  const auto r = run({"--bench", "chain", "--depth", "4", "--n", "8", "--deterministic"});
  ::unsetenv(cli::kLayoutEnv);
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("chain,arms-m,8,4,16,0,") != std::string::npos);
}

TEST_CASE("chain traces have one histogram per chain") {
  testing::TempDir dir;
  const auto r = run({"--layout", kLayout, "--bench", "chain", "--parallelism", "2", "--depth",
                      "100", "--kind", "copy", "--n", "256", "--deterministic", "--out",
                      dir.path(), "--dump-model"});
  REQUIRE(r.code == cli::kExitOk);
  const auto trace = parse_schedule_map(testing::read_file(dir.path() + "/schedule_map.csv"));
  CHECK(trace.frequencies.size() == 2);
  CHECK(trace.total() == 200);
  CHECK(fs::exists(dir.path() + "/decisions.csv"));
  CHECK(fs::exists(dir.path() + "/model.csv"));
  CHECK(testing::read_file(dir.path() + "/run.json").find("\"policy\": \"arms-m\"") !=
        std::string::npos);
}

TEST_CASE("single-width policy only ever picks width one") {
  testing::TempDir dir;
  const auto r = run({"--layout", kLayout, "--policy", "arms-1", "--bench", "chain",
                      "--parallelism", "2", "--depth", "50", "--n", "16", "--deterministic",
                      "--out", dir.path()});
  REQUIRE(r.code == cli::kExitOk);
  const auto trace = parse_schedule_map(testing::read_file(dir.path() + "/schedule_map.csv"));
  for (const auto& [key, hist] : trace.frequencies) {
    for (const auto& [part, count] : hist) CHECK(part.width == 1);
  }
}

TEST_CASE("injected costs give byte-identical traces") {
  testing::TempDir dir;
  const auto costs = dir.path() + "/costs.csv";
  // Chain 0 of 2 on eight workers has key 0 and type 0 (copy).
  testing::write_file(costs, "type_id,sta_key,leader,width,cost\n0,0,0,1,40\n0,0,0,2,12\n0,0,0,4,48\n");
  auto once = [&](const std::string& sub) {
    const auto out = dir.path() + "/" + sub;
    const auto r = run({"--layout", kLayout, "--bench", "chain", "--kind", "copy", "--n", "64",
                        "--parallelism", "2", "--depth", "30", "--inject-costs", costs, "--out",
                        out});
    REQUIRE(r.code == cli::kExitOk);
    return testing::read_file(out + "/decisions.csv");
  };
  const auto a = once("a");
  const auto b = once("b");
  CHECK(a == b);
  CHECK(a.find(",0,0,0,2\n") != std::string::npos);
}

TEST_CASE("sweeps write one trace per parallelism and a width table") {
  testing::TempDir dir;
  const auto r = run({"--layout", kLayout, "--kind", "copy", "--n", "16", "--sweep", "2,8",
                      "--tasks", "400", "--deterministic", "--repeat", "2", "--out", dir.path()});
  REQUIRE(r.code == cli::kExitOk);
  for (const char* f : {"schedule_map_p2_r0.csv", "schedule_map_p2_r1.csv",
                        "schedule_map_p8_r1.csv", "width_table.csv", "run.json"}) {
    CHECK_MESSAGE(fs::exists(dir.path() + "/" + f), f);
  }
  const auto table = testing::read_file(dir.path() + "/width_table.csv");
  CHECK(table.rfind("width,2,8\n", 0) == 0);
}

TEST_CASE("repeat suffixes outputs") {
  testing::TempDir dir;
  const auto r = run({"--workers", "2", "--bench", "chain", "--depth", "5", "--n", "8",
                      "--deterministic", "--repeat", "2", "--out", dir.path()});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(fs::exists(dir.path() + "/schedule_map_r0.csv"));
  CHECK(fs::exists(dir.path() + "/decisions_r1.csv"));
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 3);
}
