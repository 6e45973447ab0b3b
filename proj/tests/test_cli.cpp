#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "cli_harness.hpp"

using cli_harness::run;

TEST_CASE("committed goldens reproduce in process", "[cli]") {
  const auto cases = cli_harness::golden_cases(CHOQUET_GOLDEN_DIR);
  REQUIRE(cases.size() >= 4);
  for (const auto& c : cases) {
    INFO(c.name);
    const auto r = run(c.args);
    CHECK(r.code == c.exit_code);
    CHECK(r.out == cli_harness::slurp(std::string(CHOQUET_GOLDEN_DIR) + "/" + c.name));
  }
}

TEST_CASE("reports are deterministic", "[cli]") {
  const std::vector<std::string> args{"derive", "--f", "pow(t-1,3.5)", "--m", "t^2/2", "--a", "1",
                                      "--t", "1.1:3:10", "--format", "json"};
  CHECK(run(args).out == run(args).out);
  auto single = args;
  single.insert(single.end(), {"--threads", "1"});
  CHECK(run(single).out == run(args).out);
}

TEST_CASE("integrate output", "[cli]") {
  const auto r = run({"integrate", "--g", "sqrt(t-1)", "--m", "t^2/2", "--a", "1", "--t", "1:3:5"});
  CHECK(r.code == 0);
  CHECK(r.out.find("2,0.266666667\n") != std::string::npos);
  const auto zeros = run({"integrate", "--g", "0", "--m", "t", "--a", "0", "--t", "0:1:3"});
  CHECK(zeros.out == "t,value\n0,0\n0.5,0\n1,0\n");
}

TEST_CASE("exit codes", "[cli]") {
  CHECK(run({"integrate", "--g", "t", "--m", "t", "--a", "-1", "--t", "-1:1:5"}).code == 3);
  CHECK(run({"integrate", "--g", "sqrt(t-", "--m", "t", "--t", "0:1:3"}).code == 2);
  CHECK(run({"integrate", "--g", "t", "--m", "t", "--t", "0:1"}).code == 2);
  CHECK(run({"integrate", "--g", "t", "--m", "t", "--t", "1:0:3"}).code == 2);
  CHECK(run({"integrate", "--g", "t", "--m", "t", "--a", "2", "--t", "0:3:3"}).code == 2);
  CHECK(run({"integrate", "--g", "t", "--t", "0:3:3"}).code == 2);
  CHECK(run({"integrate", "--g", "t", "--m", "t", "--t", "0:3:3", "--format", "xml"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"integrate", "--g", "1", "--m", "t - 1", "--t", "0:1:3"}).code == 3);
  CHECK(run({"derive", "--f", "t + 1", "--m", "t", "--t", "0:1:3"}).code == 3);
  CHECK(run({"derive", "--f", "sqrt(t-1)", "--m", "t^2/2", "--a", "1", "--t", "1.1:3:10"}).code == 5);
  CHECK(run({"identify", "--f", "0", "--g", "0", "--t", "0:1:3"}).code == 4);
  CHECK(run({"integrate", "--g", "1", "--m", "t", "--t", "0:1:3", "--stehfest", "7"}).code == 0);
  CHECK(run({"derive", "--f", "t^2", "--m", "t", "--t", "0:1:3", "--stehfest", "7"}).code == 2);
  CHECK(run({"verify", "--g", "sqrt(t-1)", "--m", "t^2/2", "--a", "1", "--t", "1:3:5"}).code == 6);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("errors are reported on standard error only", "[cli]") {
  const auto r = run({"integrate", "--g", "sqrt(t-", "--m", "t", "--t", "0:1:3"});
  CHECK(r.out.empty());
  CHECK(r.err.find("parse error at offset 7") != std::string::npos);
}

TEST_CASE("output file", "[cli]") {
  const auto path = std::filesystem::temp_directory_path() / "choquet_cli_output_test.csv";
  const auto r = run({"integrate", "--g", "1", "--m", "t", "--t", "0:1:3", "-o", path.string()});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  CHECK(cli_harness::slurp(path.string()) == "t,value\n0,0\n0.5,0.5\n1,1\n");
  std::filesystem::remove(path);
}

TEST_CASE("timing is opt-in", "[cli]") {
  const std::vector<std::string> base{"integrate", "--g", "1", "--m", "t", "--t", "0:1:3", "--format", "json"};
  CHECK(run(base).out.find("elapsed_seconds") == std::string::npos);
  auto timed = base;
  timed.push_back("--timing");
  CHECK(run(timed).out.find("elapsed_seconds") != std::string::npos);
}
