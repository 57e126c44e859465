#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "loqi/core/process.hpp"

using namespace loqi;
namespace fs = std::filesystem;

namespace {

ProcessResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), LOQI_CLI);
  return run_process(args);
}

}  // namespace

TEST_CASE("usage errors exit with status 2") {
  CHECK(cli({}).exit_code == 2);
  CHECK(cli({"frobnicate"}).exit_code == 2);
  const auto r = cli({"degrade", "--spec", "jpeg:10"});
  CHECK(r.exit_code == 2);
  CHECK(r.stderr_text.rfind("error: usage:", 0) == 0);
}

TEST_CASE("help and version succeed") {
  CHECK(cli({"--help"}).exit_code == 0);
  CHECK(cli({"--version"}).stdout_text.find("0.1.0") != std::string::npos);
}

TEST_CASE("validation failures exit with status 3 and name their category") {
  TempDir tmp;
  const auto fx = cli({"-q", "make-fixture", "--out", (tmp.path() / "fx").string(), "--places", "4", "--views", "2",
                       "--width", "16", "--height", "16"});
  REQUIRE(fx.exit_code == 0);
  const auto r = cli({"-q", "degrade", "--manifest", (tmp.path() / "fx" / "database.tsv").string(), "--spec",
                      "jpeg:0", "--out", (tmp.path() / "lq").string()});
  CHECK(r.exit_code == 3);
  CHECK(r.stderr_text.find("error: validation:") != std::string::npos);
}

TEST_CASE("a missing encoder exits with status 4") {
  TempDir tmp;
  REQUIRE(cli({"-q", "make-fixture", "--out", (tmp.path() / "fx").string(), "--places", "4", "--views", "2",
               "--width", "16", "--height", "16"})
              .exit_code == 0);
  ::unsetenv("LOQI_ENCODER_SALAD");
  const auto r = cli({"-q", "extract", "--manifest", (tmp.path() / "fx" / "database.tsv").string(), "--model", "salad",
                      "--out", (tmp.path() / "d.db").string()});
  CHECK(r.exit_code == 4);
  CHECK(r.stderr_text.find("LOQI_ENCODER_SALAD") != std::string::npos);
}

TEST_CASE("commands leave a reproducibility record next to their output") {
  TempDir tmp;
  REQUIRE(cli({"-q", "make-fixture", "--out", (tmp.path() / "fx").string(), "--places", "4", "--views", "3",
               "--width", "16", "--height", "16"})
              .exit_code == 0);
  const auto out = tmp.path() / "d.db";
  REQUIRE(cli({"-q", "extract", "--manifest", (tmp.path() / "fx" / "database.tsv").string(), "--model",
               "toy channels=4 dim=8 seed=1", "--out", out.string()})
              .exit_code == 0);
  std::ifstream in(out.string() + ".run.json");
  REQUIRE(in.good());
  const auto j = nlohmann::json::parse(in);
  CHECK(j["command"] == "extract");
  CHECK(j.contains("created_at"));
  CHECK(j["inputs"].contains("manifest"));
  CHECK(j["config"]["model"] == "toy channels=4 dim=8 seed=1");
}
