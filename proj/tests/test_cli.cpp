#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace {

namespace fs = std::filesystem;

const fs::path kWork = fs::path("cli-work");

int run(const std::string& args) {
  const std::string cmd = std::string(SPMB_CLI_PATH) + " " + args +
                          " > cli-work/stdout.txt 2> cli-work/stderr.txt";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

struct Setup {
  Setup() {
    fs::create_directories(kWork);
    write(kWork / "config.json",
          R"({"p": 3, "potential": {"variant": "capped", "a": 1, "m": 2},
              "beta": 0.3, "k_list": [25, 50], "r_samples": 8, "corrector": false,
              "cache_dir": "cli-work/cache", "out_dir": "cli-work/out"})");
    write(kWork / "bad.json", R"({"potential": {"m": 1.2}})");
  }
};
const Setup setup;

const std::string kConfig = "--config cli-work/config.json";

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("") == 2);
  CHECK(run("no-such-command") == 2);
  CHECK(run(kConfig + " landscape") == 2);  // missing --k
  CHECK(run("--config cli-work/bad.json ground-state") == 2);
  CHECK(run("--config cli-work/missing.json ground-state") == 2);
}

TEST_CASE("budget exhaustion exits with code 3") {
  CHECK(run(kConfig + " --budget 10 constants") == 3);
  CHECK(slurp(kWork / "stderr.txt").find("budget") != std::string::npos);
}

TEST_CASE("ground-state and constants emit stamped JSON") {
  REQUIRE(run(kConfig + " ground-state") == 0);
  const auto gs = slurp(kWork / "out" / "ground-state.json");
  CHECK(gs.find("\"tool_version\"") != std::string::npos);
  CHECK(gs.find("\"config_hash\"") != std::string::npos);
  CHECK(gs.find("\"seed\"") != std::string::npos);
  CHECK(gs.find("4.3373876") != std::string::npos);  // U(0) at p = 3

  REQUIRE(run(kConfig + " constants") == 0);
  const auto cs = slurp(kWork / "out" / "constants.json");
  CHECK(cs.find("18.897251") != std::string::npos);  // C0
  CHECK(cs.find("\"B3\": \"0.5\"") != std::string::npos);
}

TEST_CASE("landscape CSV: schema, header stamp, determinism") {
  REQUIRE(run(kConfig + " landscape --k 25") == 0);
  const auto path = kWork / "out" / "landscape_k25.csv";
  const auto first = slurp(path);
  std::istringstream lines(first);
  std::string line;
  std::getline(lines, line);
  CHECK(line.rfind("# spmb ", 0) == 0);
  CHECK(line.find(" config ") != std::string::npos);
  std::getline(lines, line);
  CHECK(line ==
        "k,r,F_reduced,F_bar,kinetic_mass,nonlocal,nonlinear,neglected_bound");
  int rows = 0;
  while (std::getline(lines, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 8);

  REQUIRE(run(kConfig + " landscape --k 25") == 0);
  CHECK(slurp(path) == first);
}

TEST_CASE("residual sweep resumes at the first missing k") {
  const auto path = kWork / "out" / "residual_sweep.csv";
  fs::remove(path);
  REQUIRE(run(kConfig + " residual-sweep") == 0);
  const auto full = slurp(path);
  CHECK(full.find("k,r_k,ratio,interior,w_norm,residual_before,"
                  "residual_after") != std::string::npos);
  CHECK(full.find("\n25,") != std::string::npos);

  // Drop the trailing row; rerun must keep the existing k = 25 row, compute
  // only the missing k = 50 one, and reproduce the identical file.
  std::istringstream lines(full);
  std::string head, schema, row25;
  std::getline(lines, head);
  std::getline(lines, schema);
  std::getline(lines, row25);
  REQUIRE(row25.rfind("25,", 0) == 0);
  write(path, head + "\n" + schema + "\n" + row25 + "\n");
  REQUIRE(run(kConfig + " residual-sweep") == 0);
  CHECK(slurp(path) == full);
  CHECK(slurp(kWork / "stdout.txt").find("resuming") != std::string::npos);
}

TEST_CASE("sweep rows are independent of the job count") {
  const auto path = kWork / "out" / "residual_sweep.csv";
  const auto serial = slurp(path);
  fs::remove(path);
  REQUIRE(run(kConfig + " --jobs 4 residual-sweep") == 0);
  CHECK(slurp(path) == serial);
}

TEST_CASE("verify with a starved budget exits with code 1") {
  CHECK(run(kConfig + " --budget 10 verify") == 1);
  const auto report = slurp(kWork / "out" / "verify.json");
  CHECK(report.find("\"all_passed\": false") != std::string::npos);
  CHECK(slurp(kWork / "stdout.txt").find("FAIL") != std::string::npos);
}
