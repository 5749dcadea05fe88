#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ergocert/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("ergocert_" + tag + "_" + std::to_string(std::rand()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "ergocert");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = ergocert::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

const char* kTwoState = R"({"kind":"ctmc","rates":[[-1,1],[1,-1]]})";
const char* kRotation = R"({"kind":"pdmp","pdmp":{"n":4,"jump_rate":0,"jump_target":[0.25,0.25,0.25,0.25]}})";
const char* kPdmp = R"({"kind":"pdmp","pdmp":{"n":4,"jump_rate":1,"jump_target":[0.25,0.25,0.25,0.25]}})";
const char* kReducible = R"({"kind":"ctmc","rates":[[-1,1,0,0],[1,-1,0,0],[0,0,-1,1],[0,0,1,-1]]})";

}  // namespace

TEST_CASE("analyze the two-state chain") {
  TempDir dir("analyze");
  write(dir.path / "m.json", kTwoState);
  const std::string grid = "0.34657359027997264";  // ln 2 / 2
  CHECK(run({"analyze", "--model", (dir.path / "m.json").string(), "--t-max", "4", "--grid", grid, "--out",
             (dir.path / "out").string()}) == 0);
  const json report = json::parse(read(dir.path / "out" / "report.json"));
  bool found = false;
  for (const auto& s : report["lower_bound_sweep"]) {
    if (std::abs(s["t0"].get<double>() - std::log(2.0) / 2) < 1e-12) {
      CHECK(s["eta"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
      found = true;
    }
  }
  CHECK(found);
  CHECK(report["suite"]["agree"] == true);
  CHECK(report["certificate"]["certified"] == true);

  const std::string csv = read(dir.path / "out" / "series.csv");
  CHECK(csv.rfind("t,op_distance_to_P,cesaro_distance,doeblin_mass\n0,", 0) == 0);
}

TEST_CASE("analyze a rotation: Doeblin column all zero") {
  TempDir dir("rot");
  write(dir.path / "m.json", kRotation);
  CHECK(run({"analyze", "--model", (dir.path / "m.json").string(), "--t-max", "12", "--grid", "1", "--out",
             (dir.path / "out").string()}) == 0);
  std::istringstream csv(read(dir.path / "out" / "series.csv"));
  std::string line;
  std::getline(csv, line);
  int rows = 0;
  while (std::getline(csv, line)) {
    CHECK(line.substr(line.rfind(',') + 1) == "0");
    ++rows;
  }
  CHECK(rows == 13);
}

TEST_CASE("analyze rejects bad input with exit 2") {
  TempDir dir("bad");
  write(dir.path / "broken.json", "{\"kind\": \"ctmc\", ");
  CHECK(run({"analyze", "--model", (dir.path / "broken.json").string(), "--out", dir.path.string()}) == 2);
  CHECK(run({"analyze", "--model", (dir.path / "missing.json").string(), "--out", dir.path.string()}) == 2);
  write(dir.path / "p.json", kPdmp);
  CHECK(run({"analyze", "--model", (dir.path / "p.json").string(), "--grid", "0.5", "--out", dir.path.string()}) == 2);
  CHECK(run({"analyze"}) == 2);
  CHECK(run({"frobnicate"}) == 2);
}

TEST_CASE("analyze a reducible model reports without P") {
  TempDir dir("red");
  write(dir.path / "m.json", kReducible);
  CHECK(run({"analyze", "--model", (dir.path / "m.json").string(), "--t-max", "2", "--grid", "0.5", "--out",
             (dir.path / "out").string()}) == 0);
  const std::string csv = read(dir.path / "out" / "series.csv");
  CHECK(csv.find("nan") != std::string::npos);
}

TEST_CASE("certify exit codes") {
  TempDir dir("certify");
  write(dir.path / "pdmp.json", kPdmp);
  write(dir.path / "rot.json", kRotation);
  write(dir.path / "red.json", kReducible);
  std::string text;
  CHECK(run({"certify", "--model", (dir.path / "pdmp.json").string(), "--t0", "1", "--out", (dir.path / "a").string()},
            &text) == 0);
  const json report = json::parse(read(dir.path / "a" / "report.json"));
  CHECK(report["certificate"]["certified"] == true);
  CHECK(report["proof_chain"]["passed"] == true);
  CHECK(report["proof_chain"]["delta"].get<double>() == doctest::Approx(1 - std::exp(-1.0)));

  CHECK(run({"certify", "--model", (dir.path / "rot.json").string(), "--t0", "1", "--out", (dir.path / "b").string()},
            &text) == 0);
  CHECK(text.find("no certificate, hypothesis not met") != std::string::npos);

  CHECK(run({"certify", "--model", (dir.path / "red.json").string(), "--t0", "1", "--out", (dir.path / "c").string()}) == 2);
  CHECK(run({"certify", "--model", (dir.path / "pdmp.json").string(), "--t0", "0.5", "--out", (dir.path / "d").string()}) == 2);
}

TEST_CASE("sweep is deterministic and lists failures") {
  TempDir dir("sweep");
  const auto a = (dir.path / "a").string();
  const auto b = (dir.path / "b").string();
  CHECK(run({"sweep", "--family", "rotation", "--count", "5", "--seed", "3", "--out", a}) == 0);
  const json summary = json::parse(read(fs::path(a) / "summary.json"));
  CHECK(summary["passed"] == 5);
  for (const auto& inst : summary["instances"]) CHECK(inst["verdict"] == "no uniform convergence");
  CHECK(run({"sweep", "--family", "random-ctmc", "--count", "6", "--seed", "42", "--out", a}) == 0);
  CHECK(run({"sweep", "--family", "random-ctmc", "--count", "6", "--seed", "42", "--out", b}) == 0);
  CHECK(read(fs::path(a) / "summary.json") == read(fs::path(b) / "summary.json"));
  CHECK(run({"sweep", "--family", "walk", "--count", "1", "--seed", "1", "--out", a}) == 2);
}

TEST_CASE("process exit codes") {
  TempDir dir("proc");
  write(dir.path / "broken.json", "not json");
  const std::string cmd = std::string(ERGOCERT_BINARY) + " analyze --model " + (dir.path / "broken.json").string() +
                          " --out " + dir.path.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 2);
  const std::string help = std::string(ERGOCERT_BINARY) + " --help >/dev/null";
  CHECK(WEXITSTATUS(std::system(help.c_str())) == 0);
}

TEST_CASE("thread cap from the environment") {
  setenv("ERGOCERT_THREADS", "2", 1);
  CHECK(ergocert::cli::worker_count() == 2);
  setenv("ERGOCERT_THREADS", "zero", 1);
  CHECK_THROWS(ergocert::cli::worker_count());
  unsetenv("ERGOCERT_THREADS");
  CHECK(ergocert::cli::worker_count() >= 1);
}
