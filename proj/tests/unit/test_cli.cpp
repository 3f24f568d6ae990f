#include <cstdlib>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "doctest.h"
#include "fastphase/tensor_io.hpp"
#include "fastphase/winding.hpp"
#include "json.hpp"
#include "test_support.hpp"

using namespace fastphase;
using namespace fastphase::testing;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

json read_json(const std::string& path) { return json::parse(slurp(path)); }

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("gen is deterministic and validates its flags") {
  TempDir dir("cli_gen");
  REQUIRE(run({"gen", "--shape", "6x6", "--seed", "3", "--out", dir / "a"}).code == cli::kExitOk);
  REQUIRE(run({"gen", "--shape", "6x6", "--seed", "3", "--out", dir / "b"}).code == cli::kExitOk);
  CHECK(slurp(dir / "a/y.fpt") == slurp(dir / "b/y.fpt"));
  CHECK(slurp(dir / "a/truth.fpt") == slurp(dir / "b/truth.fpt"));
  CHECK(slurp(dir / "a/meta.json") == slurp(dir / "b/meta.json"));
  const json meta = read_json(dir / "a/meta.json");
  CHECK(meta["support"] == json({6, 6}));
  CHECK(meta["m"] == json({12, 12}));
  CHECK(meta["seed"] == 3);

  CHECK(run({"gen", "--shape", "6x6", "--rho", "1.5", "--out", dir / "c"}).code == cli::kExitUsage);
  CHECK(run({"gen", "--shape", "6x0", "--out", dir / "c"}).code == cli::kExitUsage);
  CHECK(run({"gen", "--shape", "4x4", "--w", "4,0", "--out", dir / "c"}).code == cli::kExitUsage);
  CHECK(run({"gen", "--out", dir / "c"}).code == cli::kExitUsage);
  CHECK(run({"gen", "--shape", "4x4", "--out", dir / "c", "--bogus"}).code == cli::kExitUsage);
}

TEST_CASE("solve writes the estimate and a report") {
  TempDir dir("cli_solve");
  REQUIRE(run({"gen", "--shape", "8x8", "--seed", "1", "--out", dir / "inst"}).code == 0);
  const Run r = run({"solve", "--instance", dir / "inst", "--out", dir / "res"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("converged") != std::string::npos);
  const json rep = read_json(dir / "res/report.json");
  CHECK(rep["solver"]["converged"] == true);
  CHECK(rep["rmse_db"].get<double>() <= -80);
  CHECK(rep["relative_error"].get<double>() <= 1e-8);
  CHECK(rep["support"] == "8x8");
  CHECK(rep["solver"]["wall_seconds"] == 0.0);
  CHECK(read_complex_tensor(dir / "res/xhat.fpt").shape() == Shape{8, 8});

  // A loose tolerance stops early with a correspondingly larger cost.
  const Run loose = run({"solve", "--instance", dir / "inst", "--out", dir / "loose", "--epsilon", "1e-4"});
  CHECK(loose.code == cli::kExitOk);
  const json lrep = read_json(dir / "loose/report.json");
  CHECK(lrep["solver"]["final_cost"].get<double>() <= 1e-4);

  const Run capped = run({"solve", "--instance", dir / "inst", "--out", dir / "cap", "--max-iter", "1",
                          "--restarts", "0", "--cost", "ls"});
  CHECK((capped.code == cli::kExitOk || capped.code == cli::kExitNotConverged));

  CHECK(run({"solve", "--instance", dir / "missing"}).code == cli::kExitIo);
  CHECK(run({"solve", "--instance", dir / "inst", "--cost", "l1"}).code == cli::kExitUsage);
}

TEST_CASE("corrupted tensors are reported as I/O errors with an offset") {
  TempDir dir("cli_bad");
  REQUIRE(run({"gen", "--shape", "4x4", "--out", dir / "inst"}).code == 0);
  std::string bytes = slurp(dir / "inst/y.fpt");
  bytes[0] = 'X';
  write_file(dir / "inst/y.fpt", bytes);
  const Run r = run({"solve", "--instance", dir / "inst"});
  CHECK(r.code == cli::kExitIo);
  CHECK(r.err.find("offset 0") != std::string::npos);
}

TEST_CASE("winding and schwarz-init print JSON") {
  TempDir dir("cli_wind");
  REQUIRE(run({"gen", "--shape", "6x5", "--w", "1,3", "--seed", "2", "--out", dir / "inst"}).code == 0);
  const Run w = run({"winding", "--instance", dir / "inst"});
  REQUIRE(w.code == 0);
  const json j = json::parse(w.out);
  const MultiIndex est = j["w"].get<MultiIndex>();
  CHECK(same_up_to_reflection(est, {1, 3}, Shape{6, 5}));
  CHECK(j["planted"] == json({1, 3}));
  CHECK(j.contains("tie"));

  const Run s = run({"schwarz-init", "--instance", dir / "inst", "--w", "1,3", "--factor", "4"});
  REQUIRE(s.code == 0);
  const json sj = json::parse(s.out);
  CHECK(sj["w"] == json({1, 3}));
  CHECK(read_complex_tensor(dir / "inst/x0.fpt").shape() == Shape{6, 5});
  CHECK(sj.contains("relative_error"));
}

TEST_CASE("sweeps write CSV and summaries reproducibly") {
  TempDir dir("cli_sweep");
  const std::vector<std::string> noise = {"sweep", "noise", "--shape", "8x8", "--impulse-magnitude", "64",
                                          "--snr", "20,40", "--trials", "2", "--seed", "4"};
  auto a = noise;
  a.insert(a.end(), {"--out", dir / "a", "--jobs", "1"});
  auto b = noise;
  b.insert(b.end(), {"--out", dir / "b", "--jobs", "3"});
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  CHECK(slurp(dir / "a/noise.csv") == slurp(dir / "b/noise.csv"));
  const json s = read_json(dir / "a/summary.json");
  CHECK(s["by_snr"].size() == 3);
  CHECK(s["median_strictly_decreasing"] == true);

  REQUIRE(run({"sweep", "quadrature", "--shape", "4x4", "--trials", "3", "--reference-factor", "16", "--out",
               dir / "q"})
              .code == 0);
  CHECK(slurp(dir / "q/quadrature.csv").rfind("factor,quadrature_error,identity_error\n", 0) == 0);

  REQUIRE(run({"sweep", "wf", "--sides", "2", "--trials", "5", "--wf-max-iter", "200", "--out", dir / "w"}).code ==
          0);
  CHECK(read_json(dir / "w/summary.json").is_object());

  REQUIRE(run({"sweep", "condition", "--shape", "3x3", "--ratios", "2,100", "--out", dir / "c"}).code == 0);
  CHECK(!slurp(dir / "c/condition.csv").empty());
}

TEST_CASE("JSON config applies to sweeps and explicit flags win") {
  TempDir dir("cli_cfg");
  write_file(dir / "cfg.json",
             R"({"shape": "4x4", "trials": 2, "reference_factor": 16, "factors": [1, 2]})");
  REQUIRE(run({"--config", dir / "cfg.json", "sweep", "quadrature", "--out", dir / "q"}).code == 0);
  const json s = read_json(dir / "q/summary.json");
  CHECK(s.dump().find("4x4") != std::string::npos);
  std::istringstream csv(slurp(dir / "q/quadrature.csv"));
  std::string line;
  int rows = -1;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 2);

  REQUIRE(run({"--config", dir / "cfg.json", "sweep", "quadrature", "--factors", "1,2,4", "--out", dir / "q3"})
              .code == 0);
  std::istringstream csv3(slurp(dir / "q3/quadrature.csv"));
  rows = -1;
  while (std::getline(csv3, line)) ++rows;
  CHECK(rows == 3);

  write_file(dir / "bad.json", R"({"no_such_flag": 1})");
  CHECK(run({"--config", dir / "bad.json", "sweep", "quadrature", "--out", dir / "x"}).code == cli::kExitUsage);
  CHECK(run({"--config", dir / "missing.json", "sweep", "quadrature", "--out", dir / "x"}).code == cli::kExitIo);
}

TEST_CASE("help lists defaults and the seed comes from the environment") {
  const Run h = run({"sweep", "noise", "--help"});
  CHECK(h.code == 0);
  CHECK(h.out.find("32x32") != std::string::npos);
  CHECK(h.out.find("--impulse-magnitude") != std::string::npos);

  TempDir dir("cli_env");
  ::setenv("FASTPHASE_SEED", "9", 1);
  REQUIRE(run({"gen", "--shape", "4x4", "--out", dir / "env"}).code == 0);
  ::unsetenv("FASTPHASE_SEED");
  REQUIRE(run({"gen", "--shape", "4x4", "--seed", "9", "--out", dir / "flag"}).code == 0);
  CHECK(slurp(dir / "env/y.fpt") == slurp(dir / "flag/y.fpt"));

  ::setenv("FASTPHASE_SEED", "nope", 1);
  CHECK(run({"gen", "--shape", "4x4", "--out", dir / "bad"}).code == cli::kExitUsage);
  ::unsetenv("FASTPHASE_SEED");
}
