#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "mzrom/io.hpp"
#include "run_config.hpp"

using namespace mzrom;
namespace fs = std::filesystem;

namespace {
struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "mzrom");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh(const std::string& name) {
  auto dir = fs::temp_directory_path() / "mzrom-unit" / "cli" / name;
  fs::remove_all(dir);
  return dir;
}

void collect_keys(const cli::json& j, const std::string& prefix, std::vector<std::string>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      collect_keys(*it, key, out);
    } else {
      out.push_back(key);
    }
  }
}
}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(invoke({}).code == cli::kValidation);
  CHECK(invoke({"teleport"}).code == cli::kValidation);
  CHECK(invoke({"full-solve", "--bogus"}).code == cli::kValidation);
  const auto missing = invoke({"--config", "/nonexistent/cfg.json", "full-solve"});
  CHECK(missing.code == cli::kValidation);
  CHECK(missing.err.find("/nonexistent/cfg.json") != std::string::npos);
  CHECK(invoke({"--set", "full_solve.nope=1", "full-solve"}).code == cli::kValidation);
  CHECK(invoke({"--set", "full_solve.T=0.1234567", "full-solve"}).code == cli::kValidation);
  CHECK(invoke({"--set", "training.mode=\"sideways\"", "train-surrogate"}).code == cli::kValidation);

  const auto bad = fresh("badcfg") / "cfg.json";
  fs::create_directories(bad.parent_path());
  write_file_atomic(bad, "{ not json");
  CHECK(invoke({"--config", bad.string(), "full-solve"}).code == cli::kValidation);
  write_file_atomic(bad, R"({"extra": 1})");
  CHECK(invoke({"--config", bad.string(), "full-solve"}).code == cli::kValidation);
}

TEST_CASE("help and version") {
  const auto v = invoke({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find(MZROM_VERSION) != std::string::npos);
  const auto h = invoke({"--help"});
  CHECK(h.code == 0);
  for (const char* sub : {"full-solve", "train-surrogate", "stability", "nl-demo", "vb-kernels", "vb-rom",
                          "oracle-linear"})
    CHECK(h.out.find(sub) != std::string::npos);
}

TEST_CASE("config round trip and overrides") {
  const auto def = cli::default_config();
  const auto j = cli::to_json(def);
  CHECK(cli::to_json(cli::from_json(j)) == j);
  auto k = j;
  cli::apply_override(k, "vb.T=2");
  cli::apply_override(k, "stability.ics=[\"sin\"]");
  cli::apply_override(k, "full_solve.initial_condition=expsin");
  const auto c = cli::from_json(k);
  CHECK(c.vb.run.T == 2.0);
  CHECK(c.stability.run.ics == std::vector<std::string>{"sin"});
  CHECK(c.full_solve.initial_condition == "expsin");
}

TEST_CASE("full-solve writes outputs and a complete manifest") {
  const auto dir = fresh("full");
  const auto r = invoke({"--out", dir.string(), "full-solve", "--T", "0.1"});
  REQUIRE(r.code == 0);
  for (const char* f : {"full_solve_energy.csv", "full_solve_state.csv", "full_solve_spectrum.csv", "manifest.json"})
    CHECK(fs::exists(dir / f));
  const auto m = cli::json::parse(read_file(dir / "manifest.json"));
  CHECK(m["subcommand"] == "full-solve");
  CHECK(m["version"] == MZROM_VERSION);
  CHECK(m["status"] == 0);
  CHECK(m["config"]["full_solve"]["T"] == 0.1);
  std::vector<std::string> schema, got;
  collect_keys(cli::to_json(cli::default_config()), "", schema);
  collect_keys(m["config"], "", got);
  for (const auto& key : schema) {
    CAPTURE(key);
    CHECK(std::find(got.begin(), got.end(), key) != got.end());
  }
  const auto e = read_csv(dir / "full_solve_energy.csv");
  CHECK(e.header == std::vector<std::string>{"t", "l2_norm"});
  CHECK(e.column("t").back() == doctest::Approx(0.1));
}

TEST_CASE("rerun from manifest is byte-identical") {
  const auto a = fresh("det-a"), b = fresh("det-b");
  REQUIRE(invoke({"--out", a.string(), "--set", "nl.T=2", "nl-demo", "--d", "1", "--nq", "8"}).code == 0);
  REQUIRE(invoke({"--config", (a / "manifest.json").string(), "--out", b.string(), "nl-demo"}).code == 0);
  const auto m = cli::json::parse(read_file(a / "manifest.json"));
  REQUIRE(!m["outputs"].empty());
  for (const auto& f : m["outputs"]) {
    const std::string name = f.get<std::string>();
    CAPTURE(name);
    CHECK(read_file(a / name) == read_file(b / name));
  }
  CHECK(fs::exists(a / "nl_case_1_1.csv"));
  CHECK(fs::exists(a / "nl_kernels_1.csv"));
}

TEST_CASE("oracle-linear exit codes") {
  const auto dir = fresh("oracle");
  CHECK(invoke({"--out", dir.string(), "--set", "oracle.T=1", "oracle-linear"}).code == 0);
  CHECK(fs::exists(dir / "oracle_linear.csv"));
  CHECK(invoke({"--out", dir.string(), "--set", "oracle.T=1", "--set", "oracle.kernel_tolerance=1e-15",
                "oracle-linear"})
            .code == cli::kNumerical);
}

TEST_CASE("train-surrogate and stability from a checkpoint") {
  const auto dir = fresh("train");
  const auto t = invoke({"--out", dir.string(), "--set", "training.grid_size=256", "--set", "training.hidden=16",
                         "train-surrogate", "--iterations", "3", "--ics", "1", "--windows", "2"});
  REQUIRE(t.code == 0);
  CHECK(read_csv(dir / "loss_curve.csv").column("loss").size() == 3);
  const auto s = invoke({"--out", (dir / "stab").string(), "--set", "stability.T=0.1", "--set",
                         "stability.ics=[\"sin\"]", "stability", "--checkpoint", (dir / "surrogate.ckpt").string()});
  CHECK(s.code == 0);
  const auto csv = read_csv(dir / "stab" / "stability_sin.csv");
  CHECK(csv.header == std::vector<std::string>{"t", "err_M3", "err_M12", "err_M127"});
}
