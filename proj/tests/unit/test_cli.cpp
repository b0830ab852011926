#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mvlevy/config.hpp"
#include "mvlevy_cli/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = mvlevy::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json load(const std::string& name) {
  std::ifstream in(std::string(MVLEVY_CONFIG_DIR) + "/" + name);
  return json::parse(in);
}

std::string write_config(const json& doc, const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mvlevy_cli_" + name + ".json");
  std::ofstream(p) << doc.dump(2);
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("validate the shipped default config") {
  const fs::path out = fs::temp_directory_path() / "mvlevy_cli_validate";
  const Outcome o = run_cli({"validate", "--config", std::string(MVLEVY_CONFIG_DIR) + "/default.json", "--out", out});
  CHECK(o.code == 0);
  for (const char* name : {"A1: pass", "A3: pass", "B1: pass", "B2: pass", "B3: pass"})
    CHECK(o.out.find(name) != std::string::npos);
  CHECK(o.out.find("manifest.json") != std::string::npos);
}

TEST_CASE("strong dissipativity violation exits 2") {
  json doc = load("default.json");
  doc["coefficients"]["c"] = 1.0;
  const Outcome o = run_cli({"validate", "--config", write_config(doc, "c1")});
  CHECK(o.code == 2);
  CHECK(o.err.find("B3") != std::string::npos);
  CHECK(o.err.find("strong dissipative") != std::string::npos);

  // No computation on invalid assumptions.
  const fs::path out = fs::temp_directory_path() / "mvlevy_cli_refused";
  fs::remove_all(out);
  CHECK(run_cli({"simulate", "--config", write_config(doc, "c1"), "--out", out}).code == 0);
  CHECK(run_cli({"rate-study", "--config", write_config(doc, "c1"), "--out", out}).code == 2);
  CHECK_FALSE(fs::exists(out / "rate-study"));
}

TEST_CASE("malformed configs exit 2 with a pointer") {
  const Outcome typo = run_cli({"simulate", "--config", write_config({{"sim", {{"hh", 1}}}}, "typo")});
  CHECK(typo.code == 2);
  CHECK(typo.err.find("/sim/hh") != std::string::npos);

  const fs::path bad = fs::temp_directory_path() / "mvlevy_cli_broken.json";
  std::ofstream(bad) << "{ not json";
  CHECK(run_cli({"validate", "--config", bad.string()}).code == 2);
  CHECK(run_cli({"validate", "--config", "/nonexistent/cfg.json"}).code == 1);
  CHECK(run_cli({"dance"}).code == 2);
  CHECK(run_cli({"validate"}).code == 2);
  CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("smoke rate study") {
  const fs::path out = fs::temp_directory_path() / "mvlevy_cli_smoke";
  fs::remove_all(out);
  const std::string cfg = std::string(MVLEVY_CONFIG_DIR) + "/smoke.json";
  const Outcome o = run_cli({"rate-study", "--config", cfg, "--out", out, "--threads", "1"});
  REQUIRE(o.code == 0);
  const fs::path dir = fs::path(o.out.substr(o.out.rfind('\n', o.out.size() - 2) + 1)).parent_path();
  std::ifstream csv(dir / "result.csv");
  std::string line;
  int rows = -1;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 4);

  const std::string first = slurp(dir / "manifest.json");
  const Outcome again = run_cli({"rate-study", "--config", cfg, "--out", out, "--threads", "3"});
  REQUIRE(again.code == 0);
  CHECK(slurp(dir / "manifest.json") == first);

  const fs::path other = out / "elsewhere";
  const Outcome moved = run_cli({"rate-study", "--config", cfg, "--out", other, "--threads", "2"});
  REQUIRE(moved.code == 0);
  const fs::path moved_dir = fs::path(moved.out.substr(moved.out.rfind('\n', moved.out.size() - 2) + 1)).parent_path();
  CHECK(moved_dir != dir);
  CHECK(slurp(moved_dir / "manifest.json") == first);

  const Outcome reseeded = run_cli({"rate-study", "--config", cfg, "--out", out, "--seed", "5"});
  REQUIRE(reseeded.code == 0);
  CHECK(reseeded.out != o.out);
}
