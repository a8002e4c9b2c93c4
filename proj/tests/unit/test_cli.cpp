#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cpdg/cli.hpp"
#include "cpdg/version.hpp"

using namespace cpdg;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}
fs::path tmpdir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("cpdg_unit_" + name);
  fs::remove_all(d);
  return d;
}
}  // namespace

TEST_CASE("unknown subcommand") {
  CHECK_FALSE(cli::known_command("frobnicate"));
  CHECK(cli::known_command("edge-law"));
  std::ostringstream out;
  CHECK_THROWS(cli::dispatch("frobnicate", config::parse_config("{}"), {}, out));
}

TEST_CASE("edge-law report and artifacts") {
  const auto cfg = config::parse_config(R"({"lambda": 1, "edge_law": {"v": 1, "p": 1}})");
  const auto dir = tmpdir("edge");
  std::ostringstream out;
  CHECK(cli::dispatch("edge-law", cfg, {dir.string(), 1}, out) == cli::kExitOk);
  const auto rep = out.str();
  CHECK(rep.find("transmission_prob=0.25\n") != std::string::npos);
  CHECK(rep.find("config_hash=" + cfg.hash_hex()) != std::string::npos);
  CHECK(rep.find(std::string("version=") + kVersion) != std::string::npos);
  CHECK(rep.find("status=ok") != std::string::npos);
  CHECK(slurp(dir / "edge-law.report") == rep);
  const auto csv = slurp(dir / "edge-law.csv");
  CHECK(csv.rfind("lambda,v,p,transmission_prob", 0) == 0);
  CHECK(csv.find(cfg.hash_hex()) != std::string::npos);
}

TEST_CASE("simulate writes jsonl records and is reproducible") {
  const auto cfg = config::parse_config(
      R"({"graph": {"type": "complete", "n": 3}, "lambda": [0.5, 2], "replicas": 50, "horizon": 3, "seed": 9})");
  const auto d1 = tmpdir("sim1"), d2 = tmpdir("sim2");
  std::ostringstream o1, o2;
  CHECK(cli::dispatch("simulate", cfg, {d1.string(), 1}, o1) == cli::kExitOk);
  CHECK(cli::dispatch("simulate", cfg, {d2.string(), 2}, o2) == cli::kExitOk);
  CHECK(o1.str() == o2.str());
  CHECK(slurp(d1 / "simulate.jsonl") == slurp(d2 / "simulate.jsonl"));
  CHECK(slurp(d1 / "simulate.csv") == slurp(d2 / "simulate.csv"));
  std::istringstream lines(slurp(d1 / "simulate.jsonl"));
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    ++n;
    CHECK(line.find("\"config_hash\":\"" + cfg.hash_hex() + "\"") != std::string::npos);
  }
  CHECK(n == 100);
  CHECK(o1.str().find("p_alive[1]=") != std::string::npos);
}

TEST_CASE("phase, oracle and check subcommands") {
  std::ostringstream o;
  const auto dir = tmpdir("misc");
  CHECK(cli::dispatch("phase", config::parse_config(R"({"phase": {"alpha": [1.2], "eta": [0]}})"), {dir.string(), 1},
                      o) == cli::kExitOk);
  CHECK(o.str().find("phase=Subcritical") != std::string::npos);
  std::ostringstream p;
  CHECK(cli::dispatch("oracle",
                      config::parse_config(R"({"graph": {"type": "complete", "n": 2}, "lambda": 0, "oracle": {"t": 1}})"),
                      {dir.string(), 1}, p) == cli::kExitOk);
  CHECK(p.str().find("mean_extinction_time=1\n") != std::string::npos);
  CHECK(p.str().find("states=8\n") != std::string::npos);
  std::ostringstream q;
  CHECK(cli::dispatch("check",
                      config::parse_config(R"({"graph": {"type": "star_graph", "n": 5},
                                               "kernel": {"alpha": 1.2, "sigma": 1}, "lambda": 0.1})"),
                      {dir.string(), 1}, q) == cli::kExitOk);
  CHECK(q.str().find("lambda_star=") != std::string::npos);
}
