#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualres/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = dualres::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dualres_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> small_chevron(const fs::path& dir) {
  return {"--out", dir.string(), "--dims", "2", "chevron", "--detuning-span", "4", "--detuning-points", "3",
          "--tau-max", "200", "--tau-points", "11"};
}

}  // namespace

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  auto bad_points = small_chevron(dir);
  bad_points.back() = "1";
  const auto r = run(bad_points);
  CHECK(r.code == 2);
  CHECK(!r.err.empty());

  CHECK(run({"--out", dir.string(), "nosuch"}).code == 2);

  const auto off = run({"--out", dir.string(), "geff", "--search-lo", "4.50", "--search-hi", "4.55"});
  CHECK(off.code == 3);
  CHECK(off.err.find("no sign change") != std::string::npos);

  CHECK(run({"--device", (dir / "missing.json").string(), "--out", dir.string(), "geff"}).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("geff writes a manifest over its artifacts") {
  const auto dir = scratch("geff");
  const auto r = run({"--out", dir.string(), "geff", "--points", "31", "--ed-points", "0"});
  REQUIRE(r.code == 0);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.contains("config"));
  for (const char* name : {"geff.csv", "switch_off.json", "geff.svg"}) {
    CAPTURE(name);
    CHECK(manifest["artifacts"].contains(name));
    CHECK(fs::exists(dir / name));
  }
  const auto switch_off = nlohmann::json::parse(slurp(dir / "switch_off.json"));
  CHECK(switch_off["switch_off_ghz"].get<double>() == doctest::Approx(4.629439).epsilon(1e-6));
  fs::remove_all(dir);
}

TEST_CASE("repeated chevron runs are byte-identical") {
  const auto first = scratch("chevron_a");
  const auto second = scratch("chevron_b");
  REQUIRE(run(small_chevron(first)).code == 0);
  REQUIRE(run(small_chevron(second)).code == 0);
  for (const char* name : {"chevron.csv", "chevron.json", "chevron.svg", "manifest.json"}) {
    CAPTURE(name);
    CHECK(slurp(first / name) == slurp(second / name));
  }
  std::istringstream csv(slurp(first / "chevron.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "detuning_mhz,tau_ns,p1");
  fs::remove_all(first);
  fs::remove_all(second);
}

TEST_CASE("fit subcommand") {
  const auto dir = scratch("fit");
  fs::create_directories(dir);
  {
    std::ofstream trace(dir / "trace.csv");
    trace << "time_ns,value\n";
    for (int k = 0; k <= 100; ++k) trace << 100 * k << ',' << std::exp(-100.0 * k / 2500.0) << '\n';
  }
  const auto r = run({"--out", (dir / "o").string(), "fit", (dir / "trace.csv").string(), "--model", "exp_decay"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "o" / "fit.json"));
  CHECK(doc["model"] == "exp_decay");
  CHECK(run({"--out", (dir / "o").string(), "fit", (dir / "trace.csv").string(), "--model", "nope"}).code == 2);
  fs::remove_all(dir);
}
