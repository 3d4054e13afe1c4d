#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "oracle_values.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

const std::string& cli_path() {
  static const std::string path = []() -> std::string {
    if (const char* env = std::getenv("BELLSTAT_CLI_PATH")) return env;
#ifdef BELLSTAT_CLI_PATH
    return BELLSTAT_CLI_PATH;
#else
    return "";
#endif
  }();
  REQUIRE_MESSAGE(!path.empty(), "BELLSTAT_CLI_PATH must point at the binary");
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path scratch_file(const std::string& tag) {
  static std::atomic<int> counter{0};
  return fs::temp_directory_path() /
         ("bellstat_test_" + std::to_string(::getpid()) + "_" + tag + "_" +
          std::to_string(counter++));
}

CliResult run_cli(const std::string& args, const std::string& env = "") {
  const fs::path out = scratch_file("out");
  const fs::path err = scratch_file("err");
  std::string command = env;
  if (!command.empty()) command += " ";
  command += "\"" + cli_path() + "\" " + args + " >" + out.string() + " 2>" +
             err.string();
  const int status = std::system(command.c_str());
  CliResult result;
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out);
  result.err = slurp(err);
  fs::remove(out);
  fs::remove(err);
  return result;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

double to_double(const std::string& text) { return std::strtod(text.c_str(), nullptr); }

double rel_err(double value, double reference) {
  return std::abs(value - reference) / std::abs(reference);
}

double z2_closed(double c) { return (1.0 - std::sqrt(1.0 - c * c)) / 2.0; }

TEST_CASE("bound: enumeration agrees with the closed-form bound") {
  const CliResult r = run_cli("bound --n 3 --m 3 --brute-force");
  REQUIRE(r.code == 0);
  const json payload = json::parse(r.out);
  CHECK(payload["beta_c"].get<long long>() == 13);
  CHECK(payload["brute_force_min"].get<long long>() == 13);
  CHECK(payload["match"].get<bool>() == true);
  CHECK(payload["n_states"].get<long long>() == 120);
  CHECK(payload["minimizer_count"].get<long long>() >= 1);
  CHECK(payload["n"].get<long long>() == 3);
  CHECK(payload["m"].get<long long>() == 3);
  CHECK(payload["manifest"]["subcommand"] == "bound");
  CHECK(payload["manifest"]["tool_version"] == "1.0.0");
  CHECK(payload["manifest"]["parameters"]["--n"] == "3");
}

TEST_CASE("bound: without enumeration the comparison fields are null") {
  const CliResult r = run_cli("bound --n 5 --m 2");
  REQUIRE(r.code == 0);
  const json payload = json::parse(r.out);
  CHECK(payload["beta_c"].get<long long>() == 10);
  CHECK(payload["brute_force_min"].is_null());
  CHECK(payload["match"].is_null());
  CHECK(payload["minimizer_count"].is_null());
}

TEST_CASE("usage problems exit with code 2 and a stderr message") {
  for (const char* args : {"bound --m 3",               // missing required --n
                           "bound --n 1 --m 2 --bogus",  // unknown flag
                           "figure fig9",                // not a figure name
                           "witness --m 4 --cb 0.6 --zeta2 0.1 --nu 2"}) {
    const CliResult r = run_cli(args);
    CHECK_MESSAGE(r.code == 2, args);
    CHECK_MESSAGE(!r.err.empty(), args);
  }
}

TEST_CASE("library errors exit with code 1 and a JSON error object") {
  const CliResult domain = run_cli("witness --m 2 --cb 1.5 --zeta2 0.1");
  REQUIRE(domain.code == 1);
  const json domain_payload = json::parse(domain.out);
  CHECK(domain_payload["error"] == "domain_error");
  CHECK(!domain_payload["detail"].get<std::string>().empty());

  const CliResult infeasible =
      run_cli("squeeze --n 1000 --cb 0.98 --epsilon 0.1 --runs-budget 10000");
  REQUIRE(infeasible.code == 1);
  CHECK(json::parse(infeasible.out)["error"] == "infeasible");
}

TEST_CASE("witness: asymptotic family at the reference point") {
  const CliResult r = run_cli("witness --m inf --cb 0.98 --zeta2 0.272");
  REQUIRE(r.code == 0);
  const json payload = json::parse(r.out);
  CHECK(payload["m"] == "inf");
  CHECK(rel_err(payload["nu"].get<double>(), oracle::kNuViolation) < 1e-12);
  CHECK(rel_err(payload["witness_value"].get<double>(), oracle::kWStatRef) <
        1e-12);
}

TEST_CASE("witness: finite family reports angles and multiplier") {
  const CliResult r = run_cli("witness --m 4 --cb 0.6 --zeta2 0.1");
  REQUIRE(r.code == 0);
  const json payload = json::parse(r.out);
  CHECK(payload["m"].get<int>() == 4);
  CHECK(rel_err(payload["lambda"].get<double>(), oracle::kLambdaRootM4) < 1e-9);
  CHECK(rel_err(payload["witness_value"].get<double>(), oracle::kWitnessM4) <
        1e-10);
  CHECK(payload["thetas"].size() == 2);  // first m/2; the rest by antisymmetry
}

TEST_CASE("curve: CSV output matches the closed form, manifest on stderr") {
  const CliResult r = run_cli("curve --m 2 --cb-min 0 --cb-max 0.9 --points 10");
  REQUIRE(r.code == 0);
  const std::vector<std::string> lines = split_lines(r.out);
  REQUIRE(lines.size() == 11);
  CHECK(lines[0] == "cb,zeta2_critical");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> fields = split_fields(lines[i]);
    REQUIRE(fields.size() == 2);
    const double cb = to_double(fields[0]);
    const double zeta = to_double(fields[1]);
    CHECK(std::abs(zeta - z2_closed(cb)) < 1e-8);
  }
  const json manifest = json::parse(r.err);
  CHECK(manifest["subcommand"] == "curve");

  const CliResult quiet =
      run_cli("--quiet curve --m 2 --cb-min 0 --cb-max 0.9 --points 10");
  REQUIRE(quiet.code == 0);
  CHECK(quiet.err.empty());
  CHECK(quiet.out == r.out);
}

TEST_CASE("curve: JSON and CSV encode identical values") {
  const std::string args = "curve --m 2 --cb-min 0.1 --cb-max 0.8 --points 8";
  const CliResult csv = run_cli("--quiet " + args);
  const CliResult as_json = run_cli("--format json " + args);
  REQUIRE(csv.code == 0);
  REQUIRE(as_json.code == 0);

  const json payload = json::parse(as_json.out);
  CHECK(payload["columns"] == json::array({"cb", "zeta2_critical"}));
  CHECK(payload["manifest"]["subcommand"] == "curve");

  const std::vector<std::string> lines = split_lines(csv.out);
  REQUIRE(lines.size() == payload["rows"].size() + 1);
  for (std::size_t i = 0; i < payload["rows"].size(); ++i) {
    const std::vector<std::string> fields = split_fields(lines[i + 1]);
    // %.17g round-trips doubles exactly, so the encodings must agree bitwise.
    CHECK(to_double(fields[0]) == payload["rows"][i][0].get<double>());
    CHECK(to_double(fields[1]) == payload["rows"][i][1].get<double>());
  }
}

TEST_CASE("curve: the asymptotic family starts at zero") {
  const CliResult r =
      run_cli("--quiet curve --m inf --cb-min 0 --cb-max 0.5 --points 3");
  REQUIRE(r.code == 0);
  const std::vector<std::string> lines = split_lines(r.out);
  REQUIRE(lines.size() == 4);
  const std::vector<std::string> first = split_fields(lines[1]);
  CHECK(to_double(first[0]) == 0.0);
  CHECK(std::abs(to_double(first[1])) < 1e-12);
}

TEST_CASE("file output is atomic and carries a manifest sidecar") {
  const fs::path target = scratch_file("table");
  const CliResult r = run_cli("--out " + target.string() +
                              " curve --m 2 --cb-min 0 --cb-max 0.5 --points 5");
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  REQUIRE(fs::exists(target));
  const fs::path sidecar = target.string() + ".manifest.json";
  REQUIRE(fs::exists(sidecar));

  const std::vector<std::string> lines = split_lines(slurp(target));
  CHECK(lines.size() == 6);
  CHECK(lines[0] == "cb,zeta2_critical");
  const json manifest = json::parse(slurp(sidecar));
  CHECK(manifest["subcommand"] == "curve");
  CHECK(manifest["tool_version"] == "1.0.0");
  fs::remove(target);
  fs::remove(sidecar);
}

TEST_CASE("simulate: seed controls the experiment exactly") {
  const std::string args =
      "simulate --model binomial --mu 0 --n 100 --runs 50 --trials 200";
  const CliResult a = run_cli("--seed 7 " + args);
  const CliResult b = run_cli("--seed 7 " + args);
  const CliResult c = run_cli("--seed 8 " + args);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  REQUIRE(c.code == 0);
  CHECK(a.out == b.out);

  const json pa = json::parse(a.out);
  const json pc = json::parse(c.out);
  CHECK(pa["mean_T"].get<double>() != pc["mean_T"].get<double>());
  CHECK(pa["seed"].get<std::uint64_t>() == 7);
  CHECK(pa["analytic_mean"].get<double>() == 0.0);
  CHECK(pa["analytic_bernstein_p"].get<double>() == 1.0);  // t0 = 0 default
  CHECK(pa["manifest"]["seed"].get<std::uint64_t>() == 7);
  CHECK(pa["model"] == "binomial");
  CHECK(pa["trials"].get<long long>() == 200);
}

TEST_CASE("runs: default point uses the violation scale") {
  const CliResult r = run_cli("runs");
  REQUIRE(r.code == 0);
  const json payload = json::parse(r.out);
  CHECK(rel_err(payload["nu"].get<double>(), oracle::kNuViolation) < 1e-12);
  CHECK(rel_err(payload["t0"].get<double>(), oracle::kWStatRef) < 1e-12);
  CHECK(std::abs(payload["runs"].get<long long>() - oracle::kMViolation) <= 2);
  CHECK(payload["bound"] == "bernstein");
  CHECK(payload["n"].get<long long>() == 100000);
}

TEST_CASE("runs: optimizing the settings scale reaches the reference count") {
  const CliResult r = run_cli("runs --optimize-nu");
  REQUIRE(r.code == 0);
  const json payload = json::parse(r.out);
  CHECK(std::abs(payload["runs"].get<long long>() - oracle::kMStar) <= 3);
  CHECK(std::abs(payload["runs_per_spin"].get<double>() - 76.26) < 0.01);
  CHECK(rel_err(payload["nu"].get<double>(), oracle::kNuStar) < 1e-4);
}

TEST_CASE("crossover: default support reproduces the extremal level") {
  const CliResult r = run_cli("crossover");
  REQUIRE(r.code == 0);
  const json payload = json::parse(r.out);
  CHECK(std::abs(payload["epsilon_star"].get<double>() -
                 oracle::kCrossoverExtremal) < 1e-10);
  CHECK(payload["t_l"].get<double>() == -1.0);
  CHECK(payload["t_u"].get<double>() == 1.0);
  CHECK(payload["t0"].get<double>() == -1.0);

  // Scalar CSV rendering puts the same payload on one header + one row.
  const CliResult csv = run_cli("--format csv --quiet crossover");
  REQUIRE(csv.code == 0);
  CHECK(csv.err.empty());
  const std::vector<std::string> lines = split_lines(csv.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "epsilon_star,t_l,t_u,t0");
  CHECK(std::abs(to_double(split_fields(lines[1])[0]) -
                 oracle::kCrossoverExtremal) < 1e-10);

  // Without --quiet the manifest lands on stderr.
  const CliResult loud = run_cli("--format csv crossover");
  REQUIRE(loud.code == 0);
  CHECK(json::parse(loud.err)["subcommand"] == "crossover");
}

TEST_CASE("squeeze: per-N limit and asymptotic expansion") {
  const CliResult r = run_cli("squeeze --n 1000");
  REQUIRE(r.code == 0);
  const json payload = json::parse(r.out);
  CHECK(std::abs(payload["cb_star"].get<double>() - oracle::kCbStar1e3) <
        1e-9);
  CHECK(std::abs(payload["zeta2_star"].get<double>() - oracle::kZStar1e3) <
        1e-9);
  CHECK(rel_err(payload["zeta2_star_asymptotic"].get<double>(),
                oracle::kZAsym1e3) < 1e-12);
  CHECK(payload["n"].get<long long>() == 1000);
}

TEST_CASE("squeeze: run-budget mode inverts the sample-size bound") {
  const CliResult r =
      run_cli("squeeze --n 1000 --cb 0.98 --epsilon 0.1 --runs-budget 1000000");
  REQUIRE(r.code == 0);
  const json payload = json::parse(r.out);
  CHECK(std::abs(payload["zeta2_max_finite_runs"].get<double>() -
                 oracle::kZetaFiniteRuns) < 1e-5);
  CHECK(payload["runs_budget"].get<long long>() == 1000000);
}

TEST_CASE("figure: datasets have the advertised shape") {
  const CliResult fig2 = run_cli("--quiet figure fig2 --points 5");
  REQUIRE(fig2.code == 0);
  const std::vector<std::string> lines2 = split_lines(fig2.out);
  REQUIRE(lines2.size() == 6);
  CHECK(lines2[0] == "n,zeta2_star");
  CHECK(to_double(split_fields(lines2[1])[0]) == 10.0);
  CHECK(to_double(split_fields(lines2[5])[0]) == 1000000.0);

  const CliResult fig1 = run_cli("--quiet figure fig1 --points 5");
  REQUIRE(fig1.code == 0);
  const std::vector<std::string> lines1 = split_lines(fig1.out);
  REQUIRE(lines1.size() == 3 * 5 + 1 + 1);  // three curves, the point, header
  CHECK(lines1[0] == "series,cb,zeta2");
  const std::vector<std::string> last = split_fields(lines1.back());
  CHECK(last[0] == "point");
  CHECK(to_double(last[1]) == 0.98);
  CHECK(to_double(last[2]) == 0.272);
}

TEST_CASE("thread count can come from the environment") {
  const CliResult r = run_cli("--quiet curve --m 2 --points 5",
                              "BELLSTAT_THREADS=2");
  CHECK(r.code == 0);
  const CliResult flag = run_cli("--threads 2 --quiet curve --m 2 --points 5");
  CHECK(flag.code == 0);
  CHECK(flag.out == r.out);
}

}  // namespace
