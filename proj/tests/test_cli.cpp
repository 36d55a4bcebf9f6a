#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "skewwalk/cli.hpp"

using namespace skewwalk;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() /
                       ("skewwalk_test_" + tag + "_" +
                        std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

}  // namespace

TEST_CASE("config parsing fills lists and defaults") {
  const ExperimentConfig cfg = parse_config(
      {"tightness-scan", "--alpha", "0.7", "--n", "64,256,1024",
       "--horizon", "1"});
  REQUIRE(cfg.command == Command::tightness_scan);
  REQUIRE(cfg.n_list == std::vector<long long>{64, 256, 1024});
  REQUIRE(cfg.alphas == std::vector<double>{0.7});
  REQUIRE(cfg.seed == 0);
  REQUIRE(cfg.format == OutputFormat::csv);
}

TEST_CASE("out-of-range alpha raises a usage error naming the flag") {
  try {
    parse_config({"pmf", "--alpha", "1.5"});
    FAIL("expected usage_error");
  } catch (const usage_error& e) {
    const std::string what = e.what();
    REQUIRE(what.find("alpha") != std::string::npos);
    REQUIRE(what.find("(0,1)") != std::string::npos);
  }
}

TEST_CASE("unknown flags and missing commands are usage errors") {
  REQUIRE_THROWS_AS(parse_config({"pmf", "--bogus", "3"}), usage_error);
  REQUIRE_THROWS_AS(parse_config({"--alpha", "0.5"}), usage_error);
  REQUIRE_THROWS_AS(parse_config({"moments", "--alpha", "0.5"}), usage_error);
  REQUIRE_THROWS_AS(
      parse_config({"converge", "--t", "0.123", "--n", "100"}), usage_error);
}

TEST_CASE("exit statuses: empty argv, usage, success are distinct") {
  std::string text;
  REQUIRE(run_cli({}, &text) == 1);
  REQUIRE(text.find("skewwalk <command>") != std::string::npos);
  REQUIRE(run_cli({"pmf", "--alpha", "2.0"}) == 2);
  const fs::path dir = fresh_dir("codes");
  REQUIRE(run_cli({"pmf", "--alpha", "0.7", "--n", "2", "--out",
                   dir.string()}) == 0);
  REQUIRE(run_cli({"--help"}, &text) == 0);
}

TEST_CASE("resource overruns exit with status 3") {
  const fs::path dir = fresh_dir("resource");
  REQUIRE(run_cli({"pmf", "--alpha", "0.5", "--n", "99999999", "--out",
                   dir.string()}) == 3);
  // an unwritable output path is reported the same way
  const fs::path file = dir / "blocker";
  std::ofstream(file) << "x";
  REQUIRE(run_cli({"pmf", "--alpha", "0.5", "--n", "4", "--out",
                   (file / "sub").string()}) == 3);
}

TEST_CASE("pmf command emits the exact two-step law") {
  const fs::path dir = fresh_dir("pmf");
  REQUIRE(run_cli({"pmf", "--alpha", "0.7", "--n", "2", "--out",
                   dir.string()}) == 0);
  const std::string csv = slurp(dir / "pmf.csv");
  const std::string expected = "k,m,prob\n2,-2," +
                               format_double((1.0 - 0.7) * 0.5) + "\n2,0," +
                               format_double(0.5) + "\n2,2," +
                               format_double(0.7 * 0.5) + "\n";
  REQUIRE(csv == expected);
}

TEST_CASE("manifests echo a config that reparses to itself") {
  const fs::path dir = fresh_dir("roundtrip");
  ExperimentConfig cfg = parse_config(
      {"tightness-scan", "--alpha", "0.25,0.5", "--n", "8,16", "--seed",
       "3", "--threads", "2", "--nongrid", "10", "--out", dir.string()});
  const RunManifest manifest = run(cfg);
  const ExperimentConfig echoed = parse_config(manifest.config_argv);
  REQUIRE(echoed == cfg);
}

TEST_CASE("re-running a config reproduces byte-identical data files") {
  const fs::path dir1 = fresh_dir("rerun1");
  const fs::path dir2 = fresh_dir("rerun2");
  for (int threads : {1, 2}) {
    const std::vector<std::string> base = {
        "simulate", "--alpha", "0.7", "--n",       "16",
        "--replicates", "20000", "--seed",  "5", "--threads",
        std::to_string(threads)};
    std::vector<std::string> run1 = base;
    run1.push_back("--out");
    run1.push_back(dir1.string());
    std::vector<std::string> run2 = base;
    run2.push_back("--out");
    run2.push_back(dir2.string());
    REQUIRE(run_cli(run1) == 0);
    REQUIRE(run_cli(run2) == 0);
    REQUIRE(slurp(dir1 / "simulate.csv") == slurp(dir2 / "simulate.csv"));
  }
  // thread count does not change the bytes either
  const fs::path dir3 = fresh_dir("rerun3");
  REQUIRE(run_cli({"tightness-scan", "--alpha", "0.3", "--n", "16,32",
                   "--threads", "1", "--nongrid", "25", "--out",
                   dir3.string()}) == 0);
  const std::string one = slurp(dir3 / "tightness_scan.csv");
  const std::string one_ng = slurp(dir3 / "tightness_scan_nongrid.csv");
  REQUIRE(run_cli({"tightness-scan", "--alpha", "0.3", "--n", "16,32",
                   "--threads", "2", "--nongrid", "25", "--out",
                   dir3.string()}) == 0);
  REQUIRE(slurp(dir3 / "tightness_scan.csv") == one);
  REQUIRE(slurp(dir3 / "tightness_scan_nongrid.csv") == one_ng);
}

TEST_CASE("manifest digests match the emitted bytes") {
  const fs::path dir = fresh_dir("digest");
  ExperimentConfig cfg = parse_config({"converge", "--alpha", "0.5,0.7",
                                       "--n", "100", "--t", "1", "--out",
                                       dir.string()});
  const RunManifest manifest = run(cfg);
  REQUIRE(manifest.files.size() == 1);
  const std::string bytes = slurp(dir / manifest.files[0].name);
  REQUIRE(digest_hex(bytes) == manifest.files[0].digest);
  REQUIRE(manifest.files[0].bytes == bytes.size());
}

TEST_CASE("tightness scan rows for the symmetric walk stay under 3") {
  const fs::path dir = fresh_dir("scan");
  REQUIRE(run_cli({"tightness-scan", "--alpha", "0.5", "--n", "16,64",
                   "--nongrid", "20", "--out", dir.string()}) == 0);
  std::ifstream in(dir / "tightness_scan.csv");
  std::string header, line;
  REQUIRE(std::getline(in, header));
  REQUIRE(header == "alpha,n,j,k,fourth_moment,ratio");
  int rows = 0;
  while (std::getline(in, line)) {
    const auto last_comma = line.rfind(',');
    REQUIRE(std::stod(line.substr(last_comma + 1)) < 3.0);
    ++rows;
  }
  REQUIRE(rows == 2);
}

TEST_CASE("json output mirrors the csv rows and embeds the manifest") {
  const fs::path dir = fresh_dir("json");
  REQUIRE(run_cli({"pmf", "--alpha", "0.7", "--n", "2", "--format", "json",
                   "--out", dir.string()}) == 0);
  const nlohmann::json j = nlohmann::json::parse(slurp(dir / "pmf.json"));
  REQUIRE(j["manifest"]["command"] == "pmf");
  REQUIRE(j["rows"].size() == 3);
  REQUIRE(j["rows"][0]["m"] == -2);
  REQUIRE(j["rows"][0]["prob"].get<double>() == (1.0 - 0.7) * 0.5);
  REQUIRE(j["rows"][2]["prob"].get<double>() == 0.7 * 0.5);
}

TEST_CASE("moments command reports the term breakdown") {
  const fs::path dir = fresh_dir("moments");
  REQUIRE(run_cli({"moments", "--alpha", "0.7", "--n", "8", "--j", "1",
                   "--k", "5", "--out", dir.string()}) == 0);
  const std::string csv = slurp(dir / "moments.csv");
  REQUIRE(csv.find("term_quad_cross") != std::string::npos);
  REQUIRE(run_cli({"moments", "--alpha", "0.7", "--n", "8", "--s", "0.3",
                   "--t", "0.8", "--out", dir.string()}) == 0);
  const std::string interp_csv = slurp(dir / "moments.csv");
  REQUIRE(interp_csv.find("nan") != std::string::npos);
}

TEST_CASE("simulate with path dump honors the dump flag only") {
  const fs::path dir = fresh_dir("dump");
  REQUIRE(run_cli({"simulate", "--alpha", "0.5", "--n", "8", "--replicates",
                   "10", "--out", dir.string()}) == 0);
  REQUIRE(!fs::exists(dir / "simulate_paths.csv"));
  REQUIRE(run_cli({"simulate", "--alpha", "0.5", "--n", "8", "--replicates",
                   "10", "--dump-paths", "--out", dir.string()}) == 0);
  REQUIRE(fs::exists(dir / "simulate_paths.csv"));
}
