#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "flipflow/cli.hpp"
#include "flipflow/io.hpp"

using namespace flipflow;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("flipflow_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args, const fs::path& capture) {
  const std::string cmd = std::string(FLIPFLOW_CLI_PATH) + " " + args + " > " +
                          capture.string() + " 2>&1";
  const int st = std::system(cmd.c_str());
  REQUIRE(st != -1);
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

json slurp_json(const fs::path& p) { return json::parse(slurp(p)); }

std::string chain2_config(const fs::path& out, const std::string& extra = "") {
  return std::string("{\"matrix\":{\"kind\":\"harmonic_chain\",\"n\":2},") +
         "\"energy\":0.5,\"law\":{\"kind\":\"exponential\",\"rate\":1.0}," +
         "\"t_end\":200.0,\"seeds\":[1,2],\"observables\":[\"H\",\"r1_sq\"]," +
         "\"out\":\"" + out.string() + "\"" + extra + "}";
}

}  // namespace

TEST_CASE("config loading validates structure") {
  fs::path dir = fresh_dir("cfg");
  spit(dir / "ok.json", chain2_config(dir / "out"));
  RunConfig cfg = load_config((dir / "ok.json").string());
  CHECK(cfg.matrix.kind == MatrixSource::Kind::harmonic_chain);
  CHECK(cfg.matrix.n == 2);
  CHECK(cfg.energy == 0.5);
  CHECK(cfg.t_end == 200.0);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2});

  spit(dir / "bad_key.json", "{\"matrx\":{}}");
  CHECK_THROWS_AS(load_config((dir / "bad_key.json").string()), ConfigError);
  spit(dir / "bad_energy.json", "{\"energy\":-1.0}");
  CHECK_THROWS_AS(load_config((dir / "bad_energy.json").string()),
                  ConfigError);
  spit(dir / "bad_law.json", "{\"law\":{\"kind\":\"weibull\"}}");
  CHECK_THROWS_AS(load_config((dir / "bad_law.json").string()), ConfigError);
  spit(dir / "bad_seeds.json", "{\"seeds\":[]}");
  CHECK_THROWS_AS(load_config((dir / "bad_seeds.json").string()), ConfigError);
  spit(dir / "not_json.json", "{nope");
  CHECK_THROWS_AS(load_config((dir / "not_json.json").string()), ConfigError);
  CHECK_THROWS_AS(load_config((dir / "absent.json").string()), ConfigError);
}

TEST_CASE("observable names parse and reject out-of-range indices") {
  auto fs3 = parse_observables(
      {"H", "r1_sq", "p3_sq", "q2_sq", "p1p2", "q1q3"}, 3);
  CHECK(fs3.size() == 6);
  CHECK(fs3[1].name() == "r1_sq");
  CHECK(fs3[2].name() == "p3_sq");
  CHECK(fs3[5].name() == "q1q3");
  CHECK_THROWS_AS(parse_observables({"r4_sq"}, 3), ConfigError);
  CHECK_THROWS_AS(parse_observables({"r0_sq"}, 3), ConfigError);
  CHECK_THROWS_AS(parse_observables({"momentum"}, 3), ConfigError);
}

TEST_CASE("matrix and state files round-trip") {
  fs::path dir = fresh_dir("io");
  Eigen::MatrixXd v = random_spd(3, 19);
  write_matrix((dir / "v.json").string(), v);
  CHECK(read_matrix((dir / "v.json").string()) == v);

  spit(dir / "v.csv", "2,-1\n-1,2\n");
  CHECK(read_matrix((dir / "v.csv").string()) == harmonic_chain(2));

  State psi;
  psi.q = Eigen::Vector3d(0.25, -1.5, 3.0 / 7.0);
  psi.p = Eigen::Vector3d(1e-17, 2.0, -0.125);
  write_state((dir / "psi.json").string(), psi);
  State back = read_state((dir / "psi.json").string());
  CHECK(back.q == psi.q);
  CHECK(back.p == psi.p);

  spit(dir / "bad_state.json", "{\"q\":[1,2],\"p\":[1]}");
  CHECK_THROWS_AS(read_state((dir / "bad_state.json").string()), ConfigError);
}

TEST_CASE("spectrum subcommand reports the chain relation") {
  fs::path dir = fresh_dir("spectrum");
  spit(dir / "cfg.json", chain2_config(dir / "out"));
  CHECK(run_cli("spectrum --config " + (dir / "cfg.json").string(),
                dir / "log.txt") == 0);
  json j = slurp_json(dir / "out" / "spectrum.json");
  CHECK(j["n"] == 2);
  CHECK(std::abs(j["omega_sq"][0].get<double>() - 1.0) < 1e-9);
  CHECK(std::abs(j["omega_sq"][1].get<double>() - 3.0) < 1e-9);
  CHECK(j["independence"] == "dependent");
  CHECK(j["relation"] == json::array({3, -1}));
  CHECK(j["mixing_dimension"] == 4);
  CHECK(j["in_v_plus"] == true);
}

TEST_CASE("simulate writes expected rows and is byte-stable") {
  fs::path dir = fresh_dir("simulate");
  spit(dir / "a.json", chain2_config(dir / "out_a"));
  spit(dir / "b.json", chain2_config(dir / "out_b"));
  spit(dir / "c.json", chain2_config(dir / "out_c", ",\"threads\":2"));
  spit(dir / "d.json", chain2_config(dir / "out_d", ",\"threads\":1"));
  CHECK(run_cli("simulate --config " + (dir / "a.json").string(),
                dir / "log_a.txt") == 0);
  CHECK(run_cli("simulate --config " + (dir / "b.json").string(),
                dir / "log_b.txt") == 0);
  CHECK(run_cli("simulate --config " + (dir / "c.json").string(),
                dir / "log_c.txt") == 0);
  CHECK(run_cli("simulate --config " + (dir / "d.json").string(),
                dir / "log_d.txt") == 0);

  const std::string a = slurp(dir / "out_a" / "results.csv");
  CHECK(a == slurp(dir / "out_b" / "results.csv"));
  CHECK(a == slurp(dir / "out_c" / "results.csv"));
  CHECK(a == slurp(dir / "out_d" / "results.csv"));

  // header plus one row per (seed, observable)
  CHECK(a.rfind("seed,T,observable,estimate,reference,abs_error\n", 0) == 0);
  CHECK(std::count(a.begin(), a.end(), '\n') == 5);
  CHECK(a.find("\n1,200,H,") != std::string::npos);
  CHECK(a.find("\n2,200,r1_sq,") != std::string::npos);
}

TEST_CASE("simulate honors the seed override") {
  fs::path dir = fresh_dir("seedflag");
  spit(dir / "cfg.json", chain2_config(dir / "out"));
  CHECK(run_cli("simulate --config " + (dir / "cfg.json").string() +
                    " --seed 9 --quiet",
                dir / "log.txt") == 0);
  const std::string csv = slurp(dir / "out" / "results.csv");
  CHECK(csv.find("\n9,") != std::string::npos);
  CHECK(csv.find("\n1,") == std::string::npos);
  CHECK(slurp(dir / "log.txt").empty());
}

TEST_CASE("simulate can dump events and a sampled trajectory") {
  fs::path dir = fresh_dir("dumps");
  const std::string cfg = std::string(
      "{\"matrix\":{\"kind\":\"harmonic_chain\",\"n\":2},\"energy\":0.5,") +
      "\"law\":{\"kind\":\"fixed_schedule\",\"gaps\":[0.7,0.9]}," +
      "\"t_end\":2.0,\"seeds\":[4],\"observables\":[\"H\"]," +
      "\"events\":true,\"trajectory_dt\":0.5,\"out\":\"" +
      (dir / "out").string() + "\"}";
  spit(dir / "cfg.json", cfg);
  CHECK(run_cli("simulate --config " + (dir / "cfg.json").string(),
                dir / "log.txt") == 0);

  const std::string ev = slurp(dir / "out" / "events_4.csv");
  CHECK(ev == "t_m,tau_m\n0.7,0.7\n1.6,0.9\n");

  const std::string tr = slurp(dir / "out" / "trajectory_4.csv");
  CHECK(tr.rfind("t,q1,q2,p1,p2\n", 0) == 0);
  CHECK(std::count(tr.begin(), tr.end(), '\n') == 6);  // header + 5 samples
  CHECK(tr.find("\n2,") != std::string::npos);         // row at t_end
}

TEST_CASE("steer subcommand emits a replayable schedule") {
  fs::path dir = fresh_dir("steer");
  const std::string cfg = std::string(
      "{\"matrix\":{\"kind\":\"harmonic_chain\",\"n\":2},\"energy\":0.5,") +
      "\"seeds\":[3],\"steering\":{\"eps\":0.1},\"out\":\"" +
      (dir / "out").string() + "\"}";
  spit(dir / "cfg.json", cfg);
  CHECK(run_cli("steer --config " + (dir / "cfg.json").string(),
                dir / "log.txt") == 0);
  json j = slurp_json(dir / "out" / "steer.json");
  CHECK(j["final_error"].get<double>() <= 0.1);

  SystemSpec s = decompose(harmonic_chain(2), 0.5);
  State from, fin;
  from.q = Eigen::Vector2d(j["initial_state"]["q"][0].get<double>(),
                           j["initial_state"]["q"][1].get<double>());
  from.p = Eigen::Vector2d(j["initial_state"]["p"][0].get<double>(),
                           j["initial_state"]["p"][1].get<double>());
  fin.q = Eigen::Vector2d(j["final_state"]["q"][0].get<double>(),
                          j["final_state"]["q"][1].get<double>());
  fin.p = Eigen::Vector2d(j["final_state"]["p"][0].get<double>(),
                          j["final_state"]["p"][1].get<double>());
  std::vector<double> taus = j["taus"].get<std::vector<double>>();
  CHECK(static_cast<int>(taus.size()) == j["flips_used"].get<int>());
  State replay = propagate(s, jcompose(s, from, taus),
                           j["terminal_flow"].get<double>());
  CHECK((replay.q - fin.q).norm() + (replay.p - fin.p).norm() < 1e-8);
}

TEST_CASE("report subcommand writes a verdict") {
  fs::path dir = fresh_dir("report");
  const std::string cfg = std::string(
      "{\"matrix\":{\"kind\":\"random_spd\",\"n\":3,\"seed\":7},") +
      "\"energy\":0.5,\"t_end\":500.0,\"seeds\":[1,2]," +
      "\"observables\":[\"H\",\"r1_sq\"]," +
      "\"report\":{\"chain_length\":2000,\"burn_in\":100,\"thin\":5," +
      "\"liouville_n\":2000,\"avg_threshold\":0.1,\"ks_threshold\":0.1}," +
      "\"out\":\"" + (dir / "out").string() + "\"}";
  spit(dir / "cfg.json", cfg);
  CHECK(run_cli("report --config " + (dir / "cfg.json").string(),
                dir / "log.txt") == 0);
  json j = slurp_json(dir / "out" / "report.json");
  CHECK(j["rows"].size() == 2);
  CHECK(j["rows"][0]["observable"] == "H");
  CHECK(j.contains("pass"));
  CHECK(j["chain_ks"].size() == 6);
  const std::string csv = slurp(dir / "out" / "results.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("exit codes distinguish config and numerical failures") {
  fs::path dir = fresh_dir("codes");
  spit(dir / "bad_key.json", "{\"matrx\":{}}");
  CHECK(run_cli("simulate --config " + (dir / "bad_key.json").string(),
                dir / "l1.txt") == 2);

  spit(dir / "bad_obs.json", chain2_config(dir / "out").replace(
      chain2_config(dir / "out").find("r1_sq"), 5, "r9_sq"));
  CHECK(run_cli("simulate --config " + (dir / "bad_obs.json").string(),
                dir / "l2.txt") == 2);

  CHECK(run_cli("simulate --config " + (dir / "missing.json").string(),
                dir / "l3.txt") == 2);

  spit(dir / "skew.csv", "1,0.5\n0,1\n");
  const std::string cfg = std::string("{\"matrix\":{\"kind\":\"file\",") +
      "\"path\":\"" + (dir / "skew.csv").string() + "\"},\"out\":\"" +
      (dir / "out").string() + "\"}";
  spit(dir / "skew.json", cfg);
  CHECK(run_cli("spectrum --config " + (dir / "skew.json").string(),
                dir / "l4.txt") == 1);

  CHECK(run_cli("", dir / "l5.txt") == 2);
  CHECK(run_cli("--help", dir / "l6.txt") == 0);
  CHECK(run_cli("simulate --bogus", dir / "l7.txt") == 2);
}
