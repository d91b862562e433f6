#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "cli_spawn.hpp"

using cli_spawn::run_tool;
using cli_spawn::TempDir;
using nlohmann::json;

namespace {

const char* kFixtureV8 = R"({
  "orientation": "inner_first", "d": 2, "L": 2,
  "canonical": true, "input_encoding": "raw",
  "layers": [{"weights": [[3, 0], [1, 1]]}, {"weights": [[2, 1]]}],
  "signs": [[1, 1]],
  "output": {"kind": "linear"}
})";

const char* kTinyExperiment = R"({
  "run_id": "cli",
  "task": {"target": {"mode": "generator", "seed_offset": 1}, "B": 1.0, "sigma": 0.25},
  "cover": {"mode": "dirichlet", "L": 1, "d": 2, "width": 3,
            "V_grid": [1.0], "count_per_V": 4, "include_target": true},
  "n": 150,
  "replications": 2,
  "m_eval": 1000,
  "seed": 31
})";

}  // namespace

TEST_CASE("pathnorm compute prints the fixture variation") {
  TempDir tmp;
  cli_spawn::write_file(tmp.file("net.json"), kFixtureV8);
  auto res = run_tool("pathnorm", "compute " + tmp.file("net.json"));
  REQUIRE(res.exit_code == 0);
  auto j = json::parse(res.out);
  CHECK(j.at("V").get<double>() == 8.0);
  CHECK(j.at("subnetwork_variations")[1] == json::array({3.0, 2.0}));
}

TEST_CASE("pathnorm normalize writes a loadable net with a V field") {
  TempDir tmp;
  cli_spawn::write_file(tmp.file("net.json"), kFixtureV8);
  auto res =
      run_tool("pathnorm", "normalize " + tmp.file("net.json") + " -o " + tmp.file("out.json"));
  REQUIRE(res.exit_code == 0);
  auto j = json::parse(cli_spawn::read_file(tmp.file("out.json")));
  CHECK(j.at("V").get<double>() == 8.0);
  CHECK(j.at("normalized").get<bool>());
  CHECK(j.at("layers")[1].at("weights")[0] == json::array({0.75, 0.25}));
}

TEST_CASE("missing flags and unknown keys exit with code 2") {
  auto missing = run_tool("complexity", "estimate");
  CHECK(missing.exit_code == 2);
  CHECK(missing.out.find("--set") != std::string::npos);

  TempDir tmp;
  cli_spawn::write_file(tmp.file("net.json"),
                        std::string(kFixtureV8).replace(1, 0, "\"oops\": 1, "));
  auto unknown = run_tool("pathnorm", "compute " + tmp.file("net.json"));
  CHECK(unknown.exit_code == 2);
  CHECK(unknown.out.find("oops") != std::string::npos);

  auto badflag = run_tool("entropy", "bound --V 1 --L 1 --d 1 --eps 1 --mystery 3");
  CHECK(badflag.exit_code == 2);
}

TEST_CASE("missing files exit with code 3") {
  auto res = run_tool("pathnorm", "compute /definitely/not/here.json");
  CHECK(res.exit_code == 3);
}

TEST_CASE("complexity commands emit the documented records") {
  auto bound = run_tool("complexity", "bound --V 1 --L 1 --d 1 --n 4");
  REQUIRE(bound.exit_code == 0);
  auto j = json::parse(bound.out);
  CHECK(j.at("bound").get<double>() == doctest::Approx(3.3302184446307908).epsilon(1e-12));
  CHECK(j.at("lambda_opt").get<double>() == doctest::Approx(0.8325546111576977).epsilon(1e-12));

  TempDir tmp;
  cli_spawn::write_file(tmp.file("pts.json"),
                        R"({"points": [[1, 0], [-1, 0]], "symmetric": true})");
  auto exact = run_tool("complexity", "estimate --set " + tmp.file("pts.json") + " --exact");
  REQUIRE(exact.exit_code == 0);
  auto je = json::parse(exact.out);
  CHECK(je.at("estimate").get<double>() == 1.0);
  CHECK(je.at("std_error").get<double>() == 0.0);

  auto mc = run_tool("complexity", "estimate --set " + tmp.file("pts.json") +
                                       " --law gaussian --replicates 5000 --seed 7");
  REQUIRE(mc.exit_code == 0);
  auto jm = json::parse(mc.out);
  CHECK(jm.at("std_error").get<double>() > 0.0);
}

TEST_CASE("entropy commands work end to end") {
  auto fano = run_tool("entropy", "fano --n 100 --sigma 1 --rn 0.05 --rnstar 0.04 "
                                  "--eps 0.6324555320336759");
  REQUIRE(fano.exit_code == 0);
  CHECK(json::parse(fano.out).at("entropy_upper").get<double>() ==
        doctest::Approx(5.386294361119891).epsilon(1e-12));

  TempDir tmp;
  cli_spawn::write_file(tmp.file("samples.json"),
                        R"({"vectors": [[0, 0], [2, 0], [0, 2], [0.1, 0]]})");
  auto pack = run_tool("entropy", "pack --samples " + tmp.file("samples.json") +
                                      " --eps 1 --metric euclidean");
  REQUIRE(pack.exit_code == 0);
  CHECK(json::parse(pack.out).at("count").get<int>() == 3);
}

TEST_CASE("seeded commands are byte identical across reruns and thread counts") {
  TempDir tmp;
  cli_spawn::write_file(tmp.file("pts.json"),
                        R"({"points": [[1, 0.5, -0.25], [-0.5, 1, 0.75]]})");
  std::string est = "estimate --set " + tmp.file("pts.json") +
                    " --law gaussian --psi exp --lambda 0.5 --replicates 4000 --seed 99";
  auto a = run_tool("complexity", est);
  auto b = run_tool("complexity", est);
  auto c = cli_spawn::run(cli_spawn::bin_dir() + "/pathvar --threads 4 complexity " + est);
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
}

TEST_CASE("experiment run writes deterministic csv and json") {
  TempDir tmp;
  cli_spawn::write_file(tmp.file("cfg.json"), kTinyExperiment);
  std::string cmd = "run --config " + tmp.file("cfg.json") + " --out " + tmp.file("a.csv");
  auto a = run_tool("experiment", cmd);
  REQUIRE(a.exit_code == 0);
  auto fired = json::parse(a.out);
  REQUIRE(fired.at("rows").size() == 1);
  CHECK(fired.at("rows")[0].at("pass_adaptive").get<bool>());

  std::string cmd2 = "run --config " + tmp.file("cfg.json") + " --out " + tmp.file("b.csv");
  auto b = cli_spawn::run(cli_spawn::bin_dir() + "/experiment --threads 3 " + cmd2);
  REQUIRE(b.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(cli_spawn::read_file(tmp.file("a.csv")) == cli_spawn::read_file(tmp.file("b.csv")));

  auto csv = cli_spawn::read_file(tmp.file("a.csv"));
  CHECK(csv.rfind("run_id,n,V_star,V_cap,sigma,B,L,d,emp_risk,emp_risk_se,thm2_bound,"
                  "lambda_n,selected_V,pass_thm2,pass_adaptive\n", 0) == 0);
}
