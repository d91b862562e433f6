// Acceptance suite: every case prints one PASS/FAIL line and enforces its
// runtime budget.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "cli_spawn.hpp"
#include "pathvar/complexity.hpp"
#include "pathvar/entropy.hpp"
#include "pathvar/estimation.hpp"
#include "pathvar/jsonfmt.hpp"
#include "pathvar/net_json.hpp"
#include "pathvar/variation.hpp"
#include "test_util.hpp"

using namespace pathvar;

namespace {

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void report(int idx, const char* label, bool ok, double seconds) {
  std::printf("[criterion %d] %-28s %s  (%.1f s)\n", idx, label, ok ? "PASS" : "FAIL", seconds);
  std::fflush(stdout);
}

}  // namespace

TEST_CASE("criterion 1: theorem 1 round trip") {
  Timer timer;
  Stream rng(0xACC1);
  bool ok = true;
  for (int trial = 0; trial < 200; ++trial) {
    int d = 1 + static_cast<int>(rng.index(6));
    int depth = 1 + static_cast<int>(rng.index(5));
    auto net = testutil::random_general_net(rng, d, depth, 8, true, trial % 4 == 0);
    auto canon = canonicalize(net);
    auto nn = normalize(canon);

    // probability rows sum to one
    try {
      nn.validate(1e-12);
    } catch (const Error&) {
      ok = false;
    }

    // normalized evaluation matches the original within 1e-8 relative
    for (int k = 0; k < 100; ++k) {
      InputPoint x(testutil::random_input(rng, d));
      double orig = evaluate(net, x);
      double renorm = evaluate(nn, x);
      if (std::abs(orig - renorm) > 1e-8 * (1.0 + std::abs(orig))) ok = false;
    }

    // the input scale equals exhaustive path enumeration
    double brute = path_variation_bruteforce(canon, 2'000'000);
    if (std::abs(nn.scale() - brute) > 1e-10 * (1.0 + std::abs(brute))) ok = false;
  }
  double elapsed = timer.seconds();
  report(1, "theorem 1 round trip", ok && elapsed < 30.0, elapsed);
  CHECK(ok);
  CHECK(elapsed < 30.0);
}

TEST_CASE("criterion 2: path variation dp vs oracle") {
  Timer timer;
  Stream rng(0xACC2);
  bool ok = true;
  int checked = 0;
  while (checked < 100) {
    int d = 1 + static_cast<int>(rng.index(6));
    int depth = 1 + static_cast<int>(rng.index(4));
    auto net = testutil::random_raw_canonical(rng, d, depth, 8);
    if (path_count(net) > 100'000) continue;
    ++checked;
    double dp = path_variation(net);
    double brute = path_variation_bruteforce(net, 100'000);
    if (std::abs(dp - brute) > 1e-10 * (1.0 + std::abs(brute))) ok = false;
  }
  double elapsed = timer.seconds();
  report(2, "path variation vs oracle", ok && elapsed < 10.0, elapsed);
  CHECK(ok);
  CHECK(elapsed < 10.0);
}

TEST_CASE("criterion 3: contraction lemma exhaustive") {
  Timer timer;
  Stream rng(0xACC3);
  bool ok = true;
  int violations = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 2 + rng.index(9);      // n <= 10
    std::size_t count = 1 + rng.index(8);  // |A| <= 8
    std::vector<std::vector<double>> pts(count, std::vector<double>(n));
    for (auto& p : pts)
      for (auto& v : p) v = rng.uniform(-2.0, 2.0);
    FinitePointSet a(std::move(pts), false);
    for (const auto& phi : {Contraction::relu(), Contraction::clip(1.0)}) {
      for (const auto& psi : {PsiSpec::identity(), PsiSpec::exponential(0.5)}) {
        auto rep = contraction_check(a, phi, PerturbationLaw::rademacher(), psi, 0,
                                     0xACC3 + trial);
        if (!rep.exact || !rep.pass_phi || !rep.pass_conv || !rep.pass_signed_hull)
          ++violations;
      }
    }
  }
  ok = violations == 0;
  double elapsed = timer.seconds();
  report(3, "lemma 2 exhaustive", ok && elapsed < 60.0, elapsed);
  CHECK(violations == 0);
  CHECK(elapsed < 60.0);
}

TEST_CASE("criterion 4: corollary 3 dominance") {
  Timer timer;
  bool ok = true;

  struct Config {
    int layers, d, width;
    double v;
    std::size_t n;
  };
  const Config configs[] = {
      {1, 2, 4, 0.5, 8}, {2, 2, 4, 1.0, 16}, {3, 3, 5, 2.0, 12}, {2, 3, 6, 1.0, 16},
  };
  int idx = 0;
  for (const auto& cfg : configs) {
    auto cover = build_cover(cfg.layers, cfg.d, {cfg.v}, cfg.width, 50, 0xACC4 + idx);
    Matrix x(cfg.n, cfg.d);
    Stream rng(0xACC4 + 100 + idx);
    for (auto& v : x.data) v = rng.uniform(-1.0, 1.0);
    auto res = empirical_class_complexity(cover.members, x, PerturbationLaw::rademacher(),
                                          PsiSpec::identity(), 0, 0, cfg.v, 4);
    double bound = relu_class_complexity_bound(cfg.v, cfg.layers, cfg.d,
                                               static_cast<std::int64_t>(cfg.n))
                       .bound;
    if (!res.exact || res.value > bound) ok = false;
    ++idx;
  }

  // gaussian version with Monte Carlo errors
  {
    auto cover = build_cover(2, 2, {1.0}, 4, 50, 0xACC4 + 50);
    Matrix x(16, 2);
    Stream rng(0xACC4 + 200);
    for (auto& v : x.data) v = rng.uniform(-1.0, 1.0);
    auto law = PerturbationLaw::gaussian(1.0);
    auto res = empirical_class_complexity(cover.members, x, law, PsiSpec::identity(), 40'000,
                                          0xACC4, 1.0, 4);
    double bound = relu_class_complexity_bound(1.0, 2, 2, 16, law).bound;
    if (res.value > bound + 3.0 * res.std_error) ok = false;
  }

  double elapsed = timer.seconds();
  report(4, "corollary 3 dominance", ok && elapsed < 60.0, elapsed);
  CHECK(ok);
  CHECK(elapsed < 60.0);
}

TEST_CASE("criterion 5: metric entropy calculators") {
  Timer timer;
  bool ok = true;

  // boundary identity on 1000 random profiles
  Stream rng(0xACC5);
  for (int i = 0; i < 1000; ++i) {
    RiskProfile p;
    p.n = 1 + static_cast<std::int64_t>(rng.index(100'000));
    p.sigma = 0.1 + rng.uniform01() * 3.0;
    p.r_n = rng.uniform01() * 2.0 + 1e-9;
    p.r_n_star = rng.uniform01() * 2.0;
    double lhs = fano_entropy_upper(p, std::sqrt(8.0 * p.r_n));
    double rhs = static_cast<double>(p.n) * p.r_n_star / (p.sigma * p.sigma) +
                 2.0 * std::numbers::ln2;
    if (std::abs(lhs - rhs) > 1e-12 * (1.0 + std::abs(rhs))) ok = false;
  }

  // cumulative-sum comparison for every n up to 1e5
  {
    const double c_f = 1.3, b = 0.8, sigma = 0.6;
    double scale = (b + sigma) * c_f;
    double running = 0.0;
    for (std::int64_t n = 1; n <= 100'000; ++n) {
      running += sqrt_rate_risk(c_f, b, sigma, n - 1);
      double rhs = 2.0 * scale * std::sqrt(static_cast<double>(n));
      if (running > rhs * (1.0 + 1e-12)) ok = false;
    }
  }

  // packing log-counts stay under both entropy bounds
  {
    const int layers = 2, d = 3;
    const double v = 1.0;
    auto cover = build_cover(layers, d, {v}, 5, 150, 0xACC5);
    const std::size_t n = 64;
    Matrix x(n, d);
    for (auto& val : x.data) val = rng.uniform(-1.0, 1.0);
    std::vector<std::vector<double>> values;
    EvalScratch scratch;
    for (const auto& net : cover.members) {
      std::vector<double> row(n);
      for (std::size_t i = 0; i < n; ++i) row[i] = forward(net, x.row(i), scratch);
      values.push_back(std::move(row));
    }
    double c_f =
        8.0 * v * std::sqrt(2.0 * (layers * std::numbers::ln2 + std::log(2.0 * d)));
    for (double eps : {0.02, 0.05, 0.1, 0.2, 0.5, 1.0}) {
      auto pack = greedy_packing(values, eps, PackingMetric::normalized);
      double log_count = std::log(static_cast<double>(pack.count));
      if (log_count > relu_entropy_bound(v, layers, d, eps)) ok = false;
      if (log_count > corollary5_entropy(c_f, eps)) ok = false;
    }
  }

  double elapsed = timer.seconds();
  report(5, "entropy calculators", ok && elapsed < 30.0, elapsed);
  CHECK(ok);
  CHECK(elapsed < 30.0);
}

TEST_CASE("criterion 6: theorem 2 risk simulation") {
  Timer timer;
  auto cfg = parse_experiment_config(nlohmann::json::parse(R"({
    "run_id": "acc6",
    "task": {"target": {"mode": "generator", "L": 2, "width": 6, "V": 1.0, "seed_offset": 5},
             "B": 1.0, "sigma": 0.5, "noise": "gaussian"},
    "cover": {"mode": "ladder", "L": 2, "d": 4, "width": 6,
              "V_grid": [1.0], "count_per_V": 8, "include_target": true,
              "ladder": {"scales": [1e-2, 2.5e-3, 6.25e-4, 1.5625e-4, 3.90625e-5, 9.765625e-6],
                          "counts": [1, 2, 4, 8, 16, 32],
                          "calibration_evals": 4096}},
    "v_cap": 1.0,
    "n_values": [250, 1000, 4000],
    "replications": 20,
    "m_eval": 4000,
    "seed": 20240617
  })"));
  auto rep = run_experiment(cfg, 4);
  bool dominance = true;
  std::vector<std::pair<double, double>> curve;
  for (const auto& row : rep.rows) {
    if (!(row.emp_risk <= row.thm2_bound)) dominance = false;
    curve.emplace_back(static_cast<double>(row.n), row.emp_risk);
    std::printf("  n=%5lld  risk=%.6g  bound=%.6g\n", static_cast<long long>(row.n),
                row.emp_risk, row.thm2_bound);
  }
  bool positive = true;
  for (auto [x, y] : curve) positive = positive && y > 0.0;
  double slope = positive ? loglog_slope(curve) : 0.0;
  std::printf("  slope=%.3f\n", slope);
  bool slope_ok = positive && slope >= -0.9 && slope <= -0.3;
  double elapsed = timer.seconds();
  report(6, "theorem 2 simulation", dominance && slope_ok && elapsed < 300.0, elapsed);
  CHECK(dominance);
  CHECK(slope_ok);
  CHECK(elapsed < 300.0);
}

TEST_CASE("criterion 7: adaptive bound across configs") {
  Timer timer;
  bool ok = true;
  for (int k = 0; k < 10; ++k) {
    bool misspecified = k % 2 == 1;
    int d = 2 + k % 3;
    int layers = 1 + k % 3;
    double sigma = (k % 3 == 0) ? 0.1 : (k % 3 == 1) ? 0.5 : 1.0;
    std::int64_t n = (k % 3 == 0) ? 200 : (k % 3 == 1) ? 500 : 1000;
    nlohmann::json j = {
        {"run_id", "acc7-" + std::to_string(k)},
        {"task",
         {{"target",
           {{"mode", "generator"}, {"seed_offset", 100 + k}, {"V", 1.0},
            {"width", misspecified ? 7 : 5}}},
          {"B", 1.0},
          {"sigma", sigma},
          {"noise", k % 2 == 0 ? "gaussian" : "uniform"}}},
        {"cover",
         {{"mode", "dirichlet"},
          {"L", layers},
          {"d", d},
          {"width", 5},
          {"V_grid", k % 2 == 0 ? std::vector<double>{1.0}
                                : std::vector<double>{0.5, 1.0, 2.0}},
          {"count_per_V", 8},
          {"include_target", !misspecified}}},
        {"n", n},
        {"replications", 10},
        {"m_eval", 2500},
        {"seed", 7000 + k},
    };
    auto rep = run_experiment(parse_experiment_config(j), 4);
    for (const auto& row : rep.rows) {
      if (!row.pass_adaptive) {
        ok = false;
        std::printf("  config %d failed: pen=%.6g rhs=%.6g\n", k, row.penalized_risk,
                    row.adaptive_rhs);
      }
    }
  }
  double elapsed = timer.seconds();
  report(7, "adaptive bound", ok && elapsed < 300.0, elapsed);
  CHECK(ok);
  CHECK(elapsed < 300.0);
}

TEST_CASE("criterion 8: cli determinism") {
  Timer timer;
  bool ok = true;
  cli_spawn::TempDir tmp;

  cli_spawn::write_file(tmp.file("net.json"), R"({
    "orientation": "inner_first", "d": 2, "L": 2,
    "canonical": true, "input_encoding": "raw",
    "layers": [{"weights": [[3, 0], [1, 1]]}, {"weights": [[2, 1]]}],
    "signs": [[1, 1]], "output": {"kind": "linear"}
  })");
  cli_spawn::write_file(tmp.file("pts.json"),
                        R"({"points": [[1, 0.25, -0.5], [-0.75, 0.5, 1]]})");
  cli_spawn::write_file(tmp.file("cfg.json"), R"({
    "run_id": "acc8",
    "task": {"target": {"mode": "generator", "seed_offset": 2}, "B": 1.0, "sigma": 0.3},
    "cover": {"mode": "dirichlet", "L": 1, "d": 2, "width": 3,
              "V_grid": [1.0], "count_per_V": 4, "include_target": true},
    "n": 120, "replications": 2, "m_eval": 1000, "seed": 88
  })");

  auto same_twice = [&](const std::string& tool, const std::string& args) {
    auto a = cli_spawn::run_tool(tool, args);
    auto b = cli_spawn::run_tool(tool, args);
    if (a.exit_code != 0 || b.exit_code != 0 || a.out != b.out) {
      ok = false;
      std::printf("  rerun mismatch: %s %s\n", tool.c_str(), args.c_str());
    }
    return a.out;
  };

  same_twice("pathnorm", "compute " + tmp.file("net.json"));
  same_twice("complexity", "bound --V 1.5 --L 2 --d 3 --n 32");
  same_twice("entropy", "bound --V 1 --L 2 --d 4 --eps 0.5");
  same_twice("entropy",
             "fano --n 50 --sigma 0.7 --rn 0.01 --rnstar 0.02 --eps 0.4 --logN 4");

  std::string est_args = "estimate --set " + tmp.file("pts.json") +
                         " --law gaussian --psi exp --lambda 0.4 --replicates 6000 --seed 5";
  auto est_single = same_twice("complexity", est_args);
  auto est_threads =
      cli_spawn::run(cli_spawn::bin_dir() + "/pathvar --threads 4 complexity " + est_args);
  if (est_threads.exit_code != 0 || est_threads.out != est_single) ok = false;

  std::string norm_args =
      "normalize " + tmp.file("net.json") + " -o " + tmp.file("norm_a.json");
  auto norm_a = cli_spawn::run_tool("pathnorm", norm_args);
  std::string norm_args_b =
      "normalize " + tmp.file("net.json") + " -o " + tmp.file("norm_b.json");
  auto norm_b = cli_spawn::run_tool("pathnorm", norm_args_b);
  if (norm_a.exit_code != 0 || norm_b.exit_code != 0 ||
      cli_spawn::read_file(tmp.file("norm_a.json")) !=
          cli_spawn::read_file(tmp.file("norm_b.json")))
    ok = false;

  std::string run_a = "run --config " + tmp.file("cfg.json") + " --out " + tmp.file("a.csv");
  std::string run_b = "run --config " + tmp.file("cfg.json") + " --out " + tmp.file("b.csv");
  auto exp_a = cli_spawn::run_tool("experiment", run_a);
  auto exp_b = cli_spawn::run(cli_spawn::bin_dir() + "/experiment --threads 4 " + run_b);
  if (exp_a.exit_code != 0 || exp_b.exit_code != 0 || exp_a.out != exp_b.out ||
      cli_spawn::read_file(tmp.file("a.csv")) != cli_spawn::read_file(tmp.file("b.csv")))
    ok = false;

  double elapsed = timer.seconds();
  report(8, "cli determinism", ok, elapsed);
  CHECK(ok);
}
