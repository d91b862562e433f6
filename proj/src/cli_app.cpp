#include "pathvar/cli_app.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pathvar/complexity.hpp"
#include "pathvar/entropy.hpp"
#include "pathvar/errors.hpp"
#include "pathvar/estimation.hpp"
#include "pathvar/jsonfmt.hpp"
#include "pathvar/net_json.hpp"
#include "pathvar/variation.hpp"

namespace pathvar {

namespace {

using nlohmann::json;

void emit(const json& j) { std::printf("%s\n", dump_json(j).c_str()); }

void require_file_keys(const json& j, const std::set<std::string>& allowed,
                       const std::set<std::string>& required, const std::string& where) {
  if (!j.is_object()) throw PreconditionError(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw PreconditionError("unknown key \"" + it.key() + "\" in " + where);
  }
  for (const auto& k : required) {
    if (!j.contains(k)) throw PreconditionError("missing key \"" + k + "\" in " + where);
  }
}

FinitePointSet load_point_set(const std::string& path) {
  json j = load_json_file(path);
  require_file_keys(j, {"points", "symmetric"}, {"points"}, path);
  std::vector<std::vector<double>> pts;
  for (const auto& row : j.at("points")) {
    std::vector<double> p;
    for (const auto& v : row) p.push_back(v.get<double>());
    pts.push_back(std::move(p));
  }
  bool symmetric = j.contains("symmetric") && j.at("symmetric").get<bool>();
  return FinitePointSet(std::move(pts), symmetric);
}

std::vector<std::vector<double>> load_sample_vectors(const std::string& path) {
  json j = load_json_file(path);
  require_file_keys(j, {"vectors"}, {"vectors"}, path);
  std::vector<std::vector<double>> out;
  for (const auto& row : j.at("vectors")) {
    std::vector<double> p;
    for (const auto& v : row) p.push_back(v.get<double>());
    out.push_back(std::move(p));
  }
  return out;
}

PerturbationLaw parse_law(const std::string& name, double sigma) {
  if (name == "rademacher") return PerturbationLaw::rademacher();
  if (name == "gaussian") return PerturbationLaw::gaussian(sigma);
  throw PreconditionError("law must be rademacher or gaussian");
}

PsiSpec parse_psi(const std::string& name, double lambda) {
  if (name == "identity") return PsiSpec::identity();
  if (name == "exp") return PsiSpec::exponential(lambda);
  throw PreconditionError("psi must be identity or exp");
}

// the represented function's variation: canonical nets directly, general
// nets through canonicalization, normalized nets through the stored scale
std::pair<CanonicalNet, double> variation_view(const NetVariant& loaded) {
  if (std::holds_alternative<GeneralReLUNet>(loaded)) {
    CanonicalNet c = canonicalize(std::get<GeneralReLUNet>(loaded));
    double v = path_variation(c);
    return {std::move(c), v};
  }
  if (std::holds_alternative<CanonicalNet>(loaded)) {
    const auto& c = std::get<CanonicalNet>(loaded);
    return {c, path_variation(c)};
  }
  const auto& nn = std::get<NormalizedNet>(loaded);
  return {nn.tables(), nn.scale() * path_variation(nn.tables())};
}

struct CliState {
  int threads = 1;
};

void add_pathnorm(CLI::App& app, CliState& state) {
  auto* group = app.add_subcommand("pathnorm", "path variation and Theorem 1 normalization");
  group->require_subcommand(1);
  group->fallthrough();

  auto* compute = group->add_subcommand("compute", "print V and per-layer variation tables");
  compute->fallthrough();
  auto net_path = std::make_shared<std::string>();
  compute->add_option("net", *net_path, "network JSON file")->required();
  compute->callback([net_path] {
    auto [canon, v] = variation_view(load_net(*net_path));
    auto sv = subnetwork_variations(canon);
    json out;
    out["V"] = v;
    json levels = json::array();
    for (const auto& level : sv.levels) levels.push_back(level);
    out["subnetwork_variations"] = std::move(levels);
    emit(out);
  });

  auto* norm = group->add_subcommand("normalize", "write the Theorem 1 normalized form");
  norm->fallthrough();
  auto nn_path = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  norm->add_option("net", *nn_path, "network JSON file")->required();
  norm->add_option("-o,--out", *out_path, "output file")->required();
  norm->callback([nn_path, out_path] {
    auto loaded = load_net(*nn_path);
    json serialized;
    double v = 0.0;
    if (std::holds_alternative<NormalizedNet>(loaded)) {
      const auto& nn = std::get<NormalizedNet>(loaded);
      serialized = to_json(nn);
      v = nn.scale();
    } else {
      CanonicalNet canon = std::holds_alternative<GeneralReLUNet>(loaded)
                               ? canonicalize(std::get<GeneralReLUNet>(loaded))
                               : std::get<CanonicalNet>(loaded);
      NormalizedNet nn = normalize(canon);
      serialized = to_json(nn);
      v = nn.scale();
    }
    write_text_file(*out_path, dump_json(serialized) + "\n");
    json out;
    out["V"] = v;
    out["output"] = *out_path;
    emit(out);
  });

  (void)state;
}

void add_complexity(CLI::App& app, CliState& state) {
  auto* group = app.add_subcommand("complexity", "mu/psi complexity of finite point sets");
  group->require_subcommand(1);
  group->fallthrough();

  auto* est = group->add_subcommand("estimate", "estimate the complexity of a point set");
  est->fallthrough();
  struct EstArgs {
    std::string set_path, law = "rademacher", psi = "identity";
    double sigma = 1.0, lambda = 1.0;
    std::int64_t replicates = 10000;
    std::uint64_t seed = 0;
    bool exact = false;
  };
  auto ea = std::make_shared<EstArgs>();
  est->add_option("--set", ea->set_path, "point set JSON file")->required();
  est->add_option("--law", ea->law, "rademacher or gaussian");
  est->add_option("--sigma", ea->sigma, "gaussian scale");
  est->add_option("--psi", ea->psi, "identity or exp");
  est->add_option("--lambda", ea->lambda, "exponential psi parameter");
  est->add_option("--replicates", ea->replicates, "Monte Carlo replicates");
  est->add_option("--seed", ea->seed, "master seed");
  est->add_flag("--exact", ea->exact, "exact enumeration (rademacher, n <= 22)");
  est->callback([ea, &state] {
    auto a = load_point_set(ea->set_path);
    auto law = parse_law(ea->law, ea->sigma);
    auto psi = parse_psi(ea->psi, ea->lambda);
    json out;
    if (ea->exact) {
      out["estimate"] = mu_complexity_exact(a, law, psi);
      out["std_error"] = 0.0;
      out["exact"] = true;
    } else {
      auto mc = mu_complexity_mc(a, law, psi, ea->replicates, ea->seed, state.threads);
      out["estimate"] = mc.estimate;
      out["std_error"] = mc.std_error;
      out["exact"] = false;
      out["biased_transform"] = mc.biased_transform;
    }
    emit(out);
  });

  auto* bound = group->add_subcommand("bound", "closed-form class complexity bound");
  bound->fallthrough();
  struct BoundArgs {
    double v = 0.0, sigma = 1.0;
    int layers = 1, dim = 1;
    std::int64_t n = 1;
    std::string law = "rademacher";
  };
  auto ba = std::make_shared<BoundArgs>();
  bound->add_option("--V", ba->v, "variation bound")->required();
  bound->add_option("--L", ba->layers, "ReLU layers")->required();
  bound->add_option("--d", ba->dim, "input dimension")->required();
  bound->add_option("--n", ba->n, "number of data points")->required();
  bound->add_option("--law", ba->law, "rademacher or gaussian");
  bound->add_option("--sigma", ba->sigma, "gaussian scale");
  bound->callback([ba] {
    auto res = relu_class_complexity_bound(ba->v, ba->layers, ba->dim, ba->n,
                                           parse_law(ba->law, ba->sigma));
    json out;
    out["bound"] = res.bound;
    out["lambda_opt"] = res.lambda_opt;
    emit(out);
  });
}

void add_entropy(CLI::App& app, CliState& state) {
  auto* group = app.add_subcommand("entropy", "Fano calculators and packing estimates");
  group->require_subcommand(1);
  group->fallthrough();
  (void)state;

  auto* bound = group->add_subcommand("bound", "metric entropy bound for the deep net class");
  bound->fallthrough();
  struct BoundArgs {
    double v = 0.0, eps = 1.0;
    int layers = 1, dim = 1;
  };
  auto ba = std::make_shared<BoundArgs>();
  bound->add_option("--V", ba->v, "variation bound")->required();
  bound->add_option("--L", ba->layers, "ReLU layers")->required();
  bound->add_option("--d", ba->dim, "input dimension")->required();
  bound->add_option("--eps", ba->eps, "packing radius")->required();
  bound->callback([ba] {
    json out;
    out["bound"] = relu_entropy_bound(ba->v, ba->layers, ba->dim, ba->eps);
    emit(out);
  });

  auto* fano = group->add_subcommand("fano", "risk-based entropy bounds");
  fano->fallthrough();
  struct FanoArgs {
    std::int64_t n = 1;
    double sigma = 1.0, rn = 0.0, rnstar = 0.0, eps = 1.0;
    double log_packing = 0.0;
    bool has_log_packing = false;
  };
  auto fa = std::make_shared<FanoArgs>();
  fano->add_option("--n", fa->n, "observations")->required();
  fano->add_option("--sigma", fa->sigma, "noise scale")->required();
  fano->add_option("--rn", fa->rn, "batch risk bound")->required();
  fano->add_option("--rnstar", fa->rnstar, "predictive risk bound")->required();
  fano->add_option("--eps", fa->eps, "packing radius")->required();
  auto* lp = fano->add_option("--logN", fa->log_packing, "log packing number for the risk lower bound");
  fano->callback([fa, lp] {
    RiskProfile profile;
    profile.n = fa->n;
    profile.sigma = fa->sigma;
    profile.r_n = fa->rn;
    profile.r_n_star = fa->rnstar;
    json out;
    out["entropy_upper"] = fano_entropy_upper(profile, fa->eps);
    if (lp->count() > 0) out["risk_lower"] = fano_risk_lower(profile, fa->eps, fa->log_packing);
    emit(out);
  });

  auto* pack = group->add_subcommand("pack", "greedy packing of sampled function values");
  pack->fallthrough();
  struct PackArgs {
    std::string samples, metric = "normalized";
    double eps = 0.0;
    std::uint64_t shuffle_seed = 0;
  };
  auto pa = std::make_shared<PackArgs>();
  pack->add_option("--samples", pa->samples, "samples JSON file")->required();
  pack->add_option("--eps", pa->eps, "packing radius")->required();
  pack->add_option("--metric", pa->metric, "euclidean or normalized");
  auto* sh = pack->add_option("--shuffle-seed", pa->shuffle_seed, "seeded insertion shuffle");
  pack->callback([pa, sh] {
    PackingMetric metric;
    if (pa->metric == "euclidean")
      metric = PackingMetric::euclidean;
    else if (pa->metric == "normalized")
      metric = PackingMetric::normalized;
    else
      throw PreconditionError("metric must be euclidean or normalized");
    std::optional<std::uint64_t> shuffle;
    if (sh->count() > 0) shuffle = pa->shuffle_seed;
    auto res = greedy_packing(load_sample_vectors(pa->samples), pa->eps, metric, shuffle);
    json out;
    out["epsilon"] = res.epsilon;
    out["count"] = res.count;
    out["centers"] = res.centers;
    out["metric"] = pa->metric;
    emit(out);
  });
}

void add_experiment(CLI::App& app, CliState& state) {
  auto* group = app.add_subcommand("experiment", "risk simulations");
  group->require_subcommand(1);
  group->fallthrough();

  auto* run = group->add_subcommand("run", "run a configured risk experiment");
  run->fallthrough();
  struct RunArgs {
    std::string config_path, out_path;
    std::uint64_t seed = 0;
  };
  auto ra = std::make_shared<RunArgs>();
  run->add_option("--config", ra->config_path, "experiment config JSON")->required();
  auto* out_opt = run->add_option("--out", ra->out_path, "CSV output path");
  auto* seed_opt = run->add_option("--seed", ra->seed, "override the config master seed");
  run->callback([ra, out_opt, seed_opt, &state] {
    auto cfg = parse_experiment_config(load_json_file(ra->config_path));
    if (seed_opt->count() > 0) cfg.seed = ra->seed;
    auto report = run_experiment(cfg, state.threads);
    std::optional<std::string> csv_path;
    if (out_opt->count() > 0)
      csv_path = ra->out_path;
    else if (cfg.output_path)
      csv_path = cfg.output_path;
    if (csv_path) write_text_file(*csv_path, experiment_csv(report));
    emit(experiment_report_json(report));
  });
}

}  // namespace

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  std::string prog = argc > 0 ? argv[0] : "pathvar";
  auto slash = prog.find_last_of('/');
  std::string base = slash == std::string::npos ? prog : prog.substr(slash + 1);
  bool aliased = base == "pathnorm" || base == "complexity" || base == "entropy" ||
                 base == "experiment";
  if (aliased) args.push_back(base);
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

  CLI::App app{"total path variation calculus for deep ReLU networks"};
  app.require_subcommand(1);
  CliState state;
  app.add_option("--threads", state.threads, "worker threads; outputs do not depend on it")
      ->check(CLI::PositiveNumber);

  add_pathnorm(app, state);
  add_complexity(app, state);
  add_entropy(app, state);
  add_experiment(app, state);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "json error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

}  // namespace pathvar
