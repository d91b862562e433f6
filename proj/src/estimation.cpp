#include "pathvar/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "pathvar/net_json.hpp"
#include "pathvar/parallel.hpp"
#include "pathvar/variation.hpp"

namespace pathvar {

namespace {

constexpr double kLog2 = std::numbers::ln2_v<double>;

double draw_noise(NoiseKind kind, double sigma, Stream& rng) {
  switch (kind) {
    case NoiseKind::gaussian: return sigma * rng.normal();
    case NoiseKind::rademacher: return sigma * rng.rademacher();
    case NoiseKind::uniform: return rng.uniform(-sigma, sigma);
  }
  return 0.0;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double se_of_mean(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size() - 1);
  return std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

InputLaw InputLaw::unit_cube(int d) {
  InputLaw law;
  law.lo.assign(static_cast<std::size_t>(d), -1.0);
  law.hi.assign(static_cast<std::size_t>(d), 1.0);
  return law;
}

void InputLaw::validate() const {
  if (lo.empty() || lo.size() != hi.size())
    throw DimensionError("input law needs matching lo/hi vectors");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i]) || lo[i] < -1.0 || hi[i] > 1.0)
      throw PreconditionError("input law intervals must be nondegenerate and inside [-1, 1]");
  }
}

void InputLaw::sample(Stream& rng, std::span<double> out) const {
  for (std::size_t i = 0; i < lo.size(); ++i) out[i] = rng.uniform(lo[i], hi[i]);
}

RegressionTask::RegressionTask(CanonicalNet f_star, double b, NoiseKind noise_kind,
                               double noise_sigma, std::int64_t sample_count,
                               std::uint64_t master_seed, InputLaw input_law, bool verify_range)
    : target(std::move(f_star)),
      range_bound(b),
      noise(noise_kind),
      sigma(noise_sigma),
      n(sample_count),
      seed(master_seed),
      law(std::move(input_law)) {
  if (!(range_bound > 0.0)) throw PreconditionError("task needs B > 0");
  if (!(sigma > 0.0)) throw PreconditionError("task needs sigma > 0");
  if (n < 1) throw PreconditionError("task needs n >= 1");
  law.validate();
  if (law.dim() != target.input_dim())
    throw DimensionError("input law dimension must match the target");
  target_variation = path_variation(target);
  if (verify_range) {
    Stream rng(derive_seed(seed, {0xb0u}));
    EvalScratch scratch;
    std::vector<double> x(static_cast<std::size_t>(law.dim()));
    for (int i = 0; i < 10'000; ++i) {
      law.sample(rng, x);
      double f = forward(target, x, scratch);
      if (std::abs(f) > range_bound * (1.0 + 1e-12))
        throw PreconditionError("target escapes the range bound B on sampled inputs");
    }
  }
}

Dataset generate_data(const RegressionTask& task) { return generate_data(task, task.seed); }

Dataset generate_data(const RegressionTask& task, std::uint64_t seed_override) {
  Dataset data;
  auto d = static_cast<std::size_t>(task.law.dim());
  auto n = static_cast<std::size_t>(task.n);
  data.x = Matrix(n, d);
  data.y.resize(n);
  Stream xs(derive_seed(seed_override, {0x78u}));
  Stream es(derive_seed(seed_override, {0x65u}));
  EvalScratch scratch;
  for (std::size_t i = 0; i < n; ++i) {
    task.law.sample(xs, data.x.row(i));
    data.y[i] = forward(task.target, data.x.row(i), scratch) +
                draw_noise(task.noise, task.sigma, es);
  }
  return data;
}

CanonicalNet sample_stochastic_net(int relu_layers, int input_dim, int width, Stream& rng) {
  if (relu_layers < 1 || input_dim < 1 || width < 1)
    throw PreconditionError("net sampler needs L >= 1, d >= 1, width >= 1");
  std::vector<CanonicalStage> stages;
  stages.reserve(static_cast<std::size_t>(relu_layers) + 1);
  std::size_t inner = 2 * static_cast<std::size_t>(input_dim);
  auto w = static_cast<std::size_t>(width);
  for (int layer = 0; layer < relu_layers; ++layer) {
    CanonicalStage st;
    st.weights = Matrix(w, inner);
    for (std::size_t u = 0; u < w; ++u) {
      auto row = dirichlet_row(rng, inner);
      std::copy(row.begin(), row.end(), st.weights.row(u).begin());
    }
    st.signs.assign(w, 1);
    for (std::size_t u = (w + 1) / 2; u < w; ++u) st.signs[u] = -1;
    stages.push_back(std::move(st));
    inner = w;
  }
  CanonicalStage out;
  out.weights = Matrix(1, inner);
  auto row = dirichlet_row(rng, inner);
  std::copy(row.begin(), row.end(), out.weights.row(0).begin());
  stages.push_back(std::move(out));
  return CanonicalNet(input_dim, InputEncoding::signed_pairs, std::move(stages),
                      OutputSpec::linear());
}

namespace {

void check_member_variation(double got, double want) {
  if (std::abs(got - want) > 1e-10 * std::max(1.0, want))
    throw Error("cover member variation drifted from its grid value");
}

}  // namespace

NetworkCover build_cover(int relu_layers, int input_dim, const std::vector<double>& v_grid,
                         int width, int count_per_v, std::uint64_t seed) {
  if (v_grid.empty()) throw PreconditionError("cover grid must be nonempty");
  for (std::size_t i = 0; i < v_grid.size(); ++i) {
    if (!(v_grid[i] > 0.0)) throw PreconditionError("cover grid values must be positive");
    if (i > 0 && !(v_grid[i] > v_grid[i - 1]))
      throw PreconditionError("cover grid values must be ascending");
  }
  if (count_per_v < 1) throw PreconditionError("cover needs count_per_V >= 1");
  if (width < 1) throw PreconditionError("cover needs width >= 1");

  NetworkCover cover;
  cover.relu_layers = relu_layers;
  cover.input_dim = input_dim;
  Stream rng(derive_seed(seed, {0xc04e5u}));
  for (double v : v_grid) {
    for (int c = 0; c < count_per_v; ++c) {
      auto net = scale_output(sample_stochastic_net(relu_layers, input_dim, width, rng), v);
      double got = path_variation(net);
      check_member_variation(got, v);
      cover.members.push_back(std::move(net));
      cover.variations.push_back(got);
    }
  }
  return cover;
}

NetworkCover build_ladder_cover(const CanonicalNet& target,
                                const std::vector<double>& gap_scales,
                                const std::vector<int>& counts, std::uint64_t seed,
                                const InputLaw& law, std::int64_t calibration_evals) {
  if (gap_scales.size() != counts.size())
    throw PreconditionError("ladder scales and counts must pair up");
  double v_star = path_variation(target);
  if (!(v_star > 0.0)) throw MathDomainError("ladder target has zero variation");
  auto levels = subnetwork_variations(target).levels.back();
  const auto out_row = target.stages().back().weights.row(0);

  NetworkCover cover;
  cover.relu_layers = static_cast<int>(target.hidden_layers());
  cover.input_dim = target.input_dim();
  Stream rng(derive_seed(seed, {0x1addu}));
  std::uint64_t calib_tag = 0;
  for (std::size_t k = 0; k < gap_scales.size(); ++k) {
    for (int c = 0; c < counts[k]; ++c) {
      auto raw = dirichlet_row(rng, out_row.size());
      double denom = 0.0;
      for (std::size_t j = 0; j < raw.size(); ++j) denom += raw[j] * levels[j];
      if (!(denom > 0.0)) continue;
      for (auto& r : raw) r *= v_star / denom;  // replacement row with variation v_star

      auto stages = target.stages();
      auto far_row = stages.back().weights.row(0);
      std::copy(raw.begin(), raw.end(), far_row.begin());
      CanonicalNet far(target.input_dim(), target.encoding(), std::move(stages),
                       target.output());
      double gap = risk_mc(far, target, law, calibration_evals,
                           derive_seed(seed, {0xca1u, calib_tag++}))
                       .risk;
      double t = gap > gap_scales[k] ? std::sqrt(gap_scales[k] / gap) : 1.0;

      auto blend_stages = target.stages();
      auto row = blend_stages.back().weights.row(0);
      for (std::size_t j = 0; j < raw.size(); ++j)
        row[j] = (1.0 - t) * out_row[j] + t * raw[j];
      CanonicalNet member(target.input_dim(), target.encoding(), std::move(blend_stages),
                          target.output());
      double got = path_variation(member);
      check_member_variation(got, v_star);
      cover.members.push_back(std::move(member));
      cover.variations.push_back(got);
    }
  }
  return cover;
}

namespace {

std::vector<double> member_losses(const Dataset& data, const NetworkCover& cover,
                                  const std::optional<double>& clip_bound) {
  std::vector<double> losses(cover.members.size());
  auto n = static_cast<double>(data.y.size());
  EvalScratch scratch;
  for (std::size_t g = 0; g < cover.members.size(); ++g) {
    const auto& net = cover.members[g];
    double acc = 0.0;
    for (std::size_t i = 0; i < data.y.size(); ++i) {
      double pred = forward(net, data.x.row(i), scratch);
      if (clip_bound) pred = std::max(-*clip_bound, std::min(*clip_bound, pred));
      double diff = data.y[i] - pred;
      acc += diff * diff;
    }
    losses[g] = acc / n;
  }
  return losses;
}

CanonicalNet clip_wrapped(const CanonicalNet& net, double b) {
  double bound = b;
  if (net.output().kind == OutputSpec::Kind::clip)
    bound = std::min(bound, net.output().clip_bound);
  return CanonicalNet(net.input_dim(), net.encoding(), net.stages(), OutputSpec::clip(bound));
}

}  // namespace

ErmSelection erm_constrained(const Dataset& data, const NetworkCover& cover, double v_cap,
                             double range_bound) {
  if (cover.members.empty()) throw PreconditionError("cover is empty");
  if (!(range_bound > 0.0)) throw PreconditionError("constrained ERM needs B > 0");
  // small relative slack so members built to sit exactly at the cap survive
  double cap = v_cap * (1.0 + 1e-9) + 1e-12;
  std::vector<std::size_t> admissible;
  for (std::size_t g = 0; g < cover.members.size(); ++g)
    if (cover.variations[g] <= cap) admissible.push_back(g);
  if (admissible.empty())
    throw PreconditionError("no cover member satisfies the variation cap");

  NetworkCover filtered;
  filtered.relu_layers = cover.relu_layers;
  filtered.input_dim = cover.input_dim;
  for (auto g : admissible) {
    filtered.members.push_back(cover.members[g]);
    filtered.variations.push_back(cover.variations[g]);
  }
  auto losses = member_losses(data, filtered, range_bound);
  std::size_t best = 0;
  for (std::size_t g = 1; g < losses.size(); ++g)
    if (losses[g] < losses[best]) best = g;

  ErmSelection sel{admissible[best], losses[best], losses[best],
                   clip_wrapped(cover.members[admissible[best]], range_bound)};
  return sel;
}

ErmSelection erm_penalized(const Dataset& data, const NetworkCover& cover, double lambda) {
  if (cover.members.empty()) throw PreconditionError("cover is empty");
  if (lambda < 0.0) throw PreconditionError("penalized ERM needs lambda >= 0");
  auto losses = member_losses(data, cover, std::nullopt);
  std::size_t best = 0;
  double best_obj = losses[0] + cover.variations[0] * lambda;
  for (std::size_t g = 1; g < losses.size(); ++g) {
    double obj = losses[g] + cover.variations[g] * lambda;
    bool better = obj < best_obj ||
                  (obj == best_obj && cover.variations[g] < cover.variations[best]);
    if (better) {
      best = g;
      best_obj = obj;
    }
  }
  return ErmSelection{best, losses[best], best_obj, cover.members[best]};
}

double lambda_n(int relu_layers, int input_dim, std::int64_t n, double c) {
  if (relu_layers < 1 || input_dim < 1 || n < 1)
    throw PreconditionError("lambda_n needs positive arguments");
  if (c < 0.0) throw PreconditionError("lambda_n needs c >= 0");
  return c * std::sqrt((static_cast<double>(relu_layers) +
                        std::log(static_cast<double>(input_dim))) /
                       static_cast<double>(n));
}

double default_lambda_scale(double sigma, double range_bound) {
  return 2.0 * std::sqrt(2.0) * (sigma + 4.0 * range_bound);
}

double theorem2_bound(double v, double sigma, double range_bound, int relu_layers, int input_dim,
                      std::int64_t n) {
  if (v < 0.0 || sigma < 0.0 || range_bound < 0.0 || relu_layers < 1 || input_dim < 1 || n < 1)
    throw PreconditionError("theorem2_bound needs nonnegative scales and positive L, d, n");
  double log_card =
      static_cast<double>(relu_layers) * kLog2 + std::log(2.0 * static_cast<double>(input_dim));
  return 2.0 * v * (sigma + 4.0 * range_bound) *
         std::sqrt(2.0 * log_card / static_cast<double>(n));
}

RiskEstimate risk_mc(const CanonicalNet& f_hat, const CanonicalNet& f_star, const InputLaw& law,
                     std::int64_t m_eval, std::uint64_t seed, int threads) {
  if (m_eval < 1000) throw PreconditionError("risk_mc needs m_eval >= 1000");
  law.validate();
  auto m = static_cast<std::size_t>(m_eval);
  auto d = static_cast<std::size_t>(law.dim());
  Matrix xs(m, d);
  Stream rng(derive_seed(seed, {0x72u}));
  for (std::size_t i = 0; i < m; ++i) law.sample(rng, xs.row(i));

  std::vector<double> sq(m);
  parallel_for(m, threads, [&](std::size_t i) {
    EvalScratch scratch;
    double diff = forward(f_hat, xs.row(i), scratch) - forward(f_star, xs.row(i), scratch);
    sq[i] = diff * diff;
  });
  double mean = mean_of(sq);
  return {mean, se_of_mean(sq, mean)};
}

double loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw PreconditionError("slope needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) throw MathDomainError("log-log slope needs positive values");
    double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double k = static_cast<double>(points.size());
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// experiment orchestration

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::set<std::string>& allowed,
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

NoiseKind noise_from_string(const std::string& s) {
  if (s == "gaussian") return NoiseKind::gaussian;
  if (s == "rademacher") return NoiseKind::rademacher;
  if (s == "uniform") return NoiseKind::uniform;
  throw PreconditionError("noise must be gaussian, rademacher or uniform");
}

InputLaw input_law_from_json(const json& j) {
  require_keys(j, {"lo", "hi"}, {"lo", "hi"}, "task.input");
  InputLaw law;
  for (const auto& v : j.at("lo")) law.lo.push_back(v.get<double>());
  for (const auto& v : j.at("hi")) law.hi.push_back(v.get<double>());
  law.validate();
  return law;
}

TargetSpec target_from_json(const json& j) {
  require_keys(j, {"mode", "L", "width", "V", "seed_offset", "net"}, {"mode"}, "task.target");
  TargetSpec t;
  std::string mode = j.at("mode").get<std::string>();
  if (mode == "generator") {
    t.mode = TargetSpec::Mode::generator;
    if (j.contains("L")) t.relu_layers = j.at("L").get<int>();
    if (j.contains("width")) t.width = j.at("width").get<int>();
    if (j.contains("V")) t.variation = j.at("V").get<double>();
    if (j.contains("seed_offset")) t.seed_offset = j.at("seed_offset").get<std::uint64_t>();
  } else if (mode == "net") {
    t.mode = TargetSpec::Mode::net;
    if (!j.contains("net")) throw PreconditionError("target mode \"net\" requires a net object");
    t.net_json = j.at("net");
  } else {
    throw PreconditionError("target.mode must be \"generator\" or \"net\"");
  }
  return t;
}

CoverSpec cover_from_json(const json& j) {
  require_keys(j,
               {"mode", "L", "d", "width", "V_grid", "count_per_V", "include_target", "ladder",
                "epsilon_label"},
               {"mode", "L", "d"}, "cover");
  CoverSpec c;
  std::string mode = j.at("mode").get<std::string>();
  if (mode == "dirichlet")
    c.mode = CoverSpec::Mode::dirichlet;
  else if (mode == "ladder")
    c.mode = CoverSpec::Mode::ladder;
  else
    throw PreconditionError("cover.mode must be \"dirichlet\" or \"ladder\"");
  c.relu_layers = j.at("L").get<int>();
  c.input_dim = j.at("d").get<int>();
  if (j.contains("width")) c.width = j.at("width").get<int>();
  if (j.contains("V_grid"))
    for (const auto& v : j.at("V_grid")) c.v_grid.push_back(v.get<double>());
  if (j.contains("count_per_V")) c.count_per_v = j.at("count_per_V").get<int>();
  if (j.contains("include_target")) c.include_target = j.at("include_target").get<bool>();
  if (j.contains("epsilon_label")) c.epsilon_label = j.at("epsilon_label").get<double>();
  if (c.mode == CoverSpec::Mode::ladder) {
    if (!j.contains("ladder"))
      throw PreconditionError("cover.mode \"ladder\" requires the ladder object");
    const auto& lad = j.at("ladder");
    require_keys(lad, {"scales", "counts", "calibration_evals"}, {"scales", "counts"},
                 "cover.ladder");
    for (const auto& v : lad.at("scales")) c.ladder_scales.push_back(v.get<double>());
    for (const auto& v : lad.at("counts")) c.ladder_counts.push_back(v.get<int>());
    if (lad.contains("calibration_evals"))
      c.ladder_calibration_evals = lad.at("calibration_evals").get<std::int64_t>();
  } else if (j.contains("ladder")) {
    throw PreconditionError("ladder settings require cover.mode \"ladder\"");
  }
  if (c.mode == CoverSpec::Mode::dirichlet && c.v_grid.empty())
    throw PreconditionError("cover.mode \"dirichlet\" requires V_grid");
  return c;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
  require_keys(j,
               {"run_id", "task", "cover", "lambda", "v_cap", "n", "n_values", "replications",
                "m_eval", "seed", "output"},
               {"run_id", "task", "cover", "replications", "seed"}, "config");
  ExperimentConfig cfg;
  cfg.run_id = j.at("run_id").get<std::string>();

  const auto& task = j.at("task");
  require_keys(task, {"target", "B", "sigma", "noise", "input"}, {"target", "B", "sigma"},
               "task");
  cfg.target = target_from_json(task.at("target"));
  cfg.range_bound = task.at("B").get<double>();
  cfg.sigma = task.at("sigma").get<double>();
  if (task.contains("noise")) cfg.noise = noise_from_string(task.at("noise").get<std::string>());
  if (task.contains("input")) cfg.input_law = input_law_from_json(task.at("input"));

  cfg.cover = cover_from_json(j.at("cover"));
  if (j.contains("lambda")) {
    require_keys(j.at("lambda"), {"c"}, {}, "lambda");
    if (j.at("lambda").contains("c")) cfg.lambda_scale = j.at("lambda").at("c").get<double>();
  }
  if (j.contains("v_cap")) cfg.v_cap = j.at("v_cap").get<double>();
  if (j.contains("n") == j.contains("n_values"))
    throw PreconditionError("config needs exactly one of \"n\" or \"n_values\"");
  if (j.contains("n")) cfg.n_values.push_back(j.at("n").get<std::int64_t>());
  if (j.contains("n_values"))
    for (const auto& v : j.at("n_values")) cfg.n_values.push_back(v.get<std::int64_t>());
  cfg.replications = j.at("replications").get<int>();
  if (j.contains("m_eval")) cfg.m_eval = j.at("m_eval").get<std::int64_t>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("output")) cfg.output_path = j.at("output").get<std::string>();

  if (cfg.replications < 1) throw PreconditionError("replications must be >= 1");
  for (auto n : cfg.n_values) {
    if (n < 1) throw PreconditionError("sample sizes must be positive");
  }
  return cfg;
}

namespace {

CanonicalNet make_target(const ExperimentConfig& cfg) {
  if (cfg.target.mode == TargetSpec::Mode::generator) {
    int layers = cfg.target.relu_layers > 0 ? cfg.target.relu_layers : cfg.cover.relu_layers;
    int width = cfg.target.width > 0 ? cfg.target.width : cfg.cover.width;
    Stream rng(derive_seed(cfg.seed, {0x7a67u, cfg.target.seed_offset}));
    return scale_output(sample_stochastic_net(layers, cfg.cover.input_dim, width, rng),
                        cfg.target.variation);
  }
  auto loaded = net_from_json(cfg.target.net_json);
  if (std::holds_alternative<GeneralReLUNet>(loaded))
    return canonicalize(std::get<GeneralReLUNet>(loaded));
  if (std::holds_alternative<CanonicalNet>(loaded)) return std::get<CanonicalNet>(loaded);
  throw PreconditionError("experiment targets must be general or canonical nets");
}

NetworkCover assemble_cover(const ExperimentConfig& cfg, const CanonicalNet& target,
                            const InputLaw& law) {
  NetworkCover cover;
  cover.relu_layers = cfg.cover.relu_layers;
  cover.input_dim = cfg.cover.input_dim;
  cover.epsilon_label = cfg.cover.epsilon_label;
  auto append = [&cover](NetworkCover&& extra) {
    for (std::size_t g = 0; g < extra.members.size(); ++g) {
      cover.members.push_back(std::move(extra.members[g]));
      cover.variations.push_back(extra.variations[g]);
    }
  };
  if (cfg.cover.include_target) {
    cover.members.push_back(target);
    cover.variations.push_back(path_variation(target));
  }
  if (cfg.cover.mode == CoverSpec::Mode::ladder) {
    append(build_ladder_cover(target, cfg.cover.ladder_scales, cfg.cover.ladder_counts,
                              derive_seed(cfg.seed, {0x1addu}), law,
                              cfg.cover.ladder_calibration_evals));
  }
  if (!cfg.cover.v_grid.empty()) {
    if (cfg.cover.count_per_v < 1)
      throw PreconditionError("V_grid requires count_per_V >= 1");
    append(build_cover(cfg.cover.relu_layers, cfg.cover.input_dim, cfg.cover.v_grid,
                       cfg.cover.width, cfg.cover.count_per_v,
                       derive_seed(cfg.seed, {0xd121u})));
  }
  if (cover.members.empty()) throw PreconditionError("assembled cover is empty");
  for (const auto& member : cover.members) {
    if (member.input_dim() != cfg.cover.input_dim)
      throw DimensionError("cover member dimension mismatch");
  }
  return cover;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg, int threads) {
  CanonicalNet target = make_target(cfg);
  InputLaw law = cfg.input_law ? *cfg.input_law : InputLaw::unit_cube(cfg.cover.input_dim);

  // range check once; replication tasks reuse the verified target
  RegressionTask probe(target, cfg.range_bound, cfg.noise, cfg.sigma, 1,
                       derive_seed(cfg.seed, {0x7a5cu}), law, true);
  (void)probe;

  NetworkCover cover = assemble_cover(cfg, target, law);
  double v_star = path_variation(target);
  double v_cap = cfg.v_cap ? *cfg.v_cap
                           : (cfg.cover.v_grid.empty() ? v_star : cfg.cover.v_grid.back());
  double c_lambda = cfg.lambda_scale ? *cfg.lambda_scale
                                     : default_lambda_scale(cfg.sigma, cfg.range_bound);

  // approximation error of every member, for the cover-restricted adaptive
  // right side
  std::vector<RiskEstimate> approx(cover.members.size());
  parallel_for(cover.members.size(), threads, [&](std::size_t g) {
    approx[g] = risk_mc(cover.members[g], target, law, cfg.m_eval,
                        derive_seed(cfg.seed, {0xa99u, g}), 1);
  });

  ExperimentReport report;
  auto reps = static_cast<std::size_t>(cfg.replications);
  for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
    std::int64_t n = cfg.n_values[ni];
    double lambda = lambda_n(cover.relu_layers, cover.input_dim, n, c_lambda);

    std::vector<double> risk_c(reps), risk_p(reps), v_sel(reps);
    parallel_for(reps, threads, [&](std::size_t r) {
      RegressionTask task(target, cfg.range_bound, cfg.noise, cfg.sigma, n,
                          derive_seed(cfg.seed, {0xda7au, ni, r}), law, false);
      Dataset data = generate_data(task);
      auto sel_c = erm_constrained(data, cover, v_cap, cfg.range_bound);
      risk_c[r] = risk_mc(sel_c.model, target, law, cfg.m_eval,
                          derive_seed(cfg.seed, {0x72c5u, ni, r}), 1)
                      .risk;
      auto sel_p = erm_penalized(data, cover, lambda);
      risk_p[r] = risk_mc(cover.members[sel_p.index], target, law, cfg.m_eval,
                          derive_seed(cfg.seed, {0x72b5u, ni, r}), 1)
                      .risk;
      v_sel[r] = cover.variations[sel_p.index];
    });

    ExperimentRow row;
    row.run_id = cfg.run_id + "-n" + std::to_string(n);
    row.n = n;
    row.v_star = v_star;
    row.v_cap = v_cap;
    row.sigma = cfg.sigma;
    row.range_bound = cfg.range_bound;
    row.relu_layers = cover.relu_layers;
    row.input_dim = cover.input_dim;
    row.emp_risk = mean_of(risk_c);
    row.emp_risk_se = se_of_mean(risk_c, row.emp_risk);
    row.thm2_bound = theorem2_bound(v_cap, cfg.sigma, cfg.range_bound, cover.relu_layers,
                                    cover.input_dim, n);
    row.lambda = lambda;
    row.selected_v = mean_of(v_sel);
    row.penalized_risk = mean_of(risk_p);
    row.penalized_risk_se = se_of_mean(risk_p, row.penalized_risk);

    std::size_t best = 0;
    double best_rhs = approx[0].risk + cover.variations[0] * lambda;
    for (std::size_t g = 1; g < cover.members.size(); ++g) {
      double rhs = approx[g].risk + cover.variations[g] * lambda;
      if (rhs < best_rhs) {
        best = g;
        best_rhs = rhs;
      }
    }
    row.adaptive_rhs = best_rhs;
    row.adaptive_rhs_se = approx[best].std_error;

    row.pass_thm2 = row.emp_risk <= row.thm2_bound;
    double slack = 3.0 * std::sqrt(row.penalized_risk_se * row.penalized_risk_se +
                                   row.adaptive_rhs_se * row.adaptive_rhs_se);
    row.pass_adaptive = row.penalized_risk <= row.adaptive_rhs + slack;
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string experiment_csv(const ExperimentReport& report) {
  std::string out =
      "run_id,n,V_star,V_cap,sigma,B,L,d,emp_risk,emp_risk_se,thm2_bound,lambda_n,selected_V,"
      "pass_thm2,pass_adaptive\n";
  for (const auto& r : report.rows) {
    out += r.run_id;
    out += ',' + std::to_string(r.n);
    out += ',' + fmt17(r.v_star);
    out += ',' + fmt17(r.v_cap);
    out += ',' + fmt17(r.sigma);
    out += ',' + fmt17(r.range_bound);
    out += ',' + std::to_string(r.relu_layers);
    out += ',' + std::to_string(r.input_dim);
    out += ',' + fmt17(r.emp_risk);
    out += ',' + fmt17(r.emp_risk_se);
    out += ',' + fmt17(r.thm2_bound);
    out += ',' + fmt17(r.lambda);
    out += ',' + fmt17(r.selected_v);
    out += r.pass_thm2 ? ",1" : ",0";
    out += r.pass_adaptive ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

nlohmann::json experiment_report_json(const ExperimentReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    json row;
    row["run_id"] = r.run_id;
    row["n"] = r.n;
    row["V_star"] = r.v_star;
    row["V_cap"] = r.v_cap;
    row["sigma"] = r.sigma;
    row["B"] = r.range_bound;
    row["L"] = r.relu_layers;
    row["d"] = r.input_dim;
    row["emp_risk"] = r.emp_risk;
    row["emp_risk_se"] = r.emp_risk_se;
    row["thm2_bound"] = r.thm2_bound;
    row["lambda_n"] = r.lambda;
    row["selected_V"] = r.selected_v;
    row["pass_thm2"] = r.pass_thm2;
    row["pass_adaptive"] = r.pass_adaptive;
    row["penalized_risk"] = r.penalized_risk;
    row["penalized_risk_se"] = r.penalized_risk_se;
    row["adaptive_rhs"] = r.adaptive_rhs;
    row["adaptive_rhs_se"] = r.adaptive_rhs_se;
    rows.push_back(std::move(row));
  }
  json out;
  out["rows"] = std::move(rows);
  return out;
}

}  // namespace pathvar
