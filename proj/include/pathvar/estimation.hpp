#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pathvar/matrix.hpp"
#include "pathvar/nets.hpp"
#include "pathvar/rng.hpp"

namespace pathvar {

// sub-Gaussian noise menu; sigma is the sub-Gaussian scale parameter
// (gaussian sd, the rademacher magnitude, the half width of the uniform)
enum class NoiseKind { gaussian, rademacher, uniform };

// product law on [-1,1]^d; per-coordinate uniform intervals
struct InputLaw {
  std::vector<double> lo;
  std::vector<double> hi;

  static InputLaw unit_cube(int d);
  int dim() const { return static_cast<int>(lo.size()); }
  void validate() const;
  void sample(Stream& rng, std::span<double> out) const;
};

struct RegressionTask {
  CanonicalNet target;
  double target_variation = 0.0;
  double range_bound = 0.0;
  NoiseKind noise = NoiseKind::gaussian;
  double sigma = 1.0;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  InputLaw law;

  // verify_range samples image points and rejects targets escaping [-B, B]
  RegressionTask(CanonicalNet f_star, double b, NoiseKind noise_kind, double noise_sigma,
                 std::int64_t sample_count, std::uint64_t master_seed, InputLaw input_law,
                 bool verify_range = true);
};

struct Dataset {
  Matrix x;
  std::vector<double> y;
};

Dataset generate_data(const RegressionTask& task);
Dataset generate_data(const RegressionTask& task, std::uint64_t seed_override);

struct NetworkCover {
  std::vector<CanonicalNet> members;
  std::vector<double> variations;
  int relu_layers = 0;
  int input_dim = 0;
  double epsilon_label = 0.0;
};

// random row-stochastic net over signed input pairs; V == 1 by construction
CanonicalNet sample_stochastic_net(int relu_layers, int input_dim, int width, Stream& rng);

// count_per_v random normalized nets per grid value, each rescaled so the
// path variation equals the grid value (checked to 1e-10)
NetworkCover build_cover(int relu_layers, int input_dim, const std::vector<double>& v_grid,
                         int width, int count_per_v, std::uint64_t seed);

// members obtained by blending the target's output row toward random rows,
// calibrated so squared distances to the target sit near the given scales;
// variation is preserved. Used to populate covers at graded resolutions.
NetworkCover build_ladder_cover(const CanonicalNet& target,
                                const std::vector<double>& gap_scales,
                                const std::vector<int>& counts, std::uint64_t seed,
                                const InputLaw& law, std::int64_t calibration_evals = 4096);

struct ErmSelection {
  std::size_t index = 0;
  double empirical_loss = 0.0;
  double objective = 0.0;  // loss + V * lambda for the penalized variant
  CanonicalNet model;      // clip-wrapped for the constrained variant
};

// least squares over the members with V <= v_cap, each clipped to [-B, B];
// ties go to the smallest index
ErmSelection erm_constrained(const Dataset& data, const NetworkCover& cover, double v_cap,
                             double range_bound);

// least squares plus V(f) * lambda over all members; ties to smaller V,
// then smaller index
ErmSelection erm_penalized(const Dataset& data, const NetworkCover& cover, double lambda);

double lambda_n(int relu_layers, int input_dim, std::int64_t n, double c);
// documented default c = 2 sqrt(2) (sigma + 4B)
double default_lambda_scale(double sigma, double range_bound);

// 2V(sigma+4B) sqrt(2 (L log 2 + log 2d) / n)
double theorem2_bound(double v, double sigma, double range_bound, int relu_layers, int input_dim,
                      std::int64_t n);

struct RiskEstimate {
  double risk = 0.0;
  double std_error = 0.0;
};

// Monte Carlo L2(P_X) squared distance on fresh inputs
RiskEstimate risk_mc(const CanonicalNet& f_hat, const CanonicalNet& f_star, const InputLaw& law,
                     std::int64_t m_eval, std::uint64_t seed, int threads = 1);

// least squares slope of log y against log x; demands positive values
double loglog_slope(const std::vector<std::pair<double, double>>& points);

struct TargetSpec {
  enum class Mode { generator, net };
  Mode mode = Mode::generator;
  int relu_layers = 0;  // 0 -> inherit from the cover
  int width = 0;
  double variation = 1.0;
  std::uint64_t seed_offset = 0;
  nlohmann::json net_json;
};

struct CoverSpec {
  enum class Mode { dirichlet, ladder };
  Mode mode = Mode::dirichlet;
  int relu_layers = 1;
  int input_dim = 1;
  int width = 4;
  std::vector<double> v_grid;
  int count_per_v = 0;
  bool include_target = true;
  std::vector<double> ladder_scales;
  std::vector<int> ladder_counts;
  std::int64_t ladder_calibration_evals = 4096;
  double epsilon_label = 0.0;
};

struct ExperimentConfig {
  std::string run_id;
  TargetSpec target;
  double range_bound = 1.0;
  double sigma = 1.0;
  NoiseKind noise = NoiseKind::gaussian;
  std::optional<InputLaw> input_law;
  CoverSpec cover;
  std::optional<double> lambda_scale;
  std::optional<double> v_cap;
  std::vector<std::int64_t> n_values;
  int replications = 1;
  std::int64_t m_eval = 4000;
  std::uint64_t seed = 0;
  std::optional<std::string> output_path;
};

// strict parser: unknown keys are rejected with the offending name
ExperimentConfig parse_experiment_config(const nlohmann::json& j);

struct ExperimentRow {
  std::string run_id;
  std::int64_t n = 0;
  double v_star = 0.0, v_cap = 0.0, sigma = 0.0, range_bound = 0.0;
  int relu_layers = 0, input_dim = 0;
  double emp_risk = 0.0, emp_risk_se = 0.0;
  double thm2_bound = 0.0;
  double lambda = 0.0;
  double selected_v = 0.0;
  bool pass_thm2 = false;
  bool pass_adaptive = false;
  double penalized_risk = 0.0, penalized_risk_se = 0.0;
  double adaptive_rhs = 0.0, adaptive_rhs_se = 0.0;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
};

ExperimentReport run_experiment(const ExperimentConfig& config, int threads = 1);

std::string experiment_csv(const ExperimentReport& report);
nlohmann::json experiment_report_json(const ExperimentReport& report);

}  // namespace pathvar
