#include "pathvar/entropy.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <numeric>

#include "pathvar/rng.hpp"

namespace pathvar {

namespace {
constexpr double kLog2 = std::numbers::ln2_v<double>;
}

void RiskProfile::validate() const {
  if (n < 1) throw PreconditionError("profile needs n >= 1");
  if (!(sigma > 0.0)) throw PreconditionError("profile needs sigma > 0");
  if (r_n < 0.0 || r_n_star < 0.0 || range_bound < 0.0 || complexity_constant < 0.0)
    throw PreconditionError("profile risk quantities must be nonnegative");
}

double fano_risk_lower(const RiskProfile& profile, double epsilon, double log_packing) {
  profile.validate();
  if (!(log_packing > 0.0)) throw PreconditionError("fano lower bound needs logN > 0");
  double info = static_cast<double>(profile.n) * profile.r_n_star /
                    (2.0 * profile.sigma * profile.sigma) +
                kLog2;
  return epsilon * epsilon / 4.0 * (1.0 - info / log_packing);
}

double fano_entropy_upper(const RiskProfile& profile, double epsilon) {
  profile.validate();
  double eps2 = epsilon * epsilon;
  if (!(eps2 > 4.0 * profile.r_n))
    throw MathDomainError("fano entropy bound undefined: eps^2 must exceed 4 r_n");
  double info = static_cast<double>(profile.n) * profile.r_n_star /
                    (2.0 * profile.sigma * profile.sigma) +
                kLog2;
  double result = info / (1.0 - 4.0 * profile.r_n / eps2);
  if (eps2 >= 8.0 * profile.r_n) {
    double simple = static_cast<double>(profile.n) * profile.r_n_star /
                        (profile.sigma * profile.sigma) +
                    2.0 * kLog2;
    assert(result <= simple + 1e-12 * (1.0 + simple));
    (void)simple;
  }
  return result;
}

double corollary5_entropy(double complexity_constant, double epsilon) {
  if (complexity_constant < 0.0) throw PreconditionError("C_F must be nonnegative");
  if (!(epsilon > 0.0)) throw PreconditionError("epsilon must be positive");
  return 16.0 * complexity_constant * complexity_constant / (epsilon * epsilon) + 2.0 * kLog2;
}

double relu_entropy_bound(double v, int relu_layers, int input_dim, double epsilon) {
  if (v < 0.0 || relu_layers < 0 || input_dim < 1)
    throw PreconditionError("entropy bound needs V >= 0, L >= 0, d >= 1");
  if (!(epsilon > 0.0)) throw PreconditionError("epsilon must be positive");
  double log_card =
      static_cast<double>(relu_layers) * kLog2 + std::log(2.0 * static_cast<double>(input_dim));
  return kEntropyBoundConstant * v * v * log_card / (epsilon * epsilon) + 2.0 * kLog2;
}

double sqrt_rate_risk(double complexity_constant, double range_bound, double sigma,
                      std::int64_t m) {
  double scale = (range_bound + sigma) * complexity_constant;
  if (m <= 0) return scale;
  return scale / std::sqrt(static_cast<double>(m));
}

double cumulative_predictive_risk(double complexity_constant, double range_bound, double sigma,
                                  std::int64_t n) {
  if (n < 1) throw PreconditionError("cumulative risk needs n >= 1");
  double total = 0.0;
  for (std::int64_t m = 0; m < n; ++m)
    total += sqrt_rate_risk(complexity_constant, range_bound, sigma, m);
  return total;
}

PackingResult greedy_packing(const std::vector<std::vector<double>>& values, double epsilon,
                             PackingMetric metric, std::optional<std::uint64_t> shuffle_seed) {
  if (values.empty()) throw PreconditionError("packing needs a nonempty list");
  std::size_t dim = values.front().size();
  for (const auto& v : values) {
    if (v.size() != dim) throw DimensionError("packing vectors have mixed dimensions");
  }
  double scale = metric == PackingMetric::normalized && dim > 0
                     ? 1.0 / std::sqrt(static_cast<double>(dim))
                     : 1.0;

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  if (shuffle_seed) {
    Stream rng(derive_seed(*shuffle_seed, {0x7061636bu}));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.index(i)]);
  }

  PackingResult out;
  out.epsilon = epsilon;
  out.shuffle_seed = shuffle_seed;
  for (std::size_t idx : order) {
    const auto& cand = values[idx];
    bool admit = true;
    for (std::size_t c : out.centers) {
      const auto& center = values[c];
      double d2 = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        double diff = cand[k] - center[k];
        d2 += diff * diff;
      }
      if (std::sqrt(d2) * scale <= epsilon) {
        admit = false;
        break;
      }
    }
    if (admit) out.centers.push_back(idx);
  }
  out.count = out.centers.size();
  return out;
}

}  // namespace pathvar
