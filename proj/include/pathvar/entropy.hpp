#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pathvar/errors.hpp"

namespace pathvar {

// ingredients of the Fano risk/entropy relationship
struct RiskProfile {
  std::int64_t n = 1;
  double sigma = 1.0;
  double r_n = 0.0;       // batch risk bound
  double r_n_star = 0.0;  // predictive (cumulative) risk bound per observation
  double range_bound = 0.0;
  double complexity_constant = 0.0;  // C_F of the sqrt(m) risk form

  void validate() const;
};

// (eps^2/4) (1 - (n r*/(2 sigma^2) + log 2)/logN); may be negative (vacuous)
double fano_risk_lower(const RiskProfile& profile, double epsilon, double log_packing);

// (n r*/(2 sigma^2) + log 2) / (1 - 4 r_n/eps^2), defined for eps^2 > 4 r_n
double fano_entropy_upper(const RiskProfile& profile, double epsilon);

// 16 C_F^2/eps^2 + 2 log 2
double corollary5_entropy(double complexity_constant, double epsilon);

// documented constant: the risk rate 2V(sigma+4B)sqrt(...) cast into the
// sqrt(m) form via 2(sigma+4B) <= 8(sigma+B) gives C_F = 8V sqrt(2(...)),
// hence 16 * 8^2 * 2
inline constexpr double kEntropyBoundConstant = 2048.0;

// K V^2 (L log 2 + log 2d)/eps^2 + 2 log 2
double relu_entropy_bound(double v, int relu_layers, int input_dim, double epsilon);

// risk sequence r_0 = (B+sigma) C_F, r_m = (B+sigma) C_F / sqrt(m)
double sqrt_rate_risk(double complexity_constant, double range_bound, double sigma,
                      std::int64_t m);

// n r_n^* = sum_{m=0}^{n-1} r_m for the sqrt(m) risk form
double cumulative_predictive_risk(double complexity_constant, double range_bound, double sigma,
                                  std::int64_t n);

enum class PackingMetric { euclidean, normalized };

struct PackingResult {
  double epsilon = 0.0;
  std::size_t count = 0;
  std::vector<std::size_t> centers;  // indices into the input list
  std::optional<std::uint64_t> shuffle_seed;
};

// greedy maximal packing: walk the vectors in order (optionally a seeded
// shuffle) and admit each one whose distance to all admitted centers
// exceeds epsilon; the count lower-bounds the maximal packing number
PackingResult greedy_packing(const std::vector<std::vector<double>>& values, double epsilon,
                             PackingMetric metric,
                             std::optional<std::uint64_t> shuffle_seed = std::nullopt);

}  // namespace pathvar
