#pragma once

#include <cstdint>
#include <vector>

#include "pathvar/nets.hpp"

namespace pathvar {

// V_{j_ell} per unit layer, listed innermost first: levels[0] covers the
// input slots (all ones), levels[k] the units produced by stage k-1
struct SubnetworkVariations {
  std::vector<std::vector<double>> levels;
};

SubnetworkVariations subnetwork_variations(const CanonicalNet& net);

// total path variation V: sum over root-to-input paths of weight products
double path_variation(const CanonicalNet& net);

// number of root-to-input paths (saturates at uint64 max)
std::uint64_t path_count(const CanonicalNet& net);

// exact enumeration oracle; refuses when the path count exceeds the cap
double path_variation_bruteforce(const CanonicalNet& net, std::uint64_t cap = 1'000'000);

// Theorem 1: rebalance into per-unit probability rows plus the scale V
NormalizedNet normalize(const CanonicalNet& net);

}  // namespace pathvar
