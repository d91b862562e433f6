#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace pathvar {

inline std::uint64_t splitmix64_once(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// fold tags into a master seed; used to give every replicate / subcomponent
// its own stream so results do not depend on scheduling
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = splitmix64_once(master);
  for (auto t : tags) s = splitmix64_once(s ^ (t + 0x9e3779b97f4a7c15ull));
  return s;
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : gen_(splitmix64_once(seed)) {}

  std::uint64_t bits() { return gen_(); }

  // [0, 1)
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double rademacher() { return (gen_() >> 63) ? 1.0 : -1.0; }

  // Box-Muller; spare cached so a fresh Stream is fully determined by its seed
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// flat Dirichlet row: normalized unit exponentials
inline std::vector<double> dirichlet_row(Stream& rng, std::size_t k) {
  std::vector<double> row(k);
  double total = 0.0;
  for (auto& v : row) {
    v = -std::log(1.0 - rng.uniform01());
    total += v;
  }
  for (auto& v : row) v /= total;
  return row;
}

}  // namespace pathvar
