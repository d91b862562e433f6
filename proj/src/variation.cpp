#include "pathvar/variation.hpp"

#include <limits>
#include <string>

namespace pathvar {

SubnetworkVariations subnetwork_variations(const CanonicalNet& net) {
  SubnetworkVariations sv;
  sv.levels.reserve(net.depth());
  sv.levels.emplace_back(net.inner_width(), 1.0);
  const auto& stages = net.stages();
  for (std::size_t s = 0; s + 1 < stages.size(); ++s) {
    const auto& w = stages[s].weights;
    const auto& prev = sv.levels.back();
    std::vector<double> cur(w.rows, 0.0);
    for (std::size_t u = 0; u < w.rows; ++u) {
      double acc = 0.0;
      auto row = w.row(u);
      for (std::size_t v = 0; v < row.size(); ++v) acc += row[v] * prev[v];
      cur[u] = acc;
    }
    sv.levels.push_back(std::move(cur));
  }
  return sv;
}

double path_variation(const CanonicalNet& net) {
  auto sv = subnetwork_variations(net);
  const auto& top = sv.levels.back();
  auto out = net.stages().back().weights.row(0);
  double v = 0.0;
  for (std::size_t j = 0; j < out.size(); ++j) v += out[j] * top[j];
  return v;
}

std::uint64_t path_count(const CanonicalNet& net) {
  const std::uint64_t cap = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t count = 1;
  std::uint64_t width = net.inner_width();
  const auto& stages = net.stages();
  count = width;
  for (std::size_t s = 0; s + 1 < stages.size(); ++s) {
    std::uint64_t w = stages[s].weights.rows;
    if (count > cap / w) return cap;
    count *= w;
  }
  return count;
}

namespace {

// depth-first product sum; zero branches are pruned, which leaves the
// floating point result unchanged
double enumerate_paths(const CanonicalNet& net, std::size_t level, std::size_t unit,
                       double prod) {
  if (level == 0) return prod;
  const auto& stage = net.stages()[level - 1];
  auto row = stage.weights.row(unit);
  double total = 0.0;
  for (std::size_t v = 0; v < row.size(); ++v) {
    if (row[v] == 0.0) continue;
    total += enumerate_paths(net, level - 1, v, prod * row[v]);
  }
  return total;
}

}  // namespace

double path_variation_bruteforce(const CanonicalNet& net, std::uint64_t cap) {
  std::uint64_t count = path_count(net);
  if (count > cap)
    throw PreconditionError("path enumeration refused: " + std::to_string(count) +
                            " paths exceed the cap of " + std::to_string(cap));
  std::size_t top_level = net.depth() - 1;  // unit levels 0..depth-1, 0 = input slots
  auto out = net.stages().back().weights.row(0);
  double total = 0.0;
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (out[j] == 0.0) continue;
    total += enumerate_paths(net, top_level, j, out[j]);
  }
  return total;
}

NormalizedNet normalize(const CanonicalNet& net) {
  auto sv = subnetwork_variations(net);
  const auto& top = sv.levels.back();
  auto out_row = net.stages().back().weights.row(0);
  double v = 0.0;
  for (std::size_t j = 0; j < out_row.size(); ++j) v += out_row[j] * top[j];
  if (!(v > 0.0)) throw MathDomainError("degenerate network: path variation is zero");

  std::vector<CanonicalStage> stages;
  stages.reserve(net.depth());
  std::vector<std::vector<std::uint32_t>> dead(net.hidden_layers());
  for (std::size_t s = 0; s + 1 < net.depth(); ++s) {
    const auto& st = net.stages()[s];
    const auto& inner_v = sv.levels[s];
    const auto& unit_v = sv.levels[s + 1];
    CanonicalStage ns;
    ns.signs = st.signs;
    ns.weights = Matrix(st.weights.rows, st.weights.cols, 0.0);
    for (std::size_t u = 0; u < st.weights.rows; ++u) {
      if (unit_v[u] > 0.0) {
        for (std::size_t c = 0; c < st.weights.cols; ++c)
          ns.weights(u, c) = st.weights(u, c) * inner_v[c] / unit_v[u];
      } else {
        // dead unit: the proportionality rule is undefined, emit a uniform
        // row; nothing downstream draws weight from it
        double uniform = 1.0 / static_cast<double>(st.weights.cols);
        for (std::size_t c = 0; c < st.weights.cols; ++c) ns.weights(u, c) = uniform;
        dead[s].push_back(static_cast<std::uint32_t>(u));
      }
    }
    stages.push_back(std::move(ns));
  }
  CanonicalStage out_stage;
  out_stage.weights = Matrix(1, out_row.size(), 0.0);
  for (std::size_t j = 0; j < out_row.size(); ++j)
    out_stage.weights(0, j) = out_row[j] * top[j] / v;
  stages.push_back(std::move(out_stage));

  CanonicalNet tables(net.input_dim(), net.encoding(), std::move(stages), net.output());
  return NormalizedNet(std::move(tables), v, std::move(dead));
}

}  // namespace pathvar
