#include "pathvar/complexity.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "pathvar/parallel.hpp"
#include "pathvar/rng.hpp"
#include "pathvar/variation.hpp"

namespace pathvar {

namespace {

struct KahanSum {
  double sum = 0.0, c = 0.0;
  void add(double v) {
    double y = v - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

double sup_dot(const FinitePointSet& a, std::span<const double> xi) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : a.points()) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += xi[i] * p[i];
    if (s > best) best = s;
  }
  return best;
}

double pattern_value(const FinitePointSet& a, std::span<const double> xi, const PsiSpec& psi,
                     bool positive_part) {
  double s = sup_dot(a, xi);
  if (positive_part && s < 0.0) s = 0.0;
  return psi.apply(s);
}

void check_exact_feasible(const FinitePointSet& a, const PerturbationLaw& law) {
  if (law.kind != PerturbationLaw::Kind::rademacher)
    throw PreconditionError(
        "exact enumeration supports only the rademacher law; use the Monte Carlo estimator");
  if (a.dim() > kExactEnumerationMaxDim)
    throw PreconditionError("exact enumeration refused for n = " + std::to_string(a.dim()) +
                            " > " + std::to_string(kExactEnumerationMaxDim) +
                            "; use the Monte Carlo estimator");
}

std::vector<double> mc_pattern_values(const FinitePointSet& a, const PerturbationLaw& law,
                                      const PsiSpec& psi, std::int64_t replicates,
                                      std::uint64_t seed, int threads) {
  law.validate();
  psi.validate();
  if (replicates < 100) throw PreconditionError("Monte Carlo needs at least 100 replicates");
  std::vector<double> values(static_cast<std::size_t>(replicates));
  std::size_t n = a.dim();
  parallel_for(values.size(), threads, [&](std::size_t r) {
    Stream rng(derive_seed(seed, {0x6d63u, r}));
    std::vector<double> xi(n);
    for (auto& x : xi)
      x = law.kind == PerturbationLaw::Kind::rademacher ? rng.rademacher()
                                                        : law.sigma * rng.normal();
    values[r] = pattern_value(a, xi, psi, true);
  });
  return values;
}

MomentValue mean_and_se(const std::vector<double>& values) {
  KahanSum acc;
  for (double v : values) acc.add(v);
  double mean = acc.sum / static_cast<double>(values.size());
  KahanSum var;
  for (double v : values) var.add((v - mean) * (v - mean));
  double se = 0.0;
  if (values.size() > 1) {
    double sample_var = var.sum / static_cast<double>(values.size() - 1);
    se = std::sqrt(sample_var / static_cast<double>(values.size()));
  }
  return {mean, se};
}

// tolerance used when asserting proven inequalities on exactly enumerated
// values; absorbs summation roundoff only
bool leq_with_guard(double lhs, double rhs) {
  return lhs <= rhs + 1e-12 * (1.0 + std::abs(rhs));
}

FinitePointSet with_hull_points(const FinitePointSet& a, int hull_samples, std::uint64_t seed) {
  auto pts = a.points();
  if (a.size() >= 2 && hull_samples > 0) {
    Stream rng(derive_seed(seed, {0x68756cu}));
    for (int k = 0; k < hull_samples; ++k) {
      std::size_t i = rng.index(a.size());
      std::size_t j = rng.index(a.size());
      std::vector<double> mid(a.dim());
      for (std::size_t c = 0; c < a.dim(); ++c)
        mid[c] = (a.points()[i][c] + a.points()[j][c]) / 2.0;
      pts.push_back(std::move(mid));
    }
  }
  return FinitePointSet(std::move(pts), false);
}

}  // namespace

MomentValue m_value_exact(const FinitePointSet& a, const PsiSpec& psi, bool positive_part) {
  psi.validate();
  check_exact_feasible(a, PerturbationLaw::rademacher());
  std::size_t n = a.dim();
  std::uint64_t patterns = 1ull << n;
  std::vector<double> xi(n);
  KahanSum acc;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    for (std::size_t i = 0; i < n; ++i) xi[i] = (mask >> i) & 1u ? 1.0 : -1.0;
    acc.add(pattern_value(a, xi, psi, positive_part));
  }
  return {acc.sum / static_cast<double>(patterns), 0.0};
}

MomentValue m_value_mc(const FinitePointSet& a, const PerturbationLaw& law, const PsiSpec& psi,
                       std::int64_t replicates, std::uint64_t seed, int threads) {
  return mean_and_se(mc_pattern_values(a, law, psi, replicates, seed, threads));
}

double mu_complexity_exact(const FinitePointSet& a, const PerturbationLaw& law,
                           const PsiSpec& psi, bool positive_part) {
  law.validate();
  check_exact_feasible(a, law);
  return psi.inverse(m_value_exact(a, psi, positive_part).value);
}

McEstimate mu_complexity_mc(const FinitePointSet& a, const PerturbationLaw& law,
                            const PsiSpec& psi, std::int64_t replicates, std::uint64_t seed,
                            int threads) {
  auto values = mc_pattern_values(a, law, psi, replicates, seed, threads);
  auto m = mean_and_se(values);
  McEstimate out;
  if (psi.kind == PsiSpec::Kind::identity) {
    out.estimate = m.value;
    out.std_error = m.std_error;
  } else {
    out.estimate = psi.inverse(m.value);
    // delta method through log(m)/lambda
    out.std_error = m.value > 0.0 ? m.std_error / (psi.lambda * m.value) : 0.0;
    out.biased_transform = true;
  }
  return out;
}

ContractionReport contraction_check(const FinitePointSet& a, const Contraction& phi,
                                    const PerturbationLaw& law, const PsiSpec& psi,
                                    std::int64_t replicates, std::uint64_t seed, int threads,
                                    int hull_samples) {
  law.validate();
  psi.validate();
  std::vector<std::vector<double>> phi_pts;
  phi_pts.reserve(a.size());
  for (const auto& p : a.points()) {
    std::vector<double> q(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) q[i] = phi(p[i]);
    phi_pts.push_back(std::move(q));
  }
  FinitePointSet phi_a(std::move(phi_pts), false);
  FinitePointSet conv_a = with_hull_points(a, hull_samples, seed);
  FinitePointSet signed_hull = layer_op(a, phi);

  ContractionReport rep;
  if (replicates == 0) {
    check_exact_feasible(a, law);
    rep.m_phi_a = m_value_exact(phi_a, psi).value;
    rep.m_a = m_value_exact(a, psi).value;
    rep.m_conv_a = m_value_exact(conv_a, psi).value;
    rep.m_signed_hull = m_value_exact(signed_hull, psi).value;
    rep.exact = true;
    rep.two_m_a = 2.0 * rep.m_a;
    rep.pass_phi = leq_with_guard(rep.m_phi_a, rep.m_a);
    rep.pass_conv = leq_with_guard(rep.m_conv_a, rep.m_a);
    rep.pass_signed_hull = leq_with_guard(rep.m_signed_hull, rep.two_m_a);
  } else {
    auto mv_phi = m_value_mc(phi_a, law, psi, replicates, derive_seed(seed, {1}), threads);
    auto mv_a = m_value_mc(a, law, psi, replicates, derive_seed(seed, {2}), threads);
    auto mv_conv = m_value_mc(conv_a, law, psi, replicates, derive_seed(seed, {3}), threads);
    auto mv_hull = m_value_mc(signed_hull, law, psi, replicates, derive_seed(seed, {4}), threads);
    rep.m_phi_a = mv_phi.value;
    rep.m_a = mv_a.value;
    rep.m_conv_a = mv_conv.value;
    rep.m_signed_hull = mv_hull.value;
    rep.se_phi_a = mv_phi.std_error;
    rep.se_a = mv_a.std_error;
    rep.se_conv_a = mv_conv.std_error;
    rep.se_signed_hull = mv_hull.std_error;
    rep.exact = false;
    rep.two_m_a = 2.0 * rep.m_a;
    auto mc_leq = [](double lhs, double se_lhs, double rhs, double se_rhs) {
      return lhs <= rhs + 3.0 * std::sqrt(se_lhs * se_lhs + se_rhs * se_rhs);
    };
    rep.pass_phi = mc_leq(rep.m_phi_a, rep.se_phi_a, rep.m_a, rep.se_a);
    rep.pass_conv = mc_leq(rep.m_conv_a, rep.se_conv_a, rep.m_a, rep.se_a);
    rep.pass_signed_hull =
        mc_leq(rep.m_signed_hull, rep.se_signed_hull, rep.two_m_a, 2.0 * rep.se_a);
  }
  return rep;
}

ComplexityBound relu_class_complexity_bound(double v, int relu_layers, int input_dim,
                                            std::int64_t n, const PerturbationLaw& law) {
  law.validate();
  if (v < 0.0) throw PreconditionError("variation bound must be nonnegative");
  if (relu_layers < 0 || input_dim < 1 || n < 1)
    throw PreconditionError("bound needs L >= 0, d >= 1, n >= 1");
  double log_card = static_cast<double>(relu_layers) * std::numbers::ln2_v<double> +
                    std::log(2.0 * static_cast<double>(input_dim));
  double sigma = law.kind == PerturbationLaw::Kind::gaussian ? law.sigma : 1.0;
  ComplexityBound out;
  out.bound = sigma * v * std::sqrt(2.0 * static_cast<double>(n) * log_card);
  out.lambda_opt = v > 0.0
                       ? std::sqrt(2.0 * log_card / (v * v * static_cast<double>(n))) / sigma
                       : std::numeric_limits<double>::infinity();
  return out;
}

EmpiricalComplexity empirical_class_complexity(std::span<const CanonicalNet> nets,
                                               const Matrix& inputs, const PerturbationLaw& law,
                                               const PsiSpec& psi, std::int64_t replicates,
                                               std::uint64_t seed, double v_cap, int threads) {
  if (nets.empty()) throw PreconditionError("empirical complexity needs at least one net");
  int d = nets.front().input_dim();
  for (const auto& net : nets) {
    if (net.input_dim() != d) throw DimensionError("nets must share the input dimension");
    double v = path_variation(net);
    if (v > v_cap * (1.0 + 1e-9) + 1e-12)
      throw PreconditionError("a net exceeds the variation cap: V = " + std::to_string(v));
  }
  if (inputs.cols != static_cast<std::size_t>(d))
    throw DimensionError("input matrix columns must equal the net input dimension");

  std::vector<std::vector<double>> values(nets.size(), std::vector<double>(inputs.rows));
  parallel_for(nets.size(), threads, [&](std::size_t g) {
    EvalScratch scratch;
    for (std::size_t i = 0; i < inputs.rows; ++i)
      values[g][i] = forward(nets[g], inputs.row(i), scratch);
  });
  FinitePointSet a(std::move(values), false);

  EmpiricalComplexity out;
  if (law.kind == PerturbationLaw::Kind::rademacher && a.dim() <= kExactEnumerationMaxDim) {
    out.value = mu_complexity_exact(a, law, psi);
    out.std_error = 0.0;
    out.exact = true;
  } else {
    auto mc = mu_complexity_mc(a, law, psi, replicates, seed, threads);
    out.value = mc.estimate;
    out.std_error = mc.std_error;
    out.exact = false;
  }
  return out;
}

}  // namespace pathvar
