#pragma once

#include <cstdint>
#include <span>

#include "pathvar/matrix.hpp"
#include "pathvar/nets.hpp"
#include "pathvar/pointset.hpp"

namespace pathvar {

// enumeration over 2^n sign patterns is refused beyond this dimension
inline constexpr std::size_t kExactEnumerationMaxDim = 22;

// psi-scale moment M(A) = E sup_a psi((sum_i xi_i a_i)_+)
struct MomentValue {
  double value = 0.0;
  double std_error = 0.0;
};

MomentValue m_value_exact(const FinitePointSet& a, const PsiSpec& psi,
                          bool positive_part = true);
MomentValue m_value_mc(const FinitePointSet& a, const PerturbationLaw& law, const PsiSpec& psi,
                       std::int64_t replicates, std::uint64_t seed, int threads = 1);

// C-scale complexity psi^{-1}(M(A)); identity psi is the plain mu-complexity
double mu_complexity_exact(const FinitePointSet& a, const PerturbationLaw& law,
                           const PsiSpec& psi, bool positive_part = true);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  // the psi^{-1}-of-mean plug-in is biased upward for exponential psi
  bool biased_transform = false;
};

McEstimate mu_complexity_mc(const FinitePointSet& a, const PerturbationLaw& law,
                            const PsiSpec& psi, std::int64_t replicates, std::uint64_t seed,
                            int threads = 1);

// the three contraction-lemma comparisons in psi scale
struct ContractionReport {
  double m_phi_a = 0.0;      // M(phi o A)
  double m_a = 0.0;          // M(A)
  double m_conv_a = 0.0;     // M over A plus sampled hull points
  double m_signed_hull = 0.0;  // M(conv{+-phi o A}) via its extreme points
  double two_m_a = 0.0;
  double se_phi_a = 0.0, se_a = 0.0, se_conv_a = 0.0, se_signed_hull = 0.0;
  bool exact = true;
  bool pass_phi = false;
  bool pass_conv = false;
  bool pass_signed_hull = false;
};

// replicates == 0 demands exact enumeration (rademacher, n <= 22)
ContractionReport contraction_check(const FinitePointSet& a, const Contraction& phi,
                                    const PerturbationLaw& law, const PsiSpec& psi,
                                    std::int64_t replicates = 0, std::uint64_t seed = 0,
                                    int threads = 1, int hull_samples = 8);

struct ComplexityBound {
  double bound = 0.0;
  double lambda_opt = 0.0;
};

// closed form V sqrt(2n(L log 2 + log 2d)) with the optimizing lambda;
// gaussian laws scale both by sigma
ComplexityBound relu_class_complexity_bound(double v, int relu_layers, int input_dim,
                                            std::int64_t n,
                                            const PerturbationLaw& law = PerturbationLaw::rademacher());

struct EmpiricalComplexity {
  double value = 0.0;
  double std_error = 0.0;
  bool exact = false;
};

// complexity of {(f(X_1),...,f(X_n)) : f in nets}; every net must satisfy
// V(net) <= v_cap. Exact enumeration when rademacher and n <= 22, else MC.
EmpiricalComplexity empirical_class_complexity(std::span<const CanonicalNet> nets,
                                               const Matrix& inputs, const PerturbationLaw& law,
                                               const PsiSpec& psi, std::int64_t replicates,
                                               std::uint64_t seed, double v_cap, int threads = 1);

}  // namespace pathvar
