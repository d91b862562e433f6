#pragma once

#include <cstdint>
#include <vector>

#include "pathvar/errors.hpp"
#include "pathvar/matrix.hpp"

namespace pathvar {

// finite subset of R^n; symmetric means -A == A and is verified on construction
class FinitePointSet {
 public:
  FinitePointSet(std::vector<std::vector<double>> points, bool symmetric = false);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  bool symmetric() const { return symmetric_; }
  const std::vector<std::vector<double>>& points() const { return points_; }

 private:
  std::size_t dim_;
  std::vector<std::vector<double>> points_;
  bool symmetric_;
};

struct PerturbationLaw {
  enum class Kind { rademacher, gaussian };
  Kind kind = Kind::rademacher;
  double sigma = 1.0;  // gaussian only

  static PerturbationLaw rademacher() { return {Kind::rademacher, 1.0}; }
  static PerturbationLaw gaussian(double sigma) { return {Kind::gaussian, sigma}; }
  void validate() const;
};

struct PsiSpec {
  enum class Kind { identity, exponential };
  Kind kind = Kind::identity;
  double lambda = 1.0;  // exponential only

  static PsiSpec identity() { return {Kind::identity, 1.0}; }
  static PsiSpec exponential(double lambda) { return {Kind::exponential, lambda}; }
  void validate() const;

  double apply(double z) const;
  double inverse(double m) const;
};

// 1-Lipschitz map fixing 0
struct Contraction {
  enum class Kind { identity, relu, clip, square_scaled };
  Kind kind = Kind::relu;
  double bound = 0.0;  // clip / square_scaled parameter B

  static Contraction identity() { return {Kind::identity, 0.0}; }
  static Contraction relu() { return {Kind::relu, 0.0}; }
  static Contraction clip(double b);
  // z^2/(4B) on [-2B, 2B], continued 1-Lipschitz outside; used for the
  // squares-of-differences comparison
  static Contraction square_scaled(double b);

  double operator()(double z) const;
};

// extreme points of conv{+-phi o A}: applies phi coordinatewise, adds the
// sign flips, and deduplicates bitwise (zero is normalized so +-0 coincide)
FinitePointSet layer_op(const FinitePointSet& a, const Contraction& phi);

}  // namespace pathvar
