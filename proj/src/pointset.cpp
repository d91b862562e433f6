#include "pathvar/pointset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <unordered_set>

namespace pathvar {

namespace {

double normalize_zero(double v) { return v == 0.0 ? 0.0 : v; }

std::string point_key(const std::vector<double>& p) {
  std::string key(p.size() * sizeof(double), '\0');
  std::memcpy(key.data(), p.data(), key.size());
  return key;
}

}  // namespace

FinitePointSet::FinitePointSet(std::vector<std::vector<double>> points, bool symmetric)
    : dim_(points.empty() ? 0 : points.front().size()),
      points_(std::move(points)),
      symmetric_(symmetric) {
  if (points_.empty()) throw PreconditionError("point set must be nonempty");
  for (const auto& p : points_) {
    if (p.size() != dim_) throw DimensionError("point set has mixed dimensions");
    for (double v : p) {
      if (!std::isfinite(v)) throw PreconditionError("points must be finite");
    }
  }
  if (symmetric_) {
    std::unordered_set<std::string> keys;
    keys.reserve(points_.size() * 2);
    for (const auto& p : points_) {
      auto q = p;
      for (auto& v : q) v = normalize_zero(v);
      keys.insert(point_key(q));
    }
    for (const auto& p : points_) {
      auto q = p;
      for (auto& v : q) v = normalize_zero(-v);
      if (!keys.count(point_key(q)))
        throw PreconditionError("symmetric flag set but a negation is missing");
    }
  }
}

void PerturbationLaw::validate() const {
  if (kind == Kind::gaussian && !(sigma > 0.0))
    throw PreconditionError("gaussian law requires sigma > 0");
}

void PsiSpec::validate() const {
  if (kind == Kind::exponential && !(lambda > 0.0))
    throw PreconditionError("exponential psi requires lambda > 0");
}

double PsiSpec::apply(double z) const {
  return kind == Kind::identity ? z : std::exp(lambda * z);
}

double PsiSpec::inverse(double m) const {
  return kind == Kind::identity ? m : std::log(m) / lambda;
}

Contraction Contraction::clip(double b) {
  if (!(b > 0.0)) throw PreconditionError("clip requires B > 0");
  return {Kind::clip, b};
}

Contraction Contraction::square_scaled(double b) {
  if (!(b > 0.0)) throw PreconditionError("square_scaled requires B > 0");
  return {Kind::square_scaled, b};
}

double Contraction::operator()(double z) const {
  switch (kind) {
    case Kind::identity: return z;
    case Kind::relu: return z > 0.0 ? z : 0.0;
    case Kind::clip: return std::max(-bound, std::min(bound, z));
    case Kind::square_scaled: {
      double a = std::abs(z);
      if (a <= 2.0 * bound) return z * z / (4.0 * bound);
      return a - bound;
    }
  }
  return z;
}

FinitePointSet layer_op(const FinitePointSet& a, const Contraction& phi) {
  std::vector<std::vector<double>> out;
  out.reserve(2 * a.size());
  std::unordered_set<std::string> seen;
  seen.reserve(2 * a.size());
  auto push = [&](std::vector<double>&& p) {
    auto key = point_key(p);
    if (seen.insert(std::move(key)).second) out.push_back(std::move(p));
  };
  for (const auto& p : a.points()) {
    std::vector<double> plus(p.size()), minus(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      double v = normalize_zero(phi(p[i]));
      plus[i] = v;
      minus[i] = normalize_zero(-v);
    }
    push(std::move(plus));
    push(std::move(minus));
  }
  return FinitePointSet(std::move(out), true);
}

}  // namespace pathvar
