#include "pathvar/nets.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

namespace pathvar {

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double relu(double z) { return z > 0.0 ? z : 0.0; }

void check_stage_chain(std::size_t inner, const Matrix& w, std::size_t stage_index) {
  if (w.rows == 0 || w.cols == 0)
    throw DimensionError("stage " + std::to_string(stage_index) + " has an empty weight matrix");
  if (w.cols != inner)
    throw DimensionError("stage " + std::to_string(stage_index) + " expects " +
                         std::to_string(inner) + " inputs, matrix has " + std::to_string(w.cols) +
                         " columns");
  if (!all_finite(w.data))
    throw PreconditionError("stage " + std::to_string(stage_index) + " has non-finite weights");
}

}  // namespace

double OutputSpec::apply(double z) const {
  if (kind == Kind::linear) return z;
  return std::max(-clip_bound, std::min(clip_bound, z));
}

void OutputSpec::validate() const {
  if (kind == Kind::clip && !(clip_bound > 0.0))
    throw PreconditionError("clip output requires B > 0");
}

InputPoint::InputPoint(std::vector<double> coords) : coords_(std::move(coords)) {
  for (double c : coords_) {
    if (!std::isfinite(c) || c < -1.0 || c > 1.0)
      throw PreconditionError("input coordinates must lie in [-1, 1]");
  }
}

GeneralReLUNet::GeneralReLUNet(int input_dim, std::vector<DenseStage> stages, OutputSpec output)
    : input_dim_(input_dim), stages_(std::move(stages)), output_(output) {
  if (input_dim_ <= 0) throw DimensionError("input dimension must be positive");
  if (stages_.empty()) throw DimensionError("a net needs at least the output stage");
  std::size_t inner = static_cast<std::size_t>(input_dim_);
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    auto& st = stages_[s];
    check_stage_chain(inner, st.weights, s);
    if (st.offsets.empty()) st.offsets.assign(st.weights.rows, 0.0);
    if (st.offsets.size() != st.weights.rows)
      throw DimensionError("stage " + std::to_string(s) + " offset length mismatch");
    if (!all_finite(st.offsets))
      throw PreconditionError("stage " + std::to_string(s) + " has non-finite offsets");
    inner = st.weights.rows;
  }
  if (stages_.back().weights.rows != 1)
    throw DimensionError("the outermost stage must be a single output row");
  output_.validate();
}

std::size_t encoded_width(InputEncoding enc, int input_dim) {
  auto d = static_cast<std::size_t>(input_dim);
  switch (enc) {
    case InputEncoding::raw: return d;
    case InputEncoding::signed_pairs: return 2 * d;
    case InputEncoding::signed_locked: return 2 * (d + 1);
  }
  return 0;
}

void encode_input(InputEncoding enc, std::span<const double> x, std::vector<double>& out) {
  std::size_t d = x.size();
  out.resize(encoded_width(enc, static_cast<int>(d)));
  switch (enc) {
    case InputEncoding::raw:
      std::copy(x.begin(), x.end(), out.begin());
      break;
    case InputEncoding::signed_pairs:
      for (std::size_t i = 0; i < d; ++i) {
        out[i] = x[i];
        out[d + i] = -x[i];
      }
      break;
    case InputEncoding::signed_locked:
      for (std::size_t i = 0; i < d; ++i) {
        out[i] = x[i];
        out[d + 1 + i] = -x[i];
      }
      out[d] = 1.0;
      out[2 * d + 1] = -1.0;
      break;
  }
}

CanonicalNet::CanonicalNet(int input_dim, InputEncoding encoding,
                           std::vector<CanonicalStage> stages, OutputSpec output)
    : input_dim_(input_dim), encoding_(encoding), stages_(std::move(stages)), output_(output) {
  if (input_dim_ <= 0) throw DimensionError("input dimension must be positive");
  if (stages_.empty()) throw DimensionError("a net needs at least the output stage");
  std::size_t inner = inner_width();
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    auto& st = stages_[s];
    check_stage_chain(inner, st.weights, s);
    for (double w : st.weights.data) {
      if (w < 0.0) throw PreconditionError("canonical weights must be nonnegative");
    }
    bool is_output = (s + 1 == stages_.size());
    if (is_output) {
      if (!st.signs.empty()) throw DimensionError("output stage carries no activation signs");
    } else {
      if (st.signs.empty()) st.signs.assign(st.weights.rows, 1);
      if (st.signs.size() != st.weights.rows)
        throw DimensionError("stage " + std::to_string(s) + " sign tag length mismatch");
      for (auto sg : st.signs) {
        if (sg != 1 && sg != -1) throw PreconditionError("sign tags must be +1 or -1");
      }
    }
    inner = st.weights.rows;
  }
  if (stages_.back().weights.rows != 1)
    throw DimensionError("the outermost stage must be a single output row");
  output_.validate();
}

bool CanonicalNet::has_duplicate_structure() const {
  if (encoding_ != InputEncoding::signed_locked) return false;
  std::size_t prev_half = static_cast<std::size_t>(input_dim_) + 1;
  for (std::size_t s = 0; s + 1 < stages_.size(); ++s) {
    const auto& st = stages_[s];
    if (st.weights.rows % 2 != 0) return false;
    std::size_t half = st.weights.rows / 2;
    for (std::size_t u = 0; u < half; ++u) {
      if (st.signs[u] != 1 || st.signs[half + u] != -1) return false;
      auto top = st.weights.row(u);
      auto twin = st.weights.row(half + u);
      if (!std::equal(top.begin(), top.end(), twin.begin())) return false;
    }
    // locked unit: one unit weight on the previous locked slot, nothing else
    auto locked = st.weights.row(half - 1);
    for (std::size_t j = 0; j < locked.size(); ++j) {
      double expect = (j == prev_half - 1) ? 1.0 : 0.0;
      if (locked[j] != expect) return false;
    }
    prev_half = half;
  }
  return true;
}

NormalizedNet::NormalizedNet(CanonicalNet tables, double scale,
                             std::vector<std::vector<std::uint32_t>> dead_units)
    : tables_(std::move(tables)), scale_(scale), dead_units_(std::move(dead_units)) {
  if (!(scale_ >= 0.0) || !std::isfinite(scale_))
    throw PreconditionError("normalized scale V must be a finite nonnegative number");
  if (dead_units_.size() != tables_.hidden_layers())
    throw DimensionError("dead unit metadata must list one entry per hidden stage");
}

void NormalizedNet::validate(double tol) const {
  for (const auto& st : tables_.stages()) {
    for (std::size_t u = 0; u < st.weights.rows; ++u) {
      double sum = 0.0;
      for (double w : st.weights.row(u)) sum += w;
      if (std::abs(sum - 1.0) > tol)
        throw PreconditionError("probability row does not sum to one");
    }
  }
}

double forward(const GeneralReLUNet& net, std::span<const double> x, EvalScratch& scratch) {
  auto& cur = scratch.a;
  auto& next = scratch.b;
  cur.assign(x.begin(), x.end());
  const auto& stages = net.stages();
  for (std::size_t s = 0; s + 1 < stages.size(); ++s) {
    const auto& st = stages[s];
    next.resize(st.weights.rows);
    for (std::size_t u = 0; u < st.weights.rows; ++u)
      next[u] = relu(dot(st.weights.row(u), cur) + st.offsets[u]);
    std::swap(cur, next);
  }
  const auto& out = stages.back();
  double z = dot(out.weights.row(0), cur) + out.offsets[0];
  return net.output().apply(z);
}

namespace {

double forward_canonical(const CanonicalNet& net, std::span<const double> inner,
                         EvalScratch& scratch) {
  auto& cur = scratch.a;
  auto& next = scratch.b;
  cur.assign(inner.begin(), inner.end());
  const auto& stages = net.stages();
  for (std::size_t s = 0; s + 1 < stages.size(); ++s) {
    const auto& st = stages[s];
    next.resize(st.weights.rows);
    for (std::size_t u = 0; u < st.weights.rows; ++u) {
      double z = relu(dot(st.weights.row(u), cur));
      next[u] = st.signs[u] == 1 ? z : -z;
    }
    std::swap(cur, next);
  }
  double z = dot(stages.back().weights.row(0), cur);
  return net.output().apply(z);
}

}  // namespace

double forward(const CanonicalNet& net, std::span<const double> x, EvalScratch& scratch) {
  std::vector<double> inner;
  encode_input(net.encoding(), x, inner);
  return forward_canonical(net, inner, scratch);
}

double forward(const NormalizedNet& net, std::span<const double> x, EvalScratch& scratch) {
  std::vector<double> inner;
  encode_input(net.tables().encoding(), x, inner);
  for (auto& v : inner) v *= net.scale();
  return forward_canonical(net.tables(), inner, scratch);
}

namespace {

template <typename Net>
double evaluate_checked(const Net& net, const InputPoint& x, int want_dim) {
  if (static_cast<int>(x.dim()) != want_dim)
    throw DimensionError("input point has wrong dimension");
  EvalScratch scratch;
  return forward(net, x.coords(), scratch);
}

}  // namespace

double evaluate(const GeneralReLUNet& net, const InputPoint& x) {
  return evaluate_checked(net, x, net.input_dim());
}

double evaluate(const CanonicalNet& net, const InputPoint& x) {
  return evaluate_checked(net, x, net.input_dim());
}

double evaluate(const NormalizedNet& net, const InputPoint& x) {
  return evaluate_checked(net, x, net.tables().input_dim());
}

CanonicalNet canonicalize(const GeneralReLUNet& net) {
  const auto& stages = net.stages();
  std::vector<CanonicalStage> out_stages;
  out_stages.reserve(stages.size());

  // slot layout per canonical level: [units, +1, twins, -1]; the innermost
  // level is the signed_locked input encoding itself
  std::size_t in_half = static_cast<std::size_t>(net.input_dim()) + 1;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const auto& st = stages[s];
    bool is_output = (s + 1 == stages.size());
    std::size_t user_rows = st.weights.rows;
    std::size_t out_half = is_output ? 1 : user_rows + 1;
    std::size_t rows = is_output ? 1 : 2 * out_half;
    Matrix w(rows, 2 * in_half, 0.0);
    std::size_t fill_rows = is_output ? 1 : user_rows;
    for (std::size_t u = 0; u < fill_rows; ++u) {
      for (std::size_t v = 0; v < st.weights.cols; ++v) {
        double wv = st.weights(u, v);
        if (wv >= 0.0)
          w(u, v) += wv;
        else
          w(u, in_half + v) += -wv;
      }
      double b = st.offsets[u];
      if (b >= 0.0)
        w(u, in_half - 1) += b;
      else
        w(u, 2 * in_half - 1) += -b;
    }
    CanonicalStage cs;
    if (!is_output) {
      w(user_rows, in_half - 1) = 1.0;  // locked unit rides the previous locked slot
      for (std::size_t u = 0; u < out_half; ++u) {
        auto top = w.row(u);
        auto twin = w.row(out_half + u);
        std::copy(top.begin(), top.end(), twin.begin());
      }
      cs.signs.assign(rows, 1);
      for (std::size_t u = out_half; u < rows; ++u) cs.signs[u] = -1;
    }
    cs.weights = std::move(w);
    out_stages.push_back(std::move(cs));
    in_half = out_half;
  }
  return CanonicalNet(net.input_dim(), InputEncoding::signed_locked, std::move(out_stages),
                      net.output());
}

CanonicalNet shift_output_by_constant(const CanonicalNet& net, double c) {
  bool depth_one = net.depth() == 1 && net.encoding() == InputEncoding::signed_locked;
  if (!depth_one && !net.has_duplicate_structure())
    throw PreconditionError("constant shift needs the locked unit structure");
  auto stages = net.stages();
  auto& out = stages.back().weights;
  std::size_t half = net.depth() == 1 ? static_cast<std::size_t>(net.input_dim()) + 1
                                      : stages[stages.size() - 2].weights.rows / 2;
  std::size_t plus_slot = half - 1;
  std::size_t minus_slot = 2 * half - 1;
  if (c >= 0.0)
    out(0, plus_slot) += c;
  else
    out(0, minus_slot) += -c;
  return CanonicalNet(net.input_dim(), net.encoding(), std::move(stages), net.output());
}

CanonicalNet scale_output(const CanonicalNet& net, double c) {
  if (!(c >= 0.0)) throw PreconditionError("output scale must be nonnegative");
  auto stages = net.stages();
  for (auto& w : stages.back().weights.data) w *= c;
  return CanonicalNet(net.input_dim(), net.encoding(), std::move(stages), net.output());
}

}  // namespace pathvar
